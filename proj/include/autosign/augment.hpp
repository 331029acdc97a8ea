#pragma once

#include "autosign/pose.hpp"
#include "autosign/rng.hpp"

namespace autosign {

/// Part-aware geometric augmentation magnitudes. Hands rotate and scale
/// independently about their centroids; the face receives a small affine
/// jitter; the body a per-frame translation jitter.
struct PartAwareConfig {
  bool enabled = true;
  double hand_rot_max_deg = 10.0;
  double hand_scale_min = 0.9;
  double hand_scale_max = 1.1;
  double face_jitter_sigma = 0.005;
  double body_jitter_sigma = 0.005;
};

/// Training-time augmentation configuration. Sigmas and offsets are
/// expressed in normalized units: they are rescaled by half the detected
/// bounding-box extent per axis, so sigma 0.01 perturbs a sequence by ~0.01
/// after the [-1,1] normalization regardless of the raw coordinate units.
struct AugConfig {
  bool enabled = true;
  double jitter_sigma = 0.01;
  double scale_min = 0.85;
  double scale_max = 1.15;
  double temporal_mask_p = 0.15;
  double frame_dropout_p = 0.05;
  int time_warp_max_shift = 1;
  double per_aug_apply_p = 0.5;
  PartAwareConfig part_aware;

  void validate() const;
};

/// Adds i.i.d. N(0, sigma^2) to every detected coordinate; (0,0) sentinels
/// are untouched. Sigma is in normalized units (see AugConfig).
PoseSequence gaussian_jitter(const PoseSequence& seq, double sigma, RngStream& rng);

/// One uniform factor per sequence, applied about the detected-keypoint
/// centroid of the whole sequence.
PoseSequence random_scale(const PoseSequence& seq, double lo, double hi, RngStream& rng);

/// Zeroes whole frames (all joints -> (0,0)) independently with probability
/// p; frame count is unchanged.
PoseSequence temporal_mask(const PoseSequence& seq, double p, RngStream& rng);

/// Deletes frames independently with probability p, always retaining at
/// least frame 0. Surviving frames keep their relative order.
PoseSequence frame_dropout(const PoseSequence& seq, double p, RngStream& rng);

/// Per-frame index jitter: output t takes input clamp(t + delta_t, 0, T-1)
/// with delta_t uniform in {-max_shift..max_shift}. No interpolation.
PoseSequence time_warp(const PoseSequence& seq, int max_shift, RngStream& rng);

/// Independent per-part transforms; parts absent from the layout are
/// skipped. The per-part draw count is fixed, so a change in one part's
/// coordinates never shifts another part's random stream.
PoseSequence part_aware_augment(const PoseSequence& seq, const PartAwareConfig& cfg,
                                RngStream& rng);

/// Fixed order: part_aware -> jitter -> scale -> temporal_mask ->
/// frame_dropout -> time_warp, each gated by an independent
/// Bernoulli(per_aug_apply_p) draw. A disabled config is the identity.
PoseSequence apply_pipeline(const PoseSequence& seq, const AugConfig& cfg, RngStream& rng);

}  // namespace autosign
