#include "autosign/augment.hpp"

#include <cmath>

namespace autosign {

namespace {

struct Extent {
  double half_x = 0.0;
  double half_y = 0.0;
  bool any = false;
};

// Half extent of the detected bounding box per axis; converts normalized-unit
// sigmas into the sequence's raw coordinate scale.
Extent detected_extent(const PoseSequence& seq) {
  Extent e;
  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  for (Index t = 0; t < seq.frame_count(); ++t) {
    for (Index j = 0; j < seq.joint_count(); ++j) {
      if (seq.missing(t, j)) continue;
      const double x = seq.frames(t, 2 * j), y = seq.frames(t, 2 * j + 1);
      if (!e.any) {
        min_x = max_x = x;
        min_y = max_y = y;
        e.any = true;
      } else {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
      }
    }
  }
  e.half_x = (max_x - min_x) / 2.0;
  e.half_y = (max_y - min_y) / 2.0;
  return e;
}

void check_prob(double p, const char* name) {
  if (p < 0.0 || p > 1.0) throw ConfigError(std::string(name) + " must be in [0,1]");
}

}  // namespace

void AugConfig::validate() const {
  if (jitter_sigma < 0.0) throw ConfigError("augment.jitter_sigma must be >= 0");
  if (!(scale_min > 0.0) || scale_max < scale_min)
    throw ConfigError("augment scale range must satisfy 0 < min <= max");
  check_prob(temporal_mask_p, "augment.temporal_mask_p");
  if (frame_dropout_p < 0.0 || frame_dropout_p >= 1.0)
    throw ConfigError("augment.frame_dropout_p must be in [0,1)");
  if (time_warp_max_shift < 0) throw ConfigError("augment.time_warp_max_shift must be >= 0");
  check_prob(per_aug_apply_p, "augment.apply_p");
  if (part_aware.hand_rot_max_deg < 0.0 || part_aware.face_jitter_sigma < 0.0 ||
      part_aware.body_jitter_sigma < 0.0)
    throw ConfigError("part-aware magnitudes must be >= 0");
  if (!(part_aware.hand_scale_min > 0.0) ||
      part_aware.hand_scale_max < part_aware.hand_scale_min)
    throw ConfigError("part-aware hand scale range must satisfy 0 < min <= max");
}

PoseSequence gaussian_jitter(const PoseSequence& seq, double sigma, RngStream& rng) {
  if (sigma < 0.0) throw ConfigError("jitter sigma must be >= 0");
  PoseSequence out = seq;
  const Extent e = detected_extent(seq);
  const double sx = sigma * e.half_x, sy = sigma * e.half_y;
  for (Index t = 0; t < seq.frame_count(); ++t) {
    for (Index j = 0; j < seq.joint_count(); ++j) {
      // Draws happen for every coordinate so the stream stays aligned no
      // matter which keypoints are missing.
      const double nx = rng.normal(), ny = rng.normal();
      if (seq.missing(t, j) || sigma == 0.0) continue;
      out.frames(t, 2 * j) += sx * nx;
      out.frames(t, 2 * j + 1) += sy * ny;
    }
  }
  return out;
}

PoseSequence random_scale(const PoseSequence& seq, double lo, double hi, RngStream& rng) {
  if (!(lo > 0.0) || hi < lo) throw ConfigError("scale range must satisfy 0 < min <= max");
  const double factor = rng.uniform(lo, hi);
  PoseSequence out = seq;
  if (factor == 1.0) return out;
  double cx = 0.0, cy = 0.0;
  Index n = 0;
  for (Index t = 0; t < seq.frame_count(); ++t) {
    for (Index j = 0; j < seq.joint_count(); ++j) {
      if (seq.missing(t, j)) continue;
      cx += seq.frames(t, 2 * j);
      cy += seq.frames(t, 2 * j + 1);
      ++n;
    }
  }
  if (n == 0) return out;
  cx /= static_cast<double>(n);
  cy /= static_cast<double>(n);
  for (Index t = 0; t < seq.frame_count(); ++t) {
    for (Index j = 0; j < seq.joint_count(); ++j) {
      if (seq.missing(t, j)) continue;
      out.frames(t, 2 * j) = cx + factor * (seq.frames(t, 2 * j) - cx);
      out.frames(t, 2 * j + 1) = cy + factor * (seq.frames(t, 2 * j + 1) - cy);
    }
  }
  return out;
}

PoseSequence temporal_mask(const PoseSequence& seq, double p, RngStream& rng) {
  check_prob(p, "temporal_mask p");
  PoseSequence out = seq;
  for (Index t = 0; t < seq.frame_count(); ++t) {
    if (rng.uniform() < p) out.frames.row(t).setZero();
  }
  return out;
}

PoseSequence frame_dropout(const PoseSequence& seq, double p, RngStream& rng) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("frame_dropout p must be in [0,1)");
  std::vector<Index> kept;
  for (Index t = 0; t < seq.frame_count(); ++t) {
    if (!(rng.uniform() < p)) kept.push_back(t);
  }
  if (kept.empty()) kept.push_back(0);  // retention floor
  PoseSequence out = seq;
  out.frames.resize(static_cast<Index>(kept.size()), seq.frames.cols());
  for (std::size_t i = 0; i < kept.size(); ++i) out.frames.row(static_cast<Index>(i)) = seq.frames.row(kept[i]);
  return out;
}

PoseSequence time_warp(const PoseSequence& seq, int max_shift, RngStream& rng) {
  if (max_shift < 0) throw ConfigError("time_warp max_shift must be >= 0");
  PoseSequence out = seq;
  const Index t_count = seq.frame_count();
  for (Index t = 0; t < t_count; ++t) {
    const long delta = rng.uniform_int(-max_shift, max_shift);
    const Index src = std::clamp<Index>(t + delta, 0, t_count - 1);
    out.frames.row(t) = seq.frames.row(src);
  }
  return out;
}

namespace {

// Rotate+scale detected part points about the frame's detected part centroid.
void transform_part_frame(RowMat& frames, Index t, const PartSpan& span, double angle,
                          double factor, double dx, double dy) {
  double cx = 0.0, cy = 0.0;
  Index n = 0;
  for (Index i = 0; i < span.count; ++i) {
    const Index j = span.begin + i;
    if (frames(t, 2 * j) == 0.0 && frames(t, 2 * j + 1) == 0.0) continue;
    cx += frames(t, 2 * j);
    cy += frames(t, 2 * j + 1);
    ++n;
  }
  if (n == 0) return;
  cx /= static_cast<double>(n);
  cy /= static_cast<double>(n);
  const double c = std::cos(angle), s = std::sin(angle);
  for (Index i = 0; i < span.count; ++i) {
    const Index j = span.begin + i;
    if (frames(t, 2 * j) == 0.0 && frames(t, 2 * j + 1) == 0.0) continue;
    const double x = frames(t, 2 * j) - cx;
    const double y = frames(t, 2 * j + 1) - cy;
    frames(t, 2 * j) = cx + factor * (c * x - s * y) + dx;
    frames(t, 2 * j + 1) = cy + factor * (s * x + c * y) + dy;
  }
}

}  // namespace

PoseSequence part_aware_augment(const PoseSequence& seq, const PartAwareConfig& cfg,
                                RngStream& rng) {
  PoseSequence out = seq;
  const Extent e = detected_extent(seq);
  // Fixed draw order: left hand, right hand, face, body. Draw counts depend
  // only on the layout and frame count, never on coordinate values.
  for (Part hand : {Part::left_hand, Part::right_hand}) {
    const double angle = rng.uniform(-cfg.hand_rot_max_deg, cfg.hand_rot_max_deg) * M_PI / 180.0;
    const double factor = rng.uniform(cfg.hand_scale_min, cfg.hand_scale_max);
    if (!out.layout.has(hand)) continue;
    const PartSpan span = out.layout.span(hand);
    for (Index t = 0; t < out.frame_count(); ++t)
      transform_part_frame(out.frames, t, span, angle, factor, 0.0, 0.0);
  }
  {
    // Face: affine jitter about the per-frame centroid, I + eps on the linear
    // part plus a translation in normalized units.
    double a11 = 1.0 + cfg.face_jitter_sigma * rng.normal();
    double a12 = cfg.face_jitter_sigma * rng.normal();
    double a21 = cfg.face_jitter_sigma * rng.normal();
    double a22 = 1.0 + cfg.face_jitter_sigma * rng.normal();
    double tx = cfg.face_jitter_sigma * e.half_x * rng.normal();
    double ty = cfg.face_jitter_sigma * e.half_y * rng.normal();
    if (out.layout.has(Part::face)) {
      const PartSpan span = out.layout.span(Part::face);
      for (Index t = 0; t < out.frame_count(); ++t) {
        double cx = 0.0, cy = 0.0;
        Index n = 0;
        for (Index i = 0; i < span.count; ++i) {
          const Index j = span.begin + i;
          if (out.missing(t, j)) continue;
          cx += out.frames(t, 2 * j);
          cy += out.frames(t, 2 * j + 1);
          ++n;
        }
        if (n == 0) continue;
        cx /= static_cast<double>(n);
        cy /= static_cast<double>(n);
        for (Index i = 0; i < span.count; ++i) {
          const Index j = span.begin + i;
          if (out.missing(t, j)) continue;
          const double x = out.frames(t, 2 * j) - cx;
          const double y = out.frames(t, 2 * j + 1) - cy;
          out.frames(t, 2 * j) = cx + a11 * x + a12 * y + tx;
          out.frames(t, 2 * j + 1) = cy + a21 * x + a22 * y + ty;
        }
      }
    }
  }
  {
    // Body: per-frame global translation jitter.
    const bool has_body = out.layout.has(Part::body);
    PartSpan span{};
    if (has_body) span = out.layout.span(Part::body);
    for (Index t = 0; t < out.frame_count(); ++t) {
      const double dx = cfg.body_jitter_sigma * e.half_x * rng.normal();
      const double dy = cfg.body_jitter_sigma * e.half_y * rng.normal();
      if (!has_body) continue;
      for (Index i = 0; i < span.count; ++i) {
        const Index j = span.begin + i;
        if (out.missing(t, j)) continue;
        out.frames(t, 2 * j) += dx;
        out.frames(t, 2 * j + 1) += dy;
      }
    }
  }
  return out;
}

PoseSequence apply_pipeline(const PoseSequence& seq, const AugConfig& cfg, RngStream& rng) {
  cfg.validate();
  if (!cfg.enabled) return seq;
  PoseSequence out = seq;
  if (cfg.part_aware.enabled && rng.bernoulli(cfg.per_aug_apply_p))
    out = part_aware_augment(out, cfg.part_aware, rng);
  if (rng.bernoulli(cfg.per_aug_apply_p)) out = gaussian_jitter(out, cfg.jitter_sigma, rng);
  if (rng.bernoulli(cfg.per_aug_apply_p))
    out = random_scale(out, cfg.scale_min, cfg.scale_max, rng);
  if (rng.bernoulli(cfg.per_aug_apply_p)) out = temporal_mask(out, cfg.temporal_mask_p, rng);
  if (rng.bernoulli(cfg.per_aug_apply_p)) out = frame_dropout(out, cfg.frame_dropout_p, rng);
  if (rng.bernoulli(cfg.per_aug_apply_p)) out = time_warp(out, cfg.time_warp_max_shift, rng);
  return out;
}

}  // namespace autosign
