#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "autosign/pose.hpp"

namespace autosign {

/// Synthetic dataset shape. Samples are partitioned into train/dev/test, and
/// signer styles are disjoint between train and dev/test so evaluation is
/// signer-independent by construction.
struct SynthConfig {
  int vocab_size = 20;
  int train_samples = 500;
  int dev_samples = 100;
  int test_samples = 100;
  int sentence_len_min = 3;
  int sentence_len_max = 7;
  int frames_per_gloss_min = 12;
  int frames_per_gloss_max = 18;
  int train_signers = 40;
  int eval_signers = 6;
  double noise_sigma = 1.0;

  int n_samples() const { return train_samples + dev_samples + test_samples; }
  int n_signers() const { return train_signers + eval_signers; }
  void validate() const;
};

/// Gloss token name for id g, e.g. "G07".
std::string synth_gloss_name(int gloss, int vocab_size);

/// Render one pose sequence: per-gloss smooth keyframe templates are
/// concatenated (frames_per_gloss[i] frames for gloss i), warped by the
/// signer's per-part style transform, then perturbed with N(0, noise_sigma)
/// noise drawn from noise_key. Pure function of its arguments: identical
/// inputs give identical output, and noise_sigma == 0 removes the only
/// stochastic term.
RowMat synth_render(std::uint64_t seed, const std::vector<int>& glosses,
                    const std::vector<int>& frames_per_gloss, int signer,
                    std::uint64_t noise_key, double noise_sigma);

/// Generate the dataset under out_dir: poses/<sample_id>.pseq files, a
/// manifest.tsv, and splits/{train,dev,test}.txt. Byte-identical for
/// identical (config, seed).
void synth_generate(const SynthConfig& config, std::uint64_t seed,
                    const std::string& out_dir);

}  // namespace autosign
