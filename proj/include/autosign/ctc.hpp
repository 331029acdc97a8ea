#pragma once

#include "autosign/model.hpp"

namespace autosign {

// CTC class layout: class 0 is the blank; a gloss vocabulary id v maps to
// class v+1 inside this module only. The classifier therefore emits
// vocab_size + 1 logits per compressed step.
constexpr int kCtcBlank = 0;

/// CTC negative log-likelihood of a gloss id sequence under per-step
/// log-probabilities [T' x (V+1)], summed over all blank-augmented monotonic
/// alignments via the forward (alpha) recursion in log space. The recursion
/// is assembled from tape primitives, so gradients come from the tape rather
/// than a hand-written beta pass. An unalignable target yields +infinity
/// (no alignment paths), not a crash.
Tensor ctc_loss(Tape& tape, const Tensor& log_probs, const std::vector<int>& target_ids);

/// Test oracle: enumerates all (V+1)^T' frame labelings, keeps those that
/// collapse to the target, and sums their probabilities exactly. Guarded to
/// T' <= 8. Returns the negative log of the total (+infinity when the
/// target is unreachable).
double brute_force_ctc(const Tensor& log_probs, const std::vector<int>& target_ids);

/// Per-step argmax, collapse consecutive repeats, drop blanks; returns gloss
/// vocabulary ids.
std::vector<int> ctc_greedy_decode(const Tensor& log_probs);

/// Comparison system: the shared pose compressor feeding a bidirectional
/// (non-causal) transformer encoder and a per-step linear classifier trained
/// with CTC loss.
class CtcModel : public Recognizer {
 public:
  CtcModel(ModelConfig cfg, std::uint64_t seed);
  CtcModel(ModelConfig cfg, ParamStore params);

  std::string kind() const override { return "ctc"; }
  const ModelConfig& config() const override { return cfg_; }
  ParamStore& params() override { return params_; }
  const ParamStore& params() const override { return params_; }

  struct EncoderOut {
    std::vector<Tensor> log_probs;  // B x [T'_b x (V+1)], valid steps only
    Index t_prime = 0;
  };

  /// Non-causal self-attention restricted to valid compressed steps;
  /// log-softmax over V+1 classes per step.
  EncoderOut encoder_forward(Tape& tape, const std::vector<RowMat>& poses,
                             const std::vector<std::vector<std::uint8_t>>& pose_mask,
                             bool training, RngStream& rng) const;

  /// Mean per-sample CTC loss over the batch (targets from tokens_out,
  /// stripped of EOS/PAD).
  Tensor loss(Tape& tape, const Batch& batch, bool training,
              RngStream& rng) const override;

  std::vector<int> decode(const RowMat& pose, Index true_len) const override;

  static ParamStore skeleton(const ModelConfig& cfg);

 private:
  ModelConfig cfg_;
  ParamStore params_;
};

}  // namespace autosign
