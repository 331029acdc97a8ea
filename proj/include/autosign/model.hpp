#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "autosign/ops.hpp"
#include "autosign/pose.hpp"

namespace autosign {

/// Temporal compressor stack. n_layers == 0 selects the frame-wise linear
/// embedding baseline (no compression); 1..3 stack strided convolutions.
struct CompressorConfig {
  int n_layers = 2;
  Index channels = 512;
  Index kernel = 3;
  Index stride = 2;
  Index padding = 1;
};

struct ModelConfig {
  Index input_dim = 134;  // 2J for the selected modality
  CompressorConfig compressor;
  Index d_model = 128;
  Index n_layers = 4;  // transformer blocks
  Index n_heads = 4;
  Index ffn_mult = 4;
  double dropout_p = 0.1;
  Index max_prefix_len = 512;
  Index max_text_len = 32;
  Index vocab_size = 0;

  void validate() const;
  Index head_dim() const { return d_model / n_heads; }
  /// Sequence length after the compressor stack; throws DataError when an
  /// intermediate length falls below 1.
  Index compressed_len(Index frames) const;
};

/// Named parameter registry; every tensor carries requires_grad.
struct ParamStore {
  std::vector<std::string> names;
  std::vector<Tensor> tensors;

  Tensor add(const std::string& name, Shape shape);
  const Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const;
  Index total_size() const;
  void zero_grads();
};

/// Lower-triangular attention mask over a prefix+text stream: entry (i,j) is
/// 1 iff position i may attend to position j (j <= i). Per-sample validity
/// masks are combined multiplicatively by the forward pass.
Tensor build_causal_mask(Index t_prefix, Index t_text);

/// Common surface for the autoregressive model and the CTC baseline so the
/// training loop and CLI stay model-agnostic.
class Recognizer {
 public:
  virtual ~Recognizer() = default;
  virtual std::string kind() const = 0;
  virtual const ModelConfig& config() const = 0;
  virtual ParamStore& params() = 0;
  virtual const ParamStore& params() const = 0;
  /// Training objective for one padded batch.
  virtual Tensor loss(Tape& tape, const Batch& batch, bool training,
                      RngStream& rng) const = 0;
  /// Greedy transcription of a single (normalized) pose sequence.
  virtual std::vector<int> decode(const RowMat& pose, Index true_len) const = 0;
};

struct PrefixBatch {
  std::vector<Tensor> prefix;                   // B x [t_prime x d_model]
  std::vector<std::vector<std::uint8_t>> mask;  // B x t_prime
  Index t_prime = 0;
};

// Shared pieces between the autoregressive model and the CTC encoder.
namespace nnet {

/// Builds the compressor/projection/positional/transformer parameter
/// skeleton (zeros) shared by both model kinds.
ParamStore backbone_skeleton(const ModelConfig& cfg);

/// Scaled-normal initialization: std 0.02 everywhere, with residual output
/// projections scaled by 1/sqrt(2*n_layers); biases and layer-norm offsets
/// zero, layer-norm gains one. Deterministic in the seed.
void init_params(ParamStore& params, const ModelConfig& cfg, std::uint64_t seed);

/// Compress each sample at its true length (conv -> GELU -> dropout per
/// layer), project to d_model, add the learned temporal positional rows, and
/// zero-pad every sample to a common compressed length.
PrefixBatch encode_prefix(Tape& tape, const std::vector<RowMat>& poses,
                          const std::vector<std::vector<std::uint8_t>>& pose_mask,
                          const ParamStore& params, const ModelConfig& cfg,
                          bool training, RngStream& rng);

/// Pre-norm transformer stack over a [B*S x d] stream with per-sample
/// additive attention masks ([S x S], 0 allowed / -1e30 blocked), followed by
/// a final layer norm.
Tensor transformer_stack(Tape& tape, const Tensor& x, Index batch, Index s_len,
                         const std::vector<Tensor>& add_masks, const ParamStore& params,
                         const ModelConfig& cfg, bool training, RngStream& rng);

/// Additive attention mask from a 0/1 causal mask and per-position validity.
Tensor additive_mask(const Tensor& causal, const std::vector<std::uint8_t>& valid);

}  // namespace nnet

/// Decoder-only pose-to-gloss model: compressed pose prefix and gloss token
/// embeddings share one causal stream; logits are produced at text positions
/// only.
class AutoSignModel : public Recognizer {
 public:
  AutoSignModel(ModelConfig cfg, std::uint64_t seed);
  AutoSignModel(ModelConfig cfg, ParamStore params);  // validates shapes

  std::string kind() const override { return "autoregressive"; }
  const ModelConfig& config() const override { return cfg_; }
  ParamStore& params() override { return params_; }
  const ParamStore& params() const override { return params_; }

  PrefixBatch encode_prefix(Tape& tape, const std::vector<RowMat>& poses,
                            const std::vector<std::vector<std::uint8_t>>& pose_mask,
                            bool training, RngStream& rng) const;

  /// Teacher-forced logits [B x (L_max+1) x V]. Deterministic when training
  /// is false (dropout off).
  Tensor forward_teacher_forced(Tape& tape, const Batch& batch, bool training,
                                RngStream& rng) const;

  Tensor loss(Tape& tape, const Batch& batch, bool training,
              RngStream& rng) const override;

  /// Greedy decoding from BOS; argmax ties break toward the lowest token id;
  /// stops at EOS or max_len. The result excludes BOS/EOS.
  std::vector<int> generate_greedy(const RowMat& pose, Index true_len,
                                   Index max_len) const;

  /// Length-normalized beam search. beam_size == 1 matches generate_greedy
  /// exactly, and the result never scores below the greedy sequence.
  std::vector<int> generate_beam(const RowMat& pose, Index true_len, Index beam_size,
                                 Index max_len) const;

  /// Log-probability of emitting `ids` then EOS, plus the scored step count.
  std::pair<double, Index> sequence_logprob(const RowMat& pose, Index true_len,
                                            const std::vector<int>& ids) const;

  std::vector<int> decode(const RowMat& pose, Index true_len) const override;

  static ParamStore skeleton(const ModelConfig& cfg);

 private:
  // Logits for the next token given BOS+ids (eval mode, single sample).
  Tensor step_logits(Tape& tape, const Tensor& prefix, Index prefix_len,
                     const std::vector<int>& ids_with_bos) const;

  ModelConfig cfg_;
  ParamStore params_;
};

}  // namespace autosign
