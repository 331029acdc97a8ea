#pragma once

#include <vector>

#include "autosign/rng.hpp"
#include "autosign/tensor.hpp"

namespace autosign {

// Differentiable operations. Every function computes the forward value and,
// when the tape is recording and an input carries requires_grad, records a
// backward rule. Inputs are never mutated.

/// C = A·B for rank-2 tensors [m×k]·[k×n]. Backward: dA = dC·Bᵀ, dB = Aᵀ·dC.
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);

/// 1D convolution. input [C_in×L], weight [C_out×C_in×k], bias [C_out].
/// L_out = floor((L + 2·padding − k)/stride) + 1 with zero padding outside
/// [0, L). Throws DataError when the padded input is shorter than the kernel.
Tensor conv1d(Tape& tape, const Tensor& input, const Tensor& weight,
              const Tensor& bias, Index stride, Index padding);

/// Normalization over the last axis with population variance:
/// (x − mean)/sqrt(var + eps)·gamma + beta.
Tensor layer_norm(Tape& tape, const Tensor& x, const Tensor& gamma,
                  const Tensor& beta, double eps = 1e-5);

/// Softmax along `axis`, computed with max-subtraction.
Tensor softmax(Tape& tape, const Tensor& x, int axis);

/// Log-softmax along `axis` (stable; rows exponentiate-and-sum to 1).
Tensor log_softmax(Tape& tape, const Tensor& x, int axis);

/// Row gather from table [V×d] -> [len×d]. Backward scatter-adds into the
/// table gradient. Throws ShapeError on an out-of-range id.
Tensor embedding_lookup(Tape& tape, const Tensor& table, const std::vector<int>& ids);

/// Mean negative log-likelihood over non-pad positions. logits is [B×T×V]
/// (or [N×V]); targets is the row-major flattened target grid. Positions
/// whose target equals pad_id contribute nothing, exactly. Throws DataError
/// when every position is padding.
Tensor masked_cross_entropy(Tape& tape, const Tensor& logits,
                            const std::vector<int>& targets, int pad_id);

// Elementwise / structural helpers used to assemble the networks.
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);              // same shape
Tensor add_rowwise(Tape& tape, const Tensor& x, const Tensor& bias);   // bias over last axis
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);              // same shape
Tensor scale(Tape& tape, const Tensor& x, double factor);
Tensor gelu(Tape& tape, const Tensor& x);  // exact erf form
/// Inverted dropout: keeps with probability 1−p and rescales by 1/(1−p).
/// Identity when training is false or p == 0.
Tensor dropout(Tape& tape, const Tensor& x, double p, RngStream& rng, bool training);
Tensor transpose(Tape& tape, const Tensor& x);  // rank 2
Tensor reshape(Tape& tape, const Tensor& x, Shape shape);
Tensor slice_rows(Tape& tape, const Tensor& x, Index start, Index count);
Tensor slice_cols(Tape& tape, const Tensor& x, Index start, Index count);
Tensor concat_rows(Tape& tape, const std::vector<Tensor>& parts);
Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts);
Tensor sum(Tape& tape, const Tensor& x);   // -> scalar [1]
Tensor mean(Tape& tape, const Tensor& x);  // -> scalar [1]
/// Elementwise log(exp(a) + exp(b)); -inf entries are absorbing and receive
/// zero gradient.
Tensor logaddexp(Tape& tape, const Tensor& a, const Tensor& b);

/// Output length of a conv1d over length `len`; < 1 means too short.
inline Index conv1d_out_len(Index len, Index kernel, Index stride, Index padding) {
  return (len + 2 * padding - kernel) / stride + 1;
}

}  // namespace autosign
