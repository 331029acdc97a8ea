#include "autosign/ctc.hpp"

#include <cmath>
#include <limits>

namespace autosign {

namespace {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// Extended label sequence [blank, c1, blank, c2, ..., blank] in CTC class
// space (gloss id + 1).
std::vector<int> extended_labels(const std::vector<int>& target_ids, Index n_classes) {
  std::vector<int> z;
  z.reserve(2 * target_ids.size() + 1);
  z.push_back(kCtcBlank);
  for (int id : target_ids) {
    const int cls = id + 1;
    if (cls <= kCtcBlank || cls >= n_classes)
      throw ShapeError("CTC target id " + std::to_string(id) + " outside class range");
    z.push_back(cls);
    z.push_back(kCtcBlank);
  }
  return z;
}

}  // namespace

Tensor ctc_loss(Tape& tape, const Tensor& log_probs, const std::vector<int>& target_ids) {
  if (log_probs.rank() != 2) throw ShapeError("ctc_loss expects [T' x (V+1)] log-probs");
  const Index t_len = log_probs.dim(0);
  const Index n_classes = log_probs.dim(1);
  if (t_len < 1 || n_classes < 2) throw ShapeError("ctc_loss: degenerate log-prob matrix");

  const std::vector<int> z = extended_labels(target_ids, n_classes);
  const Index s_len = static_cast<Index>(z.size());

  // Which states allow the skip transition alpha[t-1][s-2]: only label
  // states whose token differs from the one two steps back.
  Tensor skip_mask = Tensor::full({s_len, 1}, kLogZero);
  for (Index s = 2; s < s_len; ++s)
    if (z[static_cast<std::size_t>(s)] != kCtcBlank &&
        z[static_cast<std::size_t>(s)] != z[static_cast<std::size_t>(s - 2)])
      skip_mask.data()[s] = 0.0;

  Tensor init_mask = Tensor::full({s_len, 1}, kLogZero);
  init_mask.data()[0] = 0.0;
  if (s_len > 1) init_mask.data()[1] = 0.0;

  auto emissions_at = [&](Index t) {
    Tensor row = slice_rows(tape, log_probs, t, 1);     // [1 x C]
    Tensor col = transpose(tape, row);                  // [C x 1]
    return embedding_lookup(tape, col, z);              // [s_len x 1]
  };

  Tensor alpha = add(tape, emissions_at(0), init_mask);
  const Tensor neg_inf_1 = Tensor::full({1, 1}, kLogZero);
  const Tensor neg_inf_2 = Tensor::full({2, 1}, kLogZero);
  for (Index t = 1; t < t_len; ++t) {
    Tensor stay_or_step =
        s_len > 1
            ? logaddexp(tape, alpha,
                        concat_rows(tape, {neg_inf_1, slice_rows(tape, alpha, 0, s_len - 1)}))
            : alpha;
    Tensor total = stay_or_step;
    if (s_len > 2) {
      Tensor skip =
          concat_rows(tape, {neg_inf_2, slice_rows(tape, alpha, 0, s_len - 2)});
      total = logaddexp(tape, stay_or_step, add(tape, skip, skip_mask));
    }
    alpha = add(tape, total, emissions_at(t));
  }

  Tensor final_prob;
  if (s_len == 1) {
    final_prob = alpha;  // blank-only path
  } else {
    Tensor last_blank = slice_rows(tape, alpha, s_len - 1, 1);
    Tensor last_label = slice_rows(tape, alpha, s_len - 2, 1);
    final_prob = logaddexp(tape, last_blank, last_label);
  }
  return scale(tape, reshape(tape, final_prob, {1}), -1.0);
}

double brute_force_ctc(const Tensor& log_probs, const std::vector<int>& target_ids) {
  if (log_probs.rank() != 2) throw ShapeError("brute_force_ctc expects [T' x (V+1)]");
  const Index t_len = log_probs.dim(0);
  const Index n_classes = log_probs.dim(1);
  if (t_len > 8) throw ConfigError("brute_force_ctc guard: T' must be <= 8");

  std::vector<int> target_classes;
  for (int id : target_ids) {
    const int cls = id + 1;
    if (cls <= kCtcBlank || cls >= n_classes)
      throw ShapeError("CTC target id " + std::to_string(id) + " outside class range");
    target_classes.push_back(cls);
  }

  double total = 0.0;
  std::vector<int> path(static_cast<std::size_t>(t_len), 0);
  const std::size_t n_paths = static_cast<std::size_t>(std::pow(n_classes, t_len));
  for (std::size_t p = 0; p < n_paths; ++p) {
    std::size_t rem = p;
    double logp = 0.0;
    for (Index t = 0; t < t_len; ++t) {
      path[static_cast<std::size_t>(t)] = static_cast<int>(rem % static_cast<std::size_t>(n_classes));
      rem /= static_cast<std::size_t>(n_classes);
      logp += log_probs.data()[t * n_classes + path[static_cast<std::size_t>(t)]];
    }
    // Collapse: merge consecutive repeats, then drop blanks.
    std::vector<int> collapsed;
    for (Index t = 0; t < t_len; ++t) {
      const int c = path[static_cast<std::size_t>(t)];
      if (t > 0 && c == path[static_cast<std::size_t>(t - 1)]) continue;
      if (c != kCtcBlank) collapsed.push_back(c);
    }
    if (collapsed == target_classes) total += std::exp(logp);
  }
  return total > 0.0 ? -std::log(total) : std::numeric_limits<double>::infinity();
}

std::vector<int> ctc_greedy_decode(const Tensor& log_probs) {
  if (log_probs.rank() != 2) throw ShapeError("ctc_greedy_decode expects [T' x (V+1)]");
  const Index t_len = log_probs.dim(0);
  const Index n_classes = log_probs.dim(1);
  std::vector<int> out;
  int prev = -1;
  for (Index t = 0; t < t_len; ++t) {
    const double* row = log_probs.data() + t * n_classes;
    int best = 0;
    for (Index c = 1; c < n_classes; ++c)
      if (row[c] > row[best]) best = static_cast<int>(c);
    if (best != prev && best != kCtcBlank) out.push_back(best - 1);
    prev = best;
  }
  return out;
}

ParamStore CtcModel::skeleton(const ModelConfig& cfg) {
  ParamStore p = nnet::backbone_skeleton(cfg);
  p.add("classifier.weight", {cfg.d_model, cfg.vocab_size + 1});
  p.add("classifier.bias", {cfg.vocab_size + 1});
  return p;
}

CtcModel::CtcModel(ModelConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  params_ = skeleton(cfg_);
  nnet::init_params(params_, cfg_, seed);
}

CtcModel::CtcModel(ModelConfig cfg, ParamStore params) : cfg_(cfg) {
  const ParamStore expect = skeleton(cfg_);
  if (expect.names != params.names)
    throw FormatError("checkpoint parameter names do not match the CTC configuration");
  for (std::size_t i = 0; i < expect.names.size(); ++i) {
    if (expect.tensors[i].shape() != params.tensors[i].shape())
      throw FormatError("checkpoint shape mismatch for " + expect.names[i]);
  }
  params_ = std::move(params);
}

CtcModel::EncoderOut CtcModel::encoder_forward(Tape& tape, const std::vector<RowMat>& poses,
                                               const std::vector<std::vector<std::uint8_t>>& pose_mask,
                                               bool training, RngStream& rng) const {
  PrefixBatch pb = nnet::encode_prefix(tape, poses, pose_mask, params_, cfg_, training, rng);
  const Index b_count = static_cast<Index>(pb.prefix.size());
  const Index s_len = pb.t_prime;

  // Bidirectional attention: any step may attend to any valid step.
  std::vector<Tensor> add_masks;
  for (Index b = 0; b < b_count; ++b) {
    Tensor allow_all = Tensor::full({s_len, s_len}, 1.0);
    add_masks.push_back(nnet::additive_mask(allow_all, pb.mask[static_cast<std::size_t>(b)]));
  }
  Tensor x = b_count == 1 ? pb.prefix[0] : concat_rows(tape, pb.prefix);
  x = nnet::transformer_stack(tape, x, b_count, s_len, add_masks, params_, cfg_, training, rng);

  EncoderOut out;
  out.t_prime = s_len;
  for (Index b = 0; b < b_count; ++b) {
    Index valid = 0;
    for (std::uint8_t m : pb.mask[static_cast<std::size_t>(b)]) valid += m;
    Tensor rows = slice_rows(tape, x, b * s_len, valid);
    Tensor logits = add_rowwise(tape, matmul(tape, rows, params_.get("classifier.weight")),
                                params_.get("classifier.bias"));
    out.log_probs.push_back(log_softmax(tape, logits, 1));
  }
  return out;
}

Tensor CtcModel::loss(Tape& tape, const Batch& batch, bool training, RngStream& rng) const {
  EncoderOut enc = encoder_forward(tape, batch.poses, batch.pose_mask, training, rng);
  std::vector<Tensor> losses;
  for (Index b = 0; b < batch.size(); ++b) {
    std::vector<int> target;
    for (int id : batch.tokens_out[static_cast<std::size_t>(b)]) {
      if (id == Vocabulary::kEos || id == Vocabulary::kPad) break;
      target.push_back(id);
    }
    Tensor l = ctc_loss(tape, enc.log_probs[static_cast<std::size_t>(b)], target);
    losses.push_back(reshape(tape, l, {1, 1}));
  }
  Tensor stacked = losses.size() == 1 ? losses[0] : concat_rows(tape, losses);
  return mean(tape, stacked);
}

std::vector<int> CtcModel::decode(const RowMat& pose, Index true_len) const {
  if (true_len < 1 || true_len > pose.rows())
    throw ShapeError("invalid true_len for CTC decode");
  Tape tape;
  NoGradGuard guard(tape);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(pose.rows()), 0);
  for (Index t = 0; t < true_len; ++t) mask[static_cast<std::size_t>(t)] = 1;
  RngStream rng(0);
  EncoderOut enc = encoder_forward(tape, {pose}, {mask}, /*training=*/false, rng);
  return ctc_greedy_decode(enc.log_probs[0]);
}

}  // namespace autosign
