#include "autosign/model.hpp"

#include <algorithm>
#include <cmath>

namespace autosign {

namespace {

// Additive mask value for blocked attention edges. exp(-1e30 - m) underflows
// to exactly 0.0 for any realistic score m, so blocked positions have
// literally zero weight and causality/padding probes can assert exactness.
constexpr double kBlocked = -1e30;

constexpr std::uint64_t kInitStream = 0x494e4954ULL;

}  // namespace

void ModelConfig::validate() const {
  if (input_dim < 2 || input_dim % 2 != 0)
    throw ConfigError("model.input_dim must be a positive even number (2J)");
  if (compressor.n_layers < 0 || compressor.n_layers > 3)
    throw ConfigError("compressor layers must be 0 (linear) .. 3");
  if (compressor.channels < 1 || compressor.kernel < 1 || compressor.stride < 1 ||
      compressor.padding < 0)
    throw ConfigError("bad compressor geometry");
  if (d_model < 1 || n_layers < 1 || n_heads < 1 || ffn_mult < 1)
    throw ConfigError("model extents must be positive");
  if (d_model % n_heads != 0) throw ConfigError("d_model must be divisible by n_heads");
  if (dropout_p < 0.0 || dropout_p >= 1.0) throw ConfigError("dropout must be in [0,1)");
  if (max_prefix_len < 1 || max_text_len < 2)
    throw ConfigError("positional table sizes too small");
  if (vocab_size < Vocabulary::kFirstGloss + 1)
    throw ConfigError("vocab_size must cover the reserved ids and one gloss");
}

Index ModelConfig::compressed_len(Index frames) const {
  if (frames < 1) throw DataError("compressed_len: need at least one frame");
  Index len = frames;
  for (int l = 0; l < compressor.n_layers; ++l) {
    len = conv1d_out_len(len, compressor.kernel, compressor.stride, compressor.padding);
    if (len < 1)
      throw DataError("sequence of " + std::to_string(frames) +
                      " frames is too short for the compressor stack");
  }
  return len;
}

Tensor ParamStore::add(const std::string& name, Shape shape) {
  if (has(name)) throw ConfigError("duplicate parameter name " + name);
  Tensor t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
  names.push_back(name);
  tensors.push_back(t);
  return t;
}

const Tensor& ParamStore::get(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return tensors[i];
  throw ConfigError("unknown parameter " + name);
}

bool ParamStore::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

Index ParamStore::total_size() const {
  Index n = 0;
  for (const Tensor& t : tensors) n += t.numel();
  return n;
}

void ParamStore::zero_grads() {
  for (Tensor& t : tensors) t.zero_grad();
}

Tensor build_causal_mask(Index t_prefix, Index t_text) {
  if (t_prefix < 0 || t_text < 0) throw ShapeError("mask lengths must be nonnegative");
  const Index s = t_prefix + t_text;
  Tensor m = Tensor::zeros({s, s});
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j <= i; ++j) m.data()[i * s + j] = 1.0;
  return m;
}

namespace nnet {

ParamStore backbone_skeleton(const ModelConfig& cfg) {
  cfg.validate();
  ParamStore p;
  const Index d = cfg.d_model;
  for (int l = 0; l < cfg.compressor.n_layers; ++l) {
    const Index in_ch = l == 0 ? cfg.input_dim : cfg.compressor.channels;
    const std::string base = "compressor." + std::to_string(l);
    p.add(base + ".weight", {cfg.compressor.channels, in_ch, cfg.compressor.kernel});
    p.add(base + ".bias", {cfg.compressor.channels});
  }
  const Index proj_in = cfg.compressor.n_layers > 0 ? cfg.compressor.channels : cfg.input_dim;
  p.add("input_proj.weight", {proj_in, d});
  p.add("input_proj.bias", {d});
  p.add("pos_prefix", {cfg.max_prefix_len, d});
  for (Index l = 0; l < cfg.n_layers; ++l) {
    const std::string base = "block." + std::to_string(l);
    p.add(base + ".ln1.gamma", {d});
    p.add(base + ".ln1.beta", {d});
    p.add(base + ".attn.wq", {d, d});
    p.add(base + ".attn.bq", {d});
    p.add(base + ".attn.wk", {d, d});
    p.add(base + ".attn.bk", {d});
    p.add(base + ".attn.wv", {d, d});
    p.add(base + ".attn.bv", {d});
    p.add(base + ".attn.wo", {d, d});
    p.add(base + ".attn.bo", {d});
    p.add(base + ".ln2.gamma", {d});
    p.add(base + ".ln2.beta", {d});
    p.add(base + ".ffn.w1", {d, cfg.ffn_mult * d});
    p.add(base + ".ffn.b1", {cfg.ffn_mult * d});
    p.add(base + ".ffn.w2", {cfg.ffn_mult * d, d});
    p.add(base + ".ffn.b2", {d});
  }
  p.add("final_ln.gamma", {d});
  p.add("final_ln.beta", {d});
  return p;
}

void init_params(ParamStore& params, const ModelConfig& cfg, std::uint64_t seed) {
  RngStream rng(seed, kInitStream);
  const double base_std = 0.02;
  const double resid_std = base_std / std::sqrt(2.0 * static_cast<double>(cfg.n_layers));
  for (std::size_t i = 0; i < params.names.size(); ++i) {
    const std::string& name = params.names[i];
    Tensor& t = params.tensors[i];
    const bool is_gain = name.ends_with("gamma");
    const bool is_zero = name.ends_with("beta") || name.ends_with("bias") ||
                         name.ends_with(".bq") || name.ends_with(".bk") ||
                         name.ends_with(".bv") || name.ends_with(".bo") ||
                         name.ends_with(".b1") || name.ends_with(".b2");
    if (is_gain) {
      std::fill(t.data(), t.data() + t.numel(), 1.0);
      continue;
    }
    if (is_zero) continue;  // already zero
    const bool is_residual_out = name.ends_with(".attn.wo") || name.ends_with(".ffn.w2");
    const double std = is_residual_out ? resid_std : base_std;
    for (Index j = 0; j < t.numel(); ++j) t.data()[j] = rng.normal(0.0, std);
  }
}

PrefixBatch encode_prefix(Tape& tape, const std::vector<RowMat>& poses,
                          const std::vector<std::vector<std::uint8_t>>& pose_mask,
                          const ParamStore& params, const ModelConfig& cfg,
                          bool training, RngStream& rng) {
  if (poses.empty() || poses.size() != pose_mask.size())
    throw ShapeError("encode_prefix: poses and masks must align and be nonempty");
  const Index b_count = static_cast<Index>(poses.size());

  std::vector<Index> true_len(static_cast<std::size_t>(b_count));
  std::vector<Index> comp_len(static_cast<std::size_t>(b_count));
  PrefixBatch out;
  for (Index b = 0; b < b_count; ++b) {
    const auto& mask = pose_mask[static_cast<std::size_t>(b)];
    if (static_cast<Index>(mask.size()) != poses[static_cast<std::size_t>(b)].rows())
      throw ShapeError("encode_prefix: mask length does not match frame count");
    Index n = 0;
    for (std::uint8_t m : mask) n += m;
    if (n < 1) throw DataError("encode_prefix: sample has no valid frames");
    if (poses[static_cast<std::size_t>(b)].cols() != cfg.input_dim)
      throw ShapeError("encode_prefix: pose feature dim " +
                       std::to_string(poses[static_cast<std::size_t>(b)].cols()) +
                       " does not match model input_dim " + std::to_string(cfg.input_dim));
    true_len[static_cast<std::size_t>(b)] = n;
    comp_len[static_cast<std::size_t>(b)] = cfg.compressed_len(n);
    out.t_prime = std::max(out.t_prime, comp_len[static_cast<std::size_t>(b)]);
  }
  if (out.t_prime > cfg.max_prefix_len)
    throw CapacityError("compressed prefix length " + std::to_string(out.t_prime) +
                        " exceeds max_prefix_len " + std::to_string(cfg.max_prefix_len));

  const Tensor& proj_w = params.get("input_proj.weight");
  const Tensor& proj_b = params.get("input_proj.bias");
  const Tensor& pos = params.get("pos_prefix");

  for (Index b = 0; b < b_count; ++b) {
    const RowMat& pose = poses[static_cast<std::size_t>(b)];
    const Index t_in = true_len[static_cast<std::size_t>(b)];
    const Index t_out = comp_len[static_cast<std::size_t>(b)];
    Tensor h;
    if (cfg.compressor.n_layers == 0) {
      Tensor frames = Tensor::zeros({t_in, cfg.input_dim});
      frames.mat() = pose.topRows(t_in);
      h = add_rowwise(tape, matmul(tape, frames, proj_w), proj_b);
    } else {
      Tensor chans = Tensor::zeros({cfg.input_dim, t_in});
      chans.mat() = pose.topRows(t_in).transpose();
      h = chans;
      for (int l = 0; l < cfg.compressor.n_layers; ++l) {
        const std::string base = "compressor." + std::to_string(l);
        h = conv1d(tape, h, params.get(base + ".weight"), params.get(base + ".bias"),
                   cfg.compressor.stride, cfg.compressor.padding);
        h = gelu(tape, h);
        h = dropout(tape, h, cfg.dropout_p, rng, training);
      }
      h = transpose(tape, h);
      h = add_rowwise(tape, matmul(tape, h, proj_w), proj_b);
    }
    h = add(tape, h, slice_rows(tape, pos, 0, t_out));
    if (t_out < out.t_prime)
      h = concat_rows(tape, {h, Tensor::zeros({out.t_prime - t_out, cfg.d_model})});
    out.prefix.push_back(h);

    std::vector<std::uint8_t> m(static_cast<std::size_t>(out.t_prime), 0);
    for (Index t = 0; t < t_out; ++t) m[static_cast<std::size_t>(t)] = 1;
    out.mask.push_back(std::move(m));
  }
  return out;
}

Tensor additive_mask(const Tensor& causal, const std::vector<std::uint8_t>& valid) {
  const Index s = causal.dim(0);
  if (causal.dim(1) != s || static_cast<Index>(valid.size()) != s)
    throw ShapeError("additive_mask: size mismatch");
  Tensor m = Tensor::zeros({s, s});
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j)
      m.data()[i * s + j] =
          (causal.data()[i * s + j] != 0.0 && valid[static_cast<std::size_t>(j)]) ? 0.0
                                                                                  : kBlocked;
  return m;
}

Tensor transformer_stack(Tape& tape, const Tensor& x, Index batch, Index s_len,
                         const std::vector<Tensor>& add_masks, const ParamStore& params,
                         const ModelConfig& cfg, bool training, RngStream& rng) {
  if (x.rank() != 2 || x.dim(0) != batch * s_len || x.dim(1) != cfg.d_model)
    throw ShapeError("transformer_stack: stream must be [B*S x d_model]");
  if (static_cast<Index>(add_masks.size()) != batch)
    throw ShapeError("transformer_stack: one attention mask per sample required");

  const Index hd = cfg.head_dim();
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(hd));
  Tensor stream = x;
  for (Index l = 0; l < cfg.n_layers; ++l) {
    const std::string base = "block." + std::to_string(l);
    Tensor pre = layer_norm(tape, stream, params.get(base + ".ln1.gamma"),
                            params.get(base + ".ln1.beta"));
    Tensor q = add_rowwise(tape, matmul(tape, pre, params.get(base + ".attn.wq")),
                           params.get(base + ".attn.bq"));
    Tensor k = add_rowwise(tape, matmul(tape, pre, params.get(base + ".attn.wk")),
                           params.get(base + ".attn.bk"));
    Tensor v = add_rowwise(tape, matmul(tape, pre, params.get(base + ".attn.wv")),
                           params.get(base + ".attn.bv"));

    std::vector<Tensor> per_sample;
    per_sample.reserve(static_cast<std::size_t>(batch));
    for (Index b = 0; b < batch; ++b) {
      Tensor qb = slice_rows(tape, q, b * s_len, s_len);
      Tensor kb = slice_rows(tape, k, b * s_len, s_len);
      Tensor vb = slice_rows(tape, v, b * s_len, s_len);
      std::vector<Tensor> heads;
      heads.reserve(static_cast<std::size_t>(cfg.n_heads));
      for (Index h = 0; h < cfg.n_heads; ++h) {
        Tensor qh = slice_cols(tape, qb, h * hd, hd);
        Tensor kh = slice_cols(tape, kb, h * hd, hd);
        Tensor vh = slice_cols(tape, vb, h * hd, hd);
        Tensor scores = scale(tape, matmul(tape, qh, transpose(tape, kh)), att_scale);
        scores = add(tape, scores, add_masks[static_cast<std::size_t>(b)]);
        Tensor att = softmax(tape, scores, 1);
        att = dropout(tape, att, cfg.dropout_p, rng, training);
        heads.push_back(matmul(tape, att, vh));
      }
      per_sample.push_back(cfg.n_heads == 1 ? heads[0] : concat_cols(tape, heads));
    }
    Tensor att_out = batch == 1 ? per_sample[0] : concat_rows(tape, per_sample);
    att_out = add_rowwise(tape, matmul(tape, att_out, params.get(base + ".attn.wo")),
                          params.get(base + ".attn.bo"));
    att_out = dropout(tape, att_out, cfg.dropout_p, rng, training);
    stream = add(tape, stream, att_out);

    Tensor pre2 = layer_norm(tape, stream, params.get(base + ".ln2.gamma"),
                             params.get(base + ".ln2.beta"));
    Tensor f = add_rowwise(tape, matmul(tape, pre2, params.get(base + ".ffn.w1")),
                           params.get(base + ".ffn.b1"));
    f = gelu(tape, f);
    f = add_rowwise(tape, matmul(tape, f, params.get(base + ".ffn.w2")),
                    params.get(base + ".ffn.b2"));
    f = dropout(tape, f, cfg.dropout_p, rng, training);
    stream = add(tape, stream, f);
  }
  return layer_norm(tape, stream, params.get("final_ln.gamma"), params.get("final_ln.beta"));
}

}  // namespace nnet

ParamStore AutoSignModel::skeleton(const ModelConfig& cfg) {
  ParamStore p = nnet::backbone_skeleton(cfg);
  p.add("tok_embed", {cfg.vocab_size, cfg.d_model});
  p.add("pos_text", {cfg.max_text_len, cfg.d_model});
  p.add("head.weight", {cfg.d_model, cfg.vocab_size});
  return p;
}

AutoSignModel::AutoSignModel(ModelConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  params_ = skeleton(cfg_);
  nnet::init_params(params_, cfg_, seed);
}

AutoSignModel::AutoSignModel(ModelConfig cfg, ParamStore params) : cfg_(cfg) {
  const ParamStore expect = skeleton(cfg_);
  if (expect.names != params.names)
    throw FormatError("checkpoint parameter names do not match the model configuration");
  for (std::size_t i = 0; i < expect.names.size(); ++i) {
    if (expect.tensors[i].shape() != params.tensors[i].shape())
      throw FormatError("checkpoint shape mismatch for " + expect.names[i]);
  }
  params_ = std::move(params);
}

PrefixBatch AutoSignModel::encode_prefix(Tape& tape, const std::vector<RowMat>& poses,
                                         const std::vector<std::vector<std::uint8_t>>& pose_mask,
                                         bool training, RngStream& rng) const {
  return nnet::encode_prefix(tape, poses, pose_mask, params_, cfg_, training, rng);
}

Tensor AutoSignModel::forward_teacher_forced(Tape& tape, const Batch& batch, bool training,
                                             RngStream& rng) const {
  const Index b_count = batch.size();
  if (b_count < 1) throw DataError("empty batch");
  const Index t_text = batch.l_max + 1;
  if (t_text > cfg_.max_text_len)
    throw CapacityError("text length " + std::to_string(t_text) + " exceeds max_text_len " +
                        std::to_string(cfg_.max_text_len));

  PrefixBatch pb = nnet::encode_prefix(tape, batch.poses, batch.pose_mask, params_, cfg_,
                                       training, rng);
  const Index t_prefix = pb.t_prime;
  const Index s_len = t_prefix + t_text;

  const Tensor causal = build_causal_mask(t_prefix, t_text);
  Tensor pos_text_rows = slice_rows(tape, params_.get("pos_text"), 0, t_text);

  std::vector<Tensor> streams;
  std::vector<Tensor> add_masks;
  for (Index b = 0; b < b_count; ++b) {
    Tensor emb = embedding_lookup(tape, params_.get("tok_embed"),
                                  batch.tokens_in[static_cast<std::size_t>(b)]);
    emb = add(tape, emb, pos_text_rows);
    streams.push_back(concat_rows(tape, {pb.prefix[static_cast<std::size_t>(b)], emb}));

    std::vector<std::uint8_t> valid(static_cast<std::size_t>(s_len), 0);
    for (Index j = 0; j < t_prefix; ++j)
      valid[static_cast<std::size_t>(j)] = pb.mask[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
    for (Index j = 0; j < t_text; ++j)
      valid[static_cast<std::size_t>(t_prefix + j)] =
          batch.token_mask[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
    add_masks.push_back(nnet::additive_mask(causal, valid));
  }

  Tensor x = b_count == 1 ? streams[0] : concat_rows(tape, streams);
  x = nnet::transformer_stack(tape, x, b_count, s_len, add_masks, params_, cfg_, training, rng);

  std::vector<Tensor> logits;
  for (Index b = 0; b < b_count; ++b) {
    Tensor rows = slice_rows(tape, x, b * s_len + t_prefix, t_text);
    logits.push_back(matmul(tape, rows, params_.get("head.weight")));
  }
  Tensor flat = b_count == 1 ? logits[0] : concat_rows(tape, logits);
  return reshape(tape, flat, {b_count, t_text, cfg_.vocab_size});
}

Tensor AutoSignModel::loss(Tape& tape, const Batch& batch, bool training,
                           RngStream& rng) const {
  Tensor logits = forward_teacher_forced(tape, batch, training, rng);
  std::vector<int> targets;
  targets.reserve(static_cast<std::size_t>(batch.size() * (batch.l_max + 1)));
  for (const auto& row : batch.tokens_out) targets.insert(targets.end(), row.begin(), row.end());
  return masked_cross_entropy(tape, logits, targets, Vocabulary::kPad);
}

Tensor AutoSignModel::step_logits(Tape& tape, const Tensor& prefix, Index prefix_len,
                                  const std::vector<int>& ids_with_bos) const {
  const Index t_text = static_cast<Index>(ids_with_bos.size());
  Tensor emb = embedding_lookup(tape, params_.get("tok_embed"), ids_with_bos);
  emb = add(tape, emb, slice_rows(tape, params_.get("pos_text"), 0, t_text));
  Tensor x = concat_rows(tape, {prefix, emb});
  const Index s_len = prefix_len + t_text;
  std::vector<std::uint8_t> valid(static_cast<std::size_t>(s_len), 1);
  std::vector<Tensor> masks{nnet::additive_mask(build_causal_mask(prefix_len, t_text), valid)};
  RngStream rng(0);
  x = nnet::transformer_stack(tape, x, 1, s_len, masks, params_, cfg_, /*training=*/false, rng);
  Tensor last = slice_rows(tape, x, s_len - 1, 1);
  return matmul(tape, last, params_.get("head.weight"));
}

namespace {

// Single-sample prefix at the sequence's true length; eval mode, no tape.
Tensor eval_prefix(const AutoSignModel& model, const RowMat& pose, Index true_len,
                   Tape& tape) {
  if (true_len < 1 || true_len > pose.rows())
    throw ShapeError("invalid true_len for generation");
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(pose.rows()), 0);
  for (Index t = 0; t < true_len; ++t) mask[static_cast<std::size_t>(t)] = 1;
  RngStream rng(0);
  PrefixBatch pb = model.encode_prefix(tape, {pose}, {mask}, /*training=*/false, rng);
  return pb.prefix[0];
}

Index argmax_lowest(const Tensor& logits) {
  const double* d = logits.data();
  Index best = 0;
  for (Index i = 1; i < logits.numel(); ++i)
    if (d[i] > d[best]) best = i;
  return best;
}

}  // namespace

std::vector<int> AutoSignModel::generate_greedy(const RowMat& pose, Index true_len,
                                                Index max_len) const {
  if (max_len < 1) throw ConfigError("generate_greedy: max_len must be >= 1");
  Tape tape;
  NoGradGuard guard(tape);
  Tensor prefix = eval_prefix(*this, pose, true_len, tape);
  const Index prefix_len = prefix.dim(0);

  std::vector<int> with_bos{Vocabulary::kBos};
  std::vector<int> out;
  while (static_cast<Index>(out.size()) < max_len &&
         static_cast<Index>(with_bos.size()) <= cfg_.max_text_len) {
    Tensor logits = step_logits(tape, prefix, prefix_len, with_bos);
    const int next = static_cast<int>(argmax_lowest(logits));
    if (next == Vocabulary::kEos) break;
    out.push_back(next);
    with_bos.push_back(next);
  }
  return out;
}

std::pair<double, Index> AutoSignModel::sequence_logprob(const RowMat& pose, Index true_len,
                                                         const std::vector<int>& ids) const {
  Tape tape;
  NoGradGuard guard(tape);
  Tensor prefix = eval_prefix(*this, pose, true_len, tape);
  const Index prefix_len = prefix.dim(0);

  std::vector<int> with_bos{Vocabulary::kBos};
  double total = 0.0;
  for (std::size_t i = 0; i <= ids.size(); ++i) {
    Tensor logits = step_logits(tape, prefix, prefix_len, with_bos);
    Tensor lp = log_softmax(tape, logits, 1);
    const int target = i < ids.size() ? ids[i] : Vocabulary::kEos;
    total += lp.data()[target];
    if (i < ids.size()) with_bos.push_back(ids[i]);
  }
  return {total, static_cast<Index>(ids.size()) + 1};
}

std::vector<int> AutoSignModel::generate_beam(const RowMat& pose, Index true_len,
                                              Index beam_size, Index max_len) const {
  if (beam_size < 1) throw ConfigError("generate_beam: beam_size must be >= 1");
  if (max_len < 1) throw ConfigError("generate_beam: max_len must be >= 1");
  Tape tape;
  NoGradGuard guard(tape);
  Tensor prefix = eval_prefix(*this, pose, true_len, tape);
  const Index prefix_len = prefix.dim(0);

  struct Hyp {
    std::vector<int> toks;
    double logp = 0.0;
  };
  struct Done {
    std::vector<int> toks;
    double score = 0.0;  // length-normalized
  };

  auto next_logprobs = [&](const std::vector<int>& toks) {
    std::vector<int> with_bos{Vocabulary::kBos};
    with_bos.insert(with_bos.end(), toks.begin(), toks.end());
    Tensor logits = step_logits(tape, prefix, prefix_len, with_bos);
    return log_softmax(tape, logits, 1);
  };
  auto finish = [](std::vector<Done>& done, const Hyp& h, double eos_lp) {
    const double steps = static_cast<double>(h.toks.size()) + 1.0;
    done.push_back({h.toks, (h.logp + eos_lp) / steps});
  };

  std::vector<Hyp> live{{{}, 0.0}};
  std::vector<Done> done;
  const Index step_cap = std::min<Index>(max_len, cfg_.max_text_len - 1);
  for (Index step = 0; step < step_cap && !live.empty(); ++step) {
    std::vector<Hyp> candidates;
    for (const Hyp& h : live) {
      Tensor lp = next_logprobs(h.toks);
      for (Index v = 0; v < cfg_.vocab_size; ++v) {
        Hyp c = h;
        c.logp += lp.data()[v];
        c.toks.push_back(static_cast<int>(v));
        candidates.push_back(std::move(c));
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Hyp& a, const Hyp& b) {
      if (a.logp != b.logp) return a.logp > b.logp;
      return a.toks < b.toks;
    });
    if (static_cast<Index>(candidates.size()) > beam_size)
      candidates.resize(static_cast<std::size_t>(beam_size));
    live.clear();
    for (Hyp& c : candidates) {
      if (c.toks.back() == Vocabulary::kEos) {
        c.toks.pop_back();
        const double steps = static_cast<double>(c.toks.size()) + 1.0;
        done.push_back({std::move(c.toks), c.logp / steps});
      } else {
        live.push_back(std::move(c));
      }
    }
  }
  // Hypotheses that hit the length cap are closed with an explicit EOS score.
  for (const Hyp& h : live) {
    Tensor lp = next_logprobs(h.toks);
    finish(done, h, lp.data()[Vocabulary::kEos]);
  }

  std::vector<int> greedy = generate_greedy(pose, true_len, max_len);
  const auto [glp, gsteps] = sequence_logprob(pose, true_len, greedy);
  const double gscore = glp / static_cast<double>(gsteps);

  const Done* best = nullptr;
  for (const Done& d : done) {
    if (!best || d.score > best->score ||
        (d.score == best->score && d.toks < best->toks))
      best = &d;
  }
  // The greedy path can fall out of a narrow beam; never return anything
  // that scores below it.
  if (!best || gscore > best->score) return greedy;
  return best->toks;
}

std::vector<int> AutoSignModel::decode(const RowMat& pose, Index true_len) const {
  return generate_greedy(pose, true_len, cfg_.max_text_len - 1);
}

}  // namespace autosign
