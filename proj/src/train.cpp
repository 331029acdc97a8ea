#include "autosign/train.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace autosign {

namespace {

constexpr std::uint64_t kShuffleStream = 0x53485546ULL;
constexpr std::uint64_t kDropoutStream = 0x44524f50ULL;

std::uint64_t hash_str(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size_train < 1 || batch_size_eval < 1)
    throw ConfigError("train: epochs and batch sizes must be positive");
  if (!(lr >= 0.0) || weight_decay < 0.0) throw ConfigError("train: bad lr/weight_decay");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw ConfigError("train: betas must be in [0,1)");
  if (scheduler.t0 < 1 || scheduler.t_mult < 1 || scheduler.lr_min < 0.0)
    throw ConfigError("train: bad scheduler settings");
  if (early_stop_patience < 1) throw ConfigError("train: patience must be >= 1");
  augment.validate();
}

Index modality_points(Modality modality) {
  switch (modality) {
    case Modality::full: return 86;
    case Modality::hands_only: return 42;
    case Modality::hands_face: return 61;
    case Modality::body_hands: return 67;
  }
  throw ConfigError("unknown modality");
}

Vocabulary build_train_vocabulary(const std::string& data_root) {
  namespace fs = std::filesystem;
  const auto manifest = load_manifest((fs::path(data_root) / "manifest.tsv").string());
  const auto train_ids =
      load_split((fs::path(data_root) / "splits" / "train.txt").string());
  std::map<std::string, const ManifestRow*> by_id;
  for (const ManifestRow& r : manifest) by_id[r.sample_id] = &r;
  std::vector<std::string> sentences;
  for (const std::string& id : train_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("train split references unknown sample " + id);
    sentences.push_back(it->second->gloss);
  }
  return build_vocabulary(sentences);
}

Dataset load_dataset(const std::string& data_root, const std::string& split,
                     const Vocabulary& vocab, Modality modality) {
  namespace fs = std::filesystem;
  const auto manifest = load_manifest((fs::path(data_root) / "manifest.tsv").string());
  const auto ids = load_split((fs::path(data_root) / "splits" / (split + ".txt")).string());
  std::map<std::string, const ManifestRow*> by_id;
  for (const ManifestRow& r : manifest) by_id[r.sample_id] = &r;

  Dataset ds;
  for (const std::string& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw DataError("split '" + split + "' references unknown sample " + id);
    const ManifestRow& row = *it->second;
    Sample s;
    s.sample_id = row.sample_id;
    s.signer_id = row.signer_id;
    PoseSequence full = load_pose_file((fs::path(data_root) / row.pose_path).string());
    full.sample_id = row.sample_id;
    full.signer_id = row.signer_id;
    s.pose = select_modality(full, modality);
    s.gloss.ids = vocab.encode(row.gloss);
    if (s.gloss.ids.empty())
      throw DataError("sample " + id + " has an empty gloss sentence");
    std::istringstream is(row.gloss);
    std::string tok;
    while (is >> tok) s.ref_tokens.push_back(tok);
    ds.samples.push_back(std::move(s));
  }
  if (ds.samples.empty()) throw DataError("split '" + split + "' is empty");
  return ds;
}

double train_epoch(Recognizer& model, const Dataset& train, const TrainConfig& cfg,
                   RunState& state, double lr) {
  if (train.size() < 1) throw DataError("train_epoch: empty train split");
  const long epoch = state.epoch;

  std::vector<Index> order(static_cast<std::size_t>(train.size()));
  for (Index i = 0; i < train.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  RngStream shuffle_rng(cfg.seed, kShuffleStream, static_cast<std::uint64_t>(epoch));
  for (Index i = train.size() - 1; i > 0; --i) {
    const Index j = shuffle_rng.uniform_int(0, i);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }

  double loss_total = 0.0;
  Index n_samples = 0;
  Index step = 0;
  for (Index at = 0; at < train.size(); at += cfg.batch_size_train, ++step) {
    const Index nb = std::min<Index>(cfg.batch_size_train, train.size() - at);
    std::vector<std::pair<PoseSequence, GlossSequence>> items;
    for (Index k = 0; k < nb; ++k) {
      const Sample& s = train.samples[static_cast<std::size_t>(order[static_cast<std::size_t>(at + k)])];
      PoseSequence pose = s.pose;
      if (cfg.augment.enabled) {
        // Substream keyed by (seed, epoch, sample) so augmentation draws are
        // independent of batch composition and worker order.
        RngStream aug_rng(cfg.seed, static_cast<std::uint64_t>(epoch),
                          hash_str(s.sample_id));
        PoseSequence augmented = apply_pipeline(pose, cfg.augment, aug_rng);
        bool any_detected = false;
        for (Index t = 0; t < augmented.frame_count() && !any_detected; ++t)
          for (Index j = 0; j < augmented.joint_count() && !any_detected; ++j)
            any_detected = !augmented.missing(t, j);
        if (any_detected) pose = std::move(augmented);  // else keep the clean sample
      }
      items.emplace_back(normalize_sequence(pose), s.gloss);
    }
    Batch batch = pad_and_mask(items, Vocabulary{});

    Tape tape;
    model.params().zero_grads();
    RngStream drop_rng(cfg.seed, kDropoutStream, static_cast<std::uint64_t>(epoch),
                       static_cast<std::uint64_t>(step));
    Tensor loss = model.loss(tape, batch, /*training=*/true, drop_rng);
    const double value = loss.scalar();
    if (!std::isfinite(value))
      throw DivergenceError("non-finite training loss " + std::to_string(value) +
                            " at epoch " + std::to_string(epoch) + " step " +
                            std::to_string(step));
    backward(tape, loss);
    adamw_step(model.params().tensors, state.optimizer, lr, cfg.beta1, cfg.beta2,
               cfg.adam_eps, cfg.weight_decay);
    loss_total += value * static_cast<double>(nb);
    n_samples += nb;
  }
  return loss_total / static_cast<double>(n_samples);
}

EvalResult evaluate(const Recognizer& model, const Dataset& split, const Vocabulary& vocab) {
  if (split.size() < 1) throw DataError("evaluate: empty split");
  EvalResult out;
  for (const Sample& s : split.samples) {
    const PoseSequence norm = normalize_sequence(s.pose);
    const std::vector<int> hyp_ids = model.decode(norm.frames, norm.frame_count());
    WerPair pair;
    pair.sample_id = s.sample_id;
    pair.ref = s.ref_tokens;
    pair.hyp = vocab.decode_tokens(hyp_ids);
    out.decodes.push_back(std::move(pair));
  }
  out.wer = corpus_wer(out.decodes);
  return out;
}

static std::string history_row_tsv(const HistoryRow& r) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%ld\t%.17g\t%.6f\t%.6f\n", r.epoch, r.lr, r.train_loss,
                r.dev_wer);
  return buf;
}

std::string history_tsv(const std::vector<HistoryRow>& rows) {
  std::string out = "epoch\tlr\ttrain_loss\tdev_wer\n";
  for (const HistoryRow& r : rows) out += history_row_tsv(r);
  return out;
}

TrainOutcome run_training(const TrainConfig& cfg, ModelConfig model_cfg,
                          const std::string& kind, const std::string& data_root,
                          const std::string& out_dir) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const Vocabulary vocab = build_train_vocabulary(data_root);
  const Dataset train = load_dataset(data_root, "train", vocab, cfg.modality);
  const Dataset dev = load_dataset(data_root, "dev", vocab, cfg.modality);

  model_cfg.input_dim = 2 * modality_points(cfg.modality);
  model_cfg.vocab_size = vocab.size();
  model_cfg.validate();
  std::unique_ptr<Recognizer> model = make_recognizer(kind, model_cfg, cfg.seed);

  TrainOutcome outcome;
  outcome.best_ckpt_path = (fs::path(out_dir) / "ckpt_best").string();
  outcome.last_ckpt_path = (fs::path(out_dir) / "ckpt_last").string();
  outcome.history_path = (fs::path(out_dir) / "history.tsv").string();

  // The history file is streamed row by row so long runs are observable
  // and an aborted run still leaves its progress on disk.
  std::ofstream history_os(outcome.history_path, std::ios::trunc);
  if (!history_os) throw IoError("cannot write " + outcome.history_path);
  history_os << "epoch\tlr\ttrain_loss\tdev_wer\n" << std::flush;

  RunState state;
  for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
    state.epoch = epoch;
    const double lr = cfg.scheduler.enabled
                          ? cosine_warm_restart_lr(epoch, cfg.lr, cfg.scheduler.lr_min,
                                                   cfg.scheduler.t0, cfg.scheduler.t_mult)
                          : cfg.lr;
    const double train_loss = train_epoch(*model, train, cfg, state, lr);
    const EvalResult dev_eval = evaluate(*model, dev, vocab);
    outcome.history.push_back({epoch, lr, train_loss, dev_eval.wer});
    history_os << history_row_tsv(outcome.history.back()) << std::flush;

    save_checkpoint(outcome.last_ckpt_path, *model, vocab);
    if (dev_eval.wer < state.best_dev_wer) {
      state.best_dev_wer = dev_eval.wer;
      state.best_epoch = epoch;
      state.epochs_since_improvement = 0;
      save_checkpoint(outcome.best_ckpt_path, *model, vocab);
    } else {
      state.epochs_since_improvement += 1;
    }
    if (state.epochs_since_improvement >= cfg.early_stop_patience) break;
  }

  outcome.best_dev_wer = state.best_dev_wer;
  outcome.best_epoch = state.best_epoch;
  return outcome;
}

}  // namespace autosign
