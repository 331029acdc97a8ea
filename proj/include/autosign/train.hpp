#pragma once

#include <limits>
#include <string>
#include <vector>

#include "autosign/augment.hpp"
#include "autosign/checkpoint.hpp"
#include "autosign/metrics.hpp"
#include "autosign/model.hpp"
#include "autosign/optim.hpp"

namespace autosign {

struct SchedulerConfig {
  bool enabled = true;
  long t0 = 10;
  long t_mult = 2;
  double lr_min = 1e-6;
};

struct TrainConfig {
  long epochs = 100;
  long batch_size_train = 8;
  long batch_size_eval = 4;
  double lr = 1e-4;
  double weight_decay = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  SchedulerConfig scheduler;
  long early_stop_patience = 10;
  std::uint64_t seed = 0;
  AugConfig augment;
  Modality modality = Modality::body_hands;

  void validate() const;
};

struct Sample {
  std::string sample_id;
  std::string signer_id;
  PoseSequence pose;                    // modality-selected
  GlossSequence gloss;                  // ids under the training vocabulary
  std::vector<std::string> ref_tokens;  // original gloss strings
};

struct Dataset {
  std::vector<Sample> samples;
  Index size() const { return static_cast<Index>(samples.size()); }
};

/// Vocabulary from the train split's gloss sentences only.
Vocabulary build_train_vocabulary(const std::string& data_root);

Dataset load_dataset(const std::string& data_root, const std::string& split,
                     const Vocabulary& vocab, Modality modality);

Index modality_points(Modality modality);  // J: 86 / 42 / 61 / 67

struct RunState {
  long epoch = 0;
  double best_dev_wer = std::numeric_limits<double>::infinity();
  long best_epoch = -1;
  long epochs_since_improvement = 0;
  AdamWState optimizer;
};

/// One pass over the shuffled train split: augment -> normalize ->
/// pad_and_mask -> forward -> masked loss -> backward -> AdamW, at the given
/// learning rate. Returns the mean training loss. Throws DivergenceError on
/// a non-finite loss.
double train_epoch(Recognizer& model, const Dataset& train, const TrainConfig& cfg,
                   RunState& state, double lr);

struct EvalResult {
  double wer = 0.0;
  std::vector<WerPair> decodes;
};

/// Greedy decoding with dropout and augmentation disabled; pooled corpus WER.
EvalResult evaluate(const Recognizer& model, const Dataset& split, const Vocabulary& vocab);

struct HistoryRow {
  long epoch;
  double lr;
  double train_loss;
  double dev_wer;
};

std::string history_tsv(const std::vector<HistoryRow>& rows);

struct TrainOutcome {
  std::vector<HistoryRow> history;
  double best_dev_wer = std::numeric_limits<double>::infinity();
  long best_epoch = -1;
  std::string best_ckpt_path;
  std::string last_ckpt_path;
  std::string history_path;
};

/// Full training run with per-epoch dev evaluation, checkpoint-on-improvement
/// (strict), and early stopping after `early_stop_patience` epochs without a
/// new best dev WER. model_cfg.input_dim and vocab_size are filled from the
/// data. Writes history.tsv, ckpt_best, ckpt_last under out_dir.
TrainOutcome run_training(const TrainConfig& cfg, ModelConfig model_cfg,
                          const std::string& kind, const std::string& data_root,
                          const std::string& out_dir);

}  // namespace autosign
