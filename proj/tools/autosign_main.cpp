#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "autosign/config.hpp"
#include "autosign/ctc.hpp"
#include "autosign/synth.hpp"
#include "autosign/train.hpp"

namespace fs = std::filesystem;
using namespace autosign;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;

// Precedence: --seed flag, then AUTOSIGN_SEED, then the config value.
std::uint64_t resolve_seed(const RunConfig& cfg, bool seed_set, std::uint64_t flag_seed) {
  if (seed_set) return flag_seed;
  if (const char* env = std::getenv("AUTOSIGN_SEED")) return std::strtoull(env, nullptr, 10);
  return cfg.train.seed;
}

Modality modality_from_input_dim(Index input_dim) {
  for (Modality m : all_modalities())
    if (2 * modality_points(m) == input_dim) return m;
  throw ConfigError("checkpoint input_dim " + std::to_string(input_dim) +
                    " matches no known modality");
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path);
  os << text;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir, bool seed_set,
              std::uint64_t seed_flag) {
  RunConfig cfg = parse_run_config(config_path);
  const std::uint64_t seed = resolve_seed(cfg, seed_set, seed_flag);
  cfg.train.seed = seed;
  synth_generate(cfg.synth, seed, out_dir);
  write_text((fs::path(out_dir) / "config.resolved").string(), resolved_config_text(cfg));
  std::cout << "dataset\t" << out_dir << "\n"
            << "samples\t" << cfg.synth.n_samples() << "\n"
            << "seed\t" << seed << "\n";
  return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& data_root,
              const std::string& out_dir, bool seed_set, std::uint64_t seed_flag) {
  RunConfig cfg = parse_run_config(config_path);
  cfg.train.seed = resolve_seed(cfg, seed_set, seed_flag);
  fs::create_directories(out_dir);
  write_text((fs::path(out_dir) / "config.resolved").string(), resolved_config_text(cfg));

  const TrainOutcome outcome =
      run_training(cfg.train, cfg.model, cfg.model_kind, data_root, out_dir);
  for (const HistoryRow& row : outcome.history)
    std::cout << "epoch\t" << row.epoch << "\tlr\t" << row.lr << "\ttrain_loss\t"
              << fmt6(row.train_loss) << "\tdev_wer\t" << fmt6(row.dev_wer) << "\n";
  std::cout << "best_epoch\t" << outcome.best_epoch << "\n"
            << "best_dev_wer\t" << fmt6(outcome.best_dev_wer) << "\n"
            << "ckpt_best\t" << outcome.best_ckpt_path << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& ckpt, const std::string& data_root, const std::string& split,
             const std::string& decodes_path, const std::string& report_path) {
  Vocabulary vocab;
  auto model = load_recognizer(ckpt, &vocab);
  const Modality modality = modality_from_input_dim(model->config().input_dim);
  const Dataset ds = load_dataset(data_root, split, vocab, modality);
  const EvalResult result = evaluate(*model, ds, vocab);
  if (!decodes_path.empty()) write_text(decodes_path, decodes_tsv(result.decodes));
  if (!report_path.empty()) write_text(report_path, error_report(result.decodes));
  std::cout << "WER\t" << fmt6(result.wer) << "\n";
  return kExitOk;
}

int cmd_decode(const std::string& ckpt, const std::string& pose_path) {
  Vocabulary vocab;
  auto model = load_recognizer(ckpt, &vocab);
  const Modality modality = modality_from_input_dim(model->config().input_dim);
  const PoseSequence full = load_pose_file(pose_path);
  const PoseSequence selected = select_modality(full, modality);
  const PoseSequence norm = normalize_sequence(selected);
  const std::vector<int> ids = model->decode(norm.frames, norm.frame_count());
  std::cout << vocab.decode(ids) << "\n";
  return kExitOk;
}

int cmd_inspect(const std::string& pose_path) {
  const PoseSequence seq = load_pose_file(pose_path);
  Index missing = 0;
  double min_x = 0, max_x = 0, min_y = 0, max_y = 0, sum_x = 0, sum_y = 0;
  bool any = false;
  for (Index t = 0; t < seq.frame_count(); ++t)
    for (Index j = 0; j < seq.joint_count(); ++j) {
      if (seq.missing(t, j)) {
        ++missing;
        continue;
      }
      const double x = seq.frames(t, 2 * j), y = seq.frames(t, 2 * j + 1);
      if (!any) {
        min_x = max_x = x;
        min_y = max_y = y;
        any = true;
      }
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
      sum_x += x;
      sum_y += y;
    }
  const Index detected = seq.frame_count() * seq.joint_count() - missing;
  std::cout << "magic\tPSEQ\nversion\t1\n"
            << "frames\t" << seq.frame_count() << "\n"
            << "keypoints\t" << seq.joint_count() << "\n"
            << "missing\t" << missing << "\n";
  if (detected > 0)
    std::cout << "x_range\t" << fmt6(min_x) << "\t" << fmt6(max_x) << "\n"
              << "y_range\t" << fmt6(min_y) << "\t" << fmt6(max_y) << "\n"
              << "x_mean\t" << fmt6(sum_x / static_cast<double>(detected)) << "\n"
              << "y_mean\t" << fmt6(sum_y / static_cast<double>(detected)) << "\n";
  return kExitOk;
}

int cmd_ablate(const std::string& config_path, const std::string& data_root,
               const std::string& out_dir, bool seed_set, std::uint64_t seed_flag) {
  RunConfig cfg = parse_run_config(config_path);
  cfg.train.seed = resolve_seed(cfg, seed_set, seed_flag);
  fs::create_directories(out_dir);
  write_text((fs::path(out_dir) / "config.resolved").string(), resolved_config_text(cfg));

  // One fixed dataset across every arm; rows mirror the modality x
  // feature-extractor ablation grids.
  std::string table = "modality\tcompressor_layers\tinput_dim\tparams\tbest_epoch\tdev_wer\ttest_wer\n";
  for (Modality modality : all_modalities()) {
    for (int depth : {0, 1, 2, 3}) {
      RunConfig arm = cfg;
      arm.train.modality = modality;
      arm.model.compressor.n_layers = depth;
      const std::string arm_dir =
          (fs::path(out_dir) / (modality_name(modality) + "_c" + std::to_string(depth))).string();
      const TrainOutcome outcome =
          run_training(arm.train, arm.model, arm.model_kind, data_root, arm_dir);

      Vocabulary vocab;
      auto best = load_recognizer(outcome.best_ckpt_path, &vocab);
      const Dataset test = load_dataset(data_root, "test", vocab, modality);
      const EvalResult test_eval = evaluate(*best, test, vocab);

      char row[256];
      std::snprintf(row, sizeof(row), "%s\t%d\t%ld\t%ld\t%ld\t%s\t%s\n",
                    modality_name(modality).c_str(), depth,
                    static_cast<long>(best->config().input_dim),
                    static_cast<long>(best->params().total_size()), outcome.best_epoch,
                    fmt6(outcome.best_dev_wer).c_str(), fmt6(test_eval.wer).c_str());
      table += row;
      std::cout << row << std::flush;
    }
  }
  write_text((fs::path(out_dir) / "ablation.tsv").string(), table);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AutoSign: pose-to-gloss recognition experiments"};
  app.require_subcommand(1);

  std::string config_path, data_root, out_dir, ckpt, split = "dev", pose_path;
  std::string decodes_path, report_path;
  std::uint64_t seed_flag = 0;
  bool seed_set = false;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed_flag, "Override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--config", config_path, "Run configuration file")->required();
  synth->add_option("--out", out_dir, "Output dataset directory")->required();
  add_seed(synth);

  CLI::App* train = app.add_subcommand("train", "Train a model");
  train->add_option("--config", config_path, "Run configuration file")->required();
  train->add_option("--data", data_root, "Dataset root")->required();
  train->add_option("--out", out_dir, "Run output directory")->required();
  add_seed(train);

  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  eval_cmd->add_option("--ckpt", ckpt, "Checkpoint path")->required();
  eval_cmd->add_option("--data", data_root, "Dataset root")->required();
  eval_cmd->add_option("--split", split, "Split name (train/dev/test)");
  eval_cmd->add_option("--decodes", decodes_path, "Write per-sample decodes TSV here");
  eval_cmd->add_option("--report", report_path, "Write the qualitative error report here");

  CLI::App* decode = app.add_subcommand("decode", "Transcribe one pose file");
  decode->add_option("--ckpt", ckpt, "Checkpoint path")->required();
  decode->add_option("--pose", pose_path, "Pose file (.pseq)")->required();

  CLI::App* ablate = app.add_subcommand("ablate", "Sweep modality x compressor depth");
  ablate->add_option("--config", config_path, "Run configuration file")->required();
  ablate->add_option("--data", data_root, "Dataset root")->required();
  ablate->add_option("--out", out_dir, "Output directory for arms and table")->required();
  add_seed(ablate);

  CLI::App* inspect = app.add_subcommand("inspect", "Dump pose file header and stats");
  inspect->add_option("--pose", pose_path, "Pose file (.pseq)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(config_path, out_dir, seed_set, seed_flag);
    if (train->parsed()) return cmd_train(config_path, data_root, out_dir, seed_set, seed_flag);
    if (eval_cmd->parsed()) return cmd_eval(ckpt, data_root, split, decodes_path, report_path);
    if (decode->parsed()) return cmd_decode(ckpt, pose_path);
    if (ablate->parsed()) return cmd_ablate(config_path, data_root, out_dir, seed_set, seed_flag);
    if (inspect->parsed()) return cmd_inspect(pose_path);
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
