#include "autosign/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace autosign {

namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long out = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " needs an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " needs a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key " + key + " needs true/false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct KeySpec {
  Setter set;
  Getter get;
};

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table = [] {
    std::map<std::string, KeySpec> t;
    auto add = [&t](const std::string& key, Setter set, Getter get) {
      t[key] = {std::move(set), std::move(get)};
    };

    add("model.kind",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v != "autoregressive" && v != "ctc")
            throw ConfigError("config key " + k + " must be autoregressive|ctc");
          c.model_kind = v;
        },
        [](const RunConfig& c) { return c.model_kind; });
    add("model.d_model",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.model.d_model = to_long(k, v); },
        [](const RunConfig& c) { return std::to_string(c.model.d_model); });
    add("model.n_layers",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.model.n_layers = to_long(k, v); },
        [](const RunConfig& c) { return std::to_string(c.model.n_layers); });
    add("model.n_heads",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.model.n_heads = to_long(k, v); },
        [](const RunConfig& c) { return std::to_string(c.model.n_heads); });
    add("model.ffn_mult",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.model.ffn_mult = to_long(k, v); },
        [](const RunConfig& c) { return std::to_string(c.model.ffn_mult); });
    add("model.dropout",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.model.dropout_p = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.model.dropout_p); });
    add("model.max_prefix_len",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.model.max_prefix_len = to_long(k, v); },
        [](const RunConfig& c) { return std::to_string(c.model.max_prefix_len); });
    add("model.max_text_len",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.model.max_text_len = to_long(k, v); },
        [](const RunConfig& c) { return std::to_string(c.model.max_text_len); });
    add("model.compressor_layers",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.model.compressor.n_layers = static_cast<int>(to_long(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.model.compressor.n_layers); });
    add("model.compressor_channels",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.model.compressor.channels = to_long(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.model.compressor.channels); });

    add("data.modality",
        [](RunConfig& c, const std::string&, const std::string& v) {
          c.train.modality = parse_modality(v);
        },
        [](const RunConfig& c) { return modality_name(c.train.modality); });

    add("train.epochs",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.epochs = to_long(k, v); },
        [](const RunConfig& c) { return std::to_string(c.train.epochs); });
    add("train.batch_size",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.batch_size_train = to_long(k, v); },
        [](const RunConfig& c) { return std::to_string(c.train.batch_size_train); });
    add("train.eval_batch_size",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.batch_size_eval = to_long(k, v); },
        [](const RunConfig& c) { return std::to_string(c.train.batch_size_eval); });
    add("train.lr",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.lr = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.train.lr); });
    add("train.weight_decay",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.weight_decay = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.train.weight_decay); });
    add("train.beta1",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.beta1 = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.train.beta1); });
    add("train.beta2",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.beta2 = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.train.beta2); });
    add("train.scheduler_enabled",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.scheduler.enabled = to_bool(k, v); },
        [](const RunConfig& c) { return c.train.scheduler.enabled ? "true" : "false"; });
    add("train.scheduler_t0",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.scheduler.t0 = to_long(k, v); },
        [](const RunConfig& c) { return std::to_string(c.train.scheduler.t0); });
    add("train.scheduler_tmult",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.scheduler.t_mult = to_long(k, v); },
        [](const RunConfig& c) { return std::to_string(c.train.scheduler.t_mult); });
    add("train.lr_min",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.scheduler.lr_min = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.train.scheduler.lr_min); });
    add("train.patience",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.early_stop_patience = to_long(k, v); },
        [](const RunConfig& c) { return std::to_string(c.train.early_stop_patience); });
    add("train.seed",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.seed = static_cast<std::uint64_t>(to_long(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.train.seed); });

    add("augment.enabled",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.augment.enabled = to_bool(k, v); },
        [](const RunConfig& c) { return c.train.augment.enabled ? "true" : "false"; });
    add("augment.jitter_sigma",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.augment.jitter_sigma = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.train.augment.jitter_sigma); });
    add("augment.scale_min",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.augment.scale_min = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.train.augment.scale_min); });
    add("augment.scale_max",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.augment.scale_max = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.train.augment.scale_max); });
    add("augment.temporal_mask_p",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.augment.temporal_mask_p = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.train.augment.temporal_mask_p); });
    add("augment.frame_dropout_p",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.augment.frame_dropout_p = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.train.augment.frame_dropout_p); });
    add("augment.time_warp_max_shift",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.augment.time_warp_max_shift = static_cast<int>(to_long(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.train.augment.time_warp_max_shift); });
    add("augment.apply_p",
        [](RunConfig& c, const std::string& k, const std::string& v) { c.train.augment.per_aug_apply_p = to_double(k, v); },
        [](const RunConfig& c) { return fmt(c.train.augment.per_aug_apply_p); });
    add("augment.part_aware_enabled",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.augment.part_aware.enabled = to_bool(k, v);
        },
        [](const RunConfig& c) { return c.train.augment.part_aware.enabled ? "true" : "false"; });
    add("augment.hand_rot_max_deg",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.augment.part_aware.hand_rot_max_deg = to_double(k, v);
        },
        [](const RunConfig& c) { return fmt(c.train.augment.part_aware.hand_rot_max_deg); });
    add("augment.hand_scale_min",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.augment.part_aware.hand_scale_min = to_double(k, v);
        },
        [](const RunConfig& c) { return fmt(c.train.augment.part_aware.hand_scale_min); });
    add("augment.hand_scale_max",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.augment.part_aware.hand_scale_max = to_double(k, v);
        },
        [](const RunConfig& c) { return fmt(c.train.augment.part_aware.hand_scale_max); });
    add("augment.face_jitter_sigma",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.augment.part_aware.face_jitter_sigma = to_double(k, v);
        },
        [](const RunConfig& c) { return fmt(c.train.augment.part_aware.face_jitter_sigma); });
    add("augment.body_jitter_sigma",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.augment.part_aware.body_jitter_sigma = to_double(k, v);
        },
        [](const RunConfig& c) { return fmt(c.train.augment.part_aware.body_jitter_sigma); });

    add("synth.vocab_size",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.synth.vocab_size = static_cast<int>(to_long(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.synth.vocab_size); });
    add("synth.train_samples",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.synth.train_samples = static_cast<int>(to_long(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.synth.train_samples); });
    add("synth.dev_samples",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.synth.dev_samples = static_cast<int>(to_long(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.synth.dev_samples); });
    add("synth.test_samples",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.synth.test_samples = static_cast<int>(to_long(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.synth.test_samples); });
    add("synth.sentence_len_min",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.synth.sentence_len_min = static_cast<int>(to_long(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.synth.sentence_len_min); });
    add("synth.sentence_len_max",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.synth.sentence_len_max = static_cast<int>(to_long(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.synth.sentence_len_max); });
    add("synth.frames_per_gloss_min",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.synth.frames_per_gloss_min = static_cast<int>(to_long(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.synth.frames_per_gloss_min); });
    add("synth.frames_per_gloss_max",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.synth.frames_per_gloss_max = static_cast<int>(to_long(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.synth.frames_per_gloss_max); });
    add("synth.train_signers",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.synth.train_signers = static_cast<int>(to_long(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.synth.train_signers); });
    add("synth.eval_signers",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.synth.eval_signers = static_cast<int>(to_long(k, v));
        },
        [](const RunConfig& c) { return std::to_string(c.synth.eval_signers); });
    add("synth.noise_sigma",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.synth.noise_sigma = to_double(k, v);
        },
        [](const RunConfig& c) { return fmt(c.synth.noise_sigma); });
    return t;
  }();
  return table;
}

}  // namespace

RunConfig parse_run_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = key_table().find(key);
    if (it == key_table().end())
      throw ConfigError("unknown config key '" + key + "' (line " + std::to_string(line_no) + ")");
    it->second.set(cfg, key, value);
  }
  return cfg;
}

RunConfig parse_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return parse_run_config_text(text);
}

std::string resolved_config_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [key, spec] : key_table()) {
    out += key;
    out += " = ";
    out += spec.get(cfg);
    out += "\n";
  }
  return out;
}

}  // namespace autosign
