#pragma once

#include <string>

#include "autosign/model.hpp"
#include "autosign/synth.hpp"
#include "autosign/train.hpp"

namespace autosign {

/// Resolved run configuration. The file format is flat UTF-8
/// `section.key = value` lines with '#' comments; unknown keys are rejected.
struct RunConfig {
  std::string model_kind = "autoregressive";
  ModelConfig model;  // input_dim / vocab_size are filled from the data
  TrainConfig train;
  SynthConfig synth;
};

RunConfig parse_run_config_text(const std::string& text);
RunConfig parse_run_config(const std::string& path);

/// Every key with its resolved value, sorted, one per line — written next to
/// run outputs so the exact configuration is always recorded.
std::string resolved_config_text(const RunConfig& cfg);

}  // namespace autosign
