#pragma once

#include <memory>
#include <string>

#include "autosign/model.hpp"

namespace autosign {

/// Construct a fresh model of the given kind ("autoregressive" or "ctc").
std::unique_ptr<Recognizer> make_recognizer(const std::string& kind, const ModelConfig& cfg,
                                            std::uint64_t seed);

// Checkpoint file: magic "ASCK", u32 version, a canonical key=value config
// text (including the model kind), the gloss vocabulary, and the named
// parameter arrays as shape headers plus little-endian 64-bit values.
// Save -> load reproduces parameters bit-exactly.
void save_checkpoint(const std::string& path, const Recognizer& model,
                     const Vocabulary& vocab);

struct Checkpoint {
  std::string kind;
  ModelConfig config;
  ParamStore params;
  Vocabulary vocab;
};

Checkpoint load_checkpoint(const std::string& path);

/// Load and instantiate in one step; fills *vocab when non-null.
std::unique_ptr<Recognizer> load_recognizer(const std::string& path, Vocabulary* vocab);

// Canonical config text used inside checkpoints (sorted key=value lines).
std::string encode_model_config(const std::string& kind, const ModelConfig& cfg);
std::pair<std::string, ModelConfig> decode_model_config(const std::string& text);

}  // namespace autosign
