#pragma once

#include <stdexcept>
#include <string>

namespace autosign {

// Shape/rank/index violations in the tensor engine.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Bad magic, version, or otherwise unparseable file contents.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File parsed but payload is inconsistent with its header.
struct CorruptionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid or unknown configuration value.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input exceeds a configured capacity (positional table, text length).
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training loss became non-finite.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem read/write failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Empty or otherwise unusable data where content is required.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace autosign
