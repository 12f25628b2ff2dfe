#pragma once

#include <stdexcept>

namespace fedsim {

// Invalid hyperparameters or run configuration. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed operands handed to an operation (dimension mismatch, empty batch).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dataset file problems (missing file, malformed row). CLI exit code 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem failures while writing results. CLI exit code 4.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fedsim
