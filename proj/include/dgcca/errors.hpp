#pragma once

#include <stdexcept>
#include <string>

namespace dgcca {

/// Invalid configuration: bad hyperparameter, malformed config file, unknown key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or unreadable data: missing files, shape/header mismatches, bad formats.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: non-PSD input, eigensolver non-convergence, singular
/// matrix without regularization, degenerate eigengap in a derivative check.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss or gradient. Carries epoch/batch
/// context in the message; epoch records emitted before the failure are
/// preserved through the trainer's epoch callback.
class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace dgcca
