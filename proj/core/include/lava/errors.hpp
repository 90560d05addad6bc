#pragma once

#include <stdexcept>
#include <string>

namespace lava {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (unknown keys, out-of-range values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed, insufficient or misaligned input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Lag buffer not yet warm enough to build a regressor.
class InsufficientHistory : public DataError {
 public:
  using DataError::DataError;
};

/// Singular systems, non-PSD covariances, diverging integration.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lava
