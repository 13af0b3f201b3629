#pragma once

#include <stdexcept>
#include <string>

namespace tnc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration (probabilities, sizes, schema).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller violated a shape or size contract.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Index or window outside the valid range of a series.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, failed factorizations, diverging recurrences.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The unit-root test cannot be evaluated on this series.
class TestError : public Error {
 public:
  using Error::Error;
};

/// No valid window center could be drawn.
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Unreadable, truncated, or version-mismatched file.
class LoadError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace tnc
