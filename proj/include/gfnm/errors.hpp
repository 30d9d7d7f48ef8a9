// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gfnm {

/// Base of every error raised by the library. The CLI maps the subclasses
/// onto process exit codes (see exit_code()).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: out-of-domain parameters, unknown names.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed call arguments (shape mismatch, odd bit counts, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or inconsistent data files.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Object used in a state it does not support (e.g. a model paired with a
/// frame of different dimensions).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or failed factorizations.
class NumericFault : public Error {
 public:
  using Error::Error;
};

class DecompositionError : public NumericFault {
 public:
  DecompositionError(const std::string& what, std::size_t pivot)
      : NumericFault(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Raised by the unregularized normal-equation solve when AᴴA is singular.
class RankDeficiencyError : public DecompositionError {
 public:
  using DecompositionError::DecompositionError;
};

/// 0 success, 2 config error, 3 data error, 4 numeric fault.
int exit_code(const std::exception& e) noexcept;

}  // namespace gfnm
