#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ldplab {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of a function (t <= 0, q' >= q, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or invalid configuration (grid, windows, presets, unknown keys).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A covariance kernel cannot be integrated or evaluated.
class KernelError : public Error {
 public:
  using Error::Error;
};

/// Circulant embedding produced too much negative spectral mass.
class EmbeddingError : public Error {
 public:
  using Error::Error;
};

/// Not enough (or degenerate) data for a statistical estimate.
class StatisticsError : public Error {
 public:
  using Error::Error;
};

/// Two accumulators built for different contexts were merged.
class MergeError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition on an input was violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The numerical scheme produced a non-finite value.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::size_t step, std::size_t path);

  std::size_t step() const noexcept { return step_; }
  std::size_t path() const noexcept { return path_; }

 private:
  std::size_t step_;
  std::size_t path_;
};

}  // namespace ldplab
