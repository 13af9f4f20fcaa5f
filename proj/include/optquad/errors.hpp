#pragma once

#include <stdexcept>
#include <string>

namespace optquad {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A request outside the valid parameter range (m < 4, N < m - 3, ...).
/// The CLI maps this to exit code 2.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Working precision is too low for a requested computation.
/// The CLI maps this to exit code 3.
class PrecisionError : public Error {
 public:
  PrecisionError(const std::string& what, double condition_estimate = 0.0,
                 int suggested_bits = 0)
      : Error(what),
        condition_estimate_(condition_estimate),
        suggested_bits_(suggested_bits) {}

  double condition_estimate() const noexcept { return condition_estimate_; }
  /// 0 when no suggestion applies.
  int suggested_bits() const noexcept { return suggested_bits_; }

 private:
  double condition_estimate_;
  int suggested_bits_;
};

/// Sign-change isolation did not find the expected number of roots.
/// Indicates corrupted polynomial data rather than a user error.
class RootIsolationError : public Error {
 public:
  using Error::Error;
};

/// Integrand returned a NaN or infinity.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace optquad
