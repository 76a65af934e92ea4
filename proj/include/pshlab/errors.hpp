#pragma once

#include <stdexcept>
#include <string>

namespace pshlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments or configuration (named field, bad arity, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A node count, basis size or similar cap was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, failed factorizations, inconsistent quadrature.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An integral was classified as divergent.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double fitted_exponent)
      : Error(what), fitted_exponent_(fitted_exponent) {}

  double fitted_exponent() const noexcept { return fitted_exponent_; }

 private:
  double fitted_exponent_;
};

}  // namespace pshlab
