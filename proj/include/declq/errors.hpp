#pragma once

#include <stdexcept>
#include <string>

namespace declq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible (non-square, mismatched blocks, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be symmetric is not (beyond tolerance).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An operation requiring a Schur-stable matrix received one with rho >= 1.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, double radius)
      : Error(what), radius_(radius) {}
  [[nodiscard]] double radius() const noexcept { return radius_; }

 private:
  double radius_;
};

/// The pair (A, H) is not observable.
class ObservabilityError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside the accepted domain.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Standing assumptions on the plant do not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  [[nodiscard]] double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// An index range lies outside the recorded data.
class RangeError : public Error {
 public:
  using Error::Error;
};

}  // namespace declq
