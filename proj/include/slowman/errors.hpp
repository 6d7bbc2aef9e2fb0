#pragma once

#include <stdexcept>
#include <string>

namespace slowman {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad dimension, bad size, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The computation could not proceed: Newton failure, resonance, small
/// divisor, integrator failure, hyperbolicity failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing an artifact failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Raised by the integrator; carries the time at which it gave up.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double time)
      : NumericalError(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// A divisor of a Fourier-space solve fell below the small-divisor tolerance.
class SmallDivisorError : public NumericalError {
 public:
  SmallDivisorError(long k, std::size_t component, int order, double magnitude)
      : NumericalError("small divisor |" + std::to_string(magnitude) + "| at k = " +
                       std::to_string(k) + ", j = " + std::to_string(component) +
                       ", n = " + std::to_string(order)),
        k_(k), component_(component), order_(order), magnitude_(magnitude) {}
  long k() const noexcept { return k_; }
  std::size_t component() const noexcept { return component_; }
  int order() const noexcept { return order_; }
  double magnitude() const noexcept { return magnitude_; }

 private:
  long k_;
  std::size_t component_;
  int order_;
  double magnitude_;
};

}  // namespace slowman
