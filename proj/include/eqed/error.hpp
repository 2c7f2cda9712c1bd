#pragma once

#include <stdexcept>
#include <string>

namespace eqed {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on caller-supplied data was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two emitters are closer than kMinSeparation.
class KernelSingularity : public Error {
 public:
  using Error::Error;
};

/// A linear solve, factorization or integration did not produce a usable result.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// The ODE integrator gave up; carries the last time it reached.
class IntegrationError : public NumericalFailure {
 public:
  IntegrationError(const std::string& what, double last_good_time)
      : NumericalFailure(what), last_good_time_(last_good_time) {}
  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

/// The Liouvillian has more than one stationary state.
class DegenerateNullSpace : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// An observable is undefined for the given state (e.g. g2 of the vacuum).
class UndefinedObservable : public Error {
 public:
  using Error::Error;
};

}  // namespace eqed
