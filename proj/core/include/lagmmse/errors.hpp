#pragma once

#include <stdexcept>
#include <string>

namespace lagmmse {

// Base class for everything this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  InvalidParameter(std::string name, const std::string& reason)
      : Error("invalid parameter '" + name + "': " + reason), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class RootFindingFailure : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

// A spectral root sits (numerically) on the imaginary axis; the
// stable/unstable split is ill defined there.
class MarginalRoot : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

// Repeated poles in the Wiener transfer function are rejected, not handled.
class RepeatedPole : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class GridResolutionError : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class NoSolution : public Error {
 public:
  using Error::Error;
};

class DegenerateCase : public Error {
 public:
  using Error::Error;
};

class McBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class ReducibleChain : public Error {
 public:
  using Error::Error;
};

}  // namespace lagmmse
