#pragma once

#include <stdexcept>
#include <string>

namespace hadamard {

/// Invalid inputs: dimension mismatches, out-of-range parameters, degenerate data.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A factorization or iteration failed numerically.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cumulant evaluation overflowed (e.g. exp(eta) for the Poisson family).
class OverflowError : public NumericalError {
 public:
  OverflowError(const std::string& what, double eta) : NumericalError(what), eta_(eta) {}
  double eta() const { return eta_; }

 private:
  double eta_;
};

/// The requested operation is not defined for this input (e.g. moment lambda with n <= p).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hadamard
