#pragma once

#include <stdexcept>
#include <string>

namespace cevt {

/// Argument outside the support or parameter range of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Lifetime/censoring pair for which no balance parameter is known.
class UnsupportedPairError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double error_estimate)
      : std::runtime_error(what + " (estimate " + std::to_string(estimate) + ", error " +
                           std::to_string(error_estimate) + ")"),
        estimate_(estimate),
        error_estimate_(error_estimate) {}

  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double estimate_;
  double error_estimate_;
};

/// A monotone root could not be bracketed.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientReplicationsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bad command line or configuration file; the message names the key.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace cevt
