#pragma once

#include <stdexcept>
#include <string>

namespace ailfem {

/// Raised when arguments violate an operation's preconditions.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a function is evaluated outside the set where it is defined
/// (e.g. the gradient of the singular solution at the re-entrant corner).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an iterative solver fails to reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double achieved_residual)
      : std::runtime_error(what), residual_(achieved_residual) {}

  /// Relative residual reached before giving up.
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace ailfem
