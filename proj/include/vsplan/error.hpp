#pragma once

#include <stdexcept>
#include <string>

namespace vsplan {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Root finder called on an interval whose endpoints do not bracket a sign change.
class NoBracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative numerical method did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No sampling plan satisfies the requested risk point within the search limits.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vsplan
