#pragma once

#include <stdexcept>
#include <string>

namespace dnaplan {

/// Precondition on a numeric argument violated (lever at t = 0, bad stride, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input data that fails validation (malformed profile, shape mismatch).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// No admissible path satisfies the planning constraints.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dnaplan
