#pragma once

#include <stdexcept>
#include <string>

namespace revision_eq {

/// Argument outside the mathematical domain of an operation (action outside
/// the action interval, k outside (0,1), negative horizon, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when the incentive constraints admit no action at some slot.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed game, plan or configuration input.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace revision_eq
