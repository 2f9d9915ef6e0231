#pragma once

#include <stdexcept>
#include <string>

namespace plab {

/// Caller supplied something outside an operation's precondition.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Factorization or optimization broke down.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every hyperparameter restart failed.
class FitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace plab
