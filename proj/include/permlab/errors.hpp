#pragma once

#include <stdexcept>

namespace permlab {

// Raised when an exact routine is asked to work above its size ceiling.
class SizeLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Raised when a method cannot serve the requested arguments.
class UnsupportedMethodError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a simulation would exceed its amplitude budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LayoutMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical precondition of a checked inequality does not hold.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace permlab
