#pragma once

#include <stdexcept>
#include <string>

namespace mmot {

// Shape or index disagreement between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A materialization would exceed the configured entry budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A kernel, marginal or input tensor that must be strictly positive is not.
// Raised for low-rank factors whose rank is too small to keep the kernel
// positive and for nonpositive marginals inside the Sinkhorn loop.
class PositivityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A theorem hypothesis needed by an error certificate is violated.
class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mmot
