#pragma once

#include <stdexcept>
#include <string>

namespace ccfnet {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A decomposition that cannot be evaluated, e.g. a subnetwork without BSs.
class InvalidDecomposition : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The constraint set admits no feasible decomposition.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccfnet
