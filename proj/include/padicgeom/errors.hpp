#pragma once

#include <stdexcept>

namespace padicgeom {

struct InvalidConfig : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotSaturated : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnsupportedSupport : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when a result cannot be decided at the working precision.
struct PrecisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DiscardRateExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace padicgeom
