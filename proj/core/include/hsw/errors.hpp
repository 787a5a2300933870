#pragma once

#include <stdexcept>
#include <string>

namespace hsw {

// Raised when a computation is well-posed but the data fails a feasibility or
// residual requirement (integrability, admissible set, Newton divergence).
// The CLI maps it to exit code 2; std::invalid_argument maps to exit code 1.
class FeasibilityError : public std::runtime_error {
 public:
  explicit FeasibilityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hsw
