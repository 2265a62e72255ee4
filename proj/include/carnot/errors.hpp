#pragma once

#include <stdexcept>
#include <string>

namespace carnot {

// Error taxonomy used across the toolkit. Checks that merely *fail* do not
// throw; they return reports. Throwing is reserved for misuse of an
// operation (bad inputs, unmet preconditions, unusable configuration).

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Algebra data is inconsistent (dimension mismatch, unvalidated algebra, ...).
struct StructuralError : Error {
  using Error::Error;
};

// Argument outside the operation's domain (t <= 0, point off-patch, ...).
struct DomainError : Error {
  using Error::Error;
};

// Configuration cannot be realized (unknown preset, bad norm parameters, ...).
struct ConfigError : Error {
  using Error::Error;
};

// The request is sound but outside what the implementation can compute.
struct CapabilityError : Error {
  using Error::Error;
};

// Evaluation at a singular point (norm gradient at the identity, curvature at
// a characteristic point, ...).
struct SingularityError : Error {
  using Error::Error;
};

// Curve/point claimed to lie on a surface does not.
struct GeometryError : Error {
  using Error::Error;
};

// Test function violates an admissibility requirement.
struct AdmissibilityError : Error {
  using Error::Error;
};

// A check's quantitative precondition fails (radius too large, ...).
struct PreconditionError : Error {
  using Error::Error;
};

}  // namespace carnot
