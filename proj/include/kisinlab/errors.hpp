#pragma once

#include <stdexcept>
#include <string>

namespace kl {

struct ContextMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotComposable : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotAnEndomorphism : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when a truncated computation cannot decide its answer.
struct InsufficientPrecision : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateFrobenius : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HeightViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingProvenance : std::logic_error {
  using std::logic_error::logic_error;
};

struct MembershipFailure : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An exact division that should always succeed did not: this is a bug signal.
struct InexactDivision : std::logic_error {
  using std::logic_error::logic_error;
};

} // namespace kl
