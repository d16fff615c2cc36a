#pragma once

#include <stdexcept>
#include <string>

namespace gta {

// Invalid argument values (bad dimensions, bad flags, malformed config).
struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Problem size exceeds what an exact solver can handle.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed on-disk data.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A state that the module contracts promise cannot occur.
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rollout exceeded its step budget without completing.
struct RunawayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Real-time stream ended before a solution was complete.
struct IncompleteHorizonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gta
