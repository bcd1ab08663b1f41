#pragma once

#include <stdexcept>
#include <string>

namespace pvsim {

/// Implicit solver failed to reach its residual tolerance.
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Panel parameter fit did not reach the requested accuracy.
struct CalibrationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Integrator step size violates the stability guard.
struct UnstableStep : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Levenberg-Marquardt damping overflowed without an accepted step.
struct TrainingDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Neural MPP estimate landed outside the physically plausible range.
struct EstimateOutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Query outside the domain covered by a scenario profile.
struct OutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Metrics requested on a trace with no rows.
struct EmptyTrace : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pvsim
