#pragma once

#include <stdexcept>
#include <string>

namespace ymh {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Poisson right side has a nonzero mean: the problem is unsolvable on the torus.
struct NonZeroMean : Error {
    using Error::Error;
};

/// A fiber point collapsed to (near) the origin; usually means the time step was too large.
struct DegeneratePoint : Error {
    using Error::Error;
};

/// Two fields with incompatible grid sizes or fiber models were combined.
struct ShapeMismatch : Error {
    using Error::Error;
};

/// Ball radius outside (0, L/2].
struct BadRadius : Error {
    using Error::Error;
};

/// Bubble concentration scale outside the resolvable range [4h, L/32].
struct BadScale : Error {
    using Error::Error;
};

/// Adaptive stepping could not find an energy-decreasing step.
struct StepRejected : Error {
    using Error::Error;
};

/// NaN or Inf appeared in a field. This is a bug guard, not a model outcome.
struct NonFiniteField : Error {
    using Error::Error;
};

/// Energy increased along accepted steps beyond tolerance.
struct MonotonicityViolation : Error {
    using Error::Error;
};

/// Snapshot file is malformed, truncated, or has an unsupported version.
struct BadSnapshot : Error {
    using Error::Error;
};

/// Run configuration file could not be parsed or is inconsistent.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace ymh
