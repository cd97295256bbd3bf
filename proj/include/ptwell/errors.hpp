#pragma once

#include <stdexcept>
#include <string>

namespace ptwell {

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ControlDivergedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when the reduced currents feeding the tunnelling controls vanish
/// and the control formulas blow up. Carries the trigger time (0 when the
/// control law is evaluated outside a run).
struct CollapseDetected : std::runtime_error {
    double time;
    explicit CollapseDetected(const std::string& what, double t = 0.0)
        : std::runtime_error(what), time(t) {}
};

/// Raised when the 2x2 onsite-energy system is rank deficient, which happens
/// for (near-)pure states.
struct PureStateDegeneracy : std::runtime_error {
    double time;
    explicit PureStateDegeneracy(const std::string& what, double t = 0.0)
        : std::runtime_error(what), time(t) {}
};

struct EmptySubsetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SeedNormError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BrokenPTRegimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Constraint projection failed to reach tolerance; carries the best
/// max-norm residual reached.
struct ConstraintSolveError : std::runtime_error {
    double best_residual;
    explicit ConstraintSolveError(const std::string& what, double r)
        : std::runtime_error(what), best_residual(r) {}
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ptwell
