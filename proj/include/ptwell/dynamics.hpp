#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ptwell/control_law.hpp"
#include "ptwell/state_prep.hpp"

namespace ptwell {

struct RunConfig {
    int n_total = 22;
    double gamma = 0.5;
    double j = 1.0;           // inner tunnelling rate J23
    double u = 0.1;           // microscopic interaction U = g/(n_total - 1)
    double d = 0.008;         // perturbation variance
    std::uint64_t seed = 1234;
    double n = 5.0;           // inner-well occupation of the target
    // Reservoir split: a small source keeps the stable window short, which
    // keeps the slow interaction-induced drift of the inner wells inside the
    // stationarity budget before the collapse ends the run.
    double n1_0 = 3.0;
    double n4_0 = 9.0;
    double dt_initial = 1e-3;
    double t_max = 10.0;
    double sample_interval = 0.01;
    double collapse_current_factor = 1e-6;  // threshold = factor * n_total
    double collapse_control_factor = 1e3;   // threshold = factor * j
    double degeneracy_factor = 1e-10;
    double integrator_tol = 1e-9;
    // Complex deflections are required for a regular onsite-energy system at
    // t = 0; see PerturbationSpec.
    bool complex_perturbation = true;

    /// Throws ConfigError listing every violated invariant.
    void validate() const;

    ControlThresholds thresholds() const {
        return {collapse_current_factor * n_total, degeneracy_factor};
    }
};

enum class Termination { Completed, Collapsed, Degenerate, Error };

std::string to_string(Termination t);

struct Sample {
    double t;
    ControlParams controls;
    DerivedFirstOrder first_order;
    std::vector<Complex> inner_sigma2;  // sigma_klmn, k,l,m,n in the inner wells
    double norm;
};

struct RunRecord {
    RunConfig config;
    std::vector<Sample> samples;
    Termination termination = Termination::Completed;
    double termination_time = 0.0;
    std::string error_message;
    ConstraintResiduals initial_residuals;
    double initial_purity2 = 0.0;
    double initial_purity4 = 0.0;
    double max_norm_drift = 0.0;  // largest per-step renormalization correction

    std::optional<double> collapse_time() const {
        if (termination == Termination::Collapsed) return termination_time;
        return std::nullopt;
    }
};

/// One adaptive integrator step of the controlled Schroedinger flow;
/// controls are recomputed from the stage state inside every right-hand-side
/// evaluation. Returns the controls at the step start. dt is adapted in place.
ControlParams step_controlled(ManyBodyState& state, double& t, double& dt,
                              const RunConfig& config);

/// Full experiment: state preparation, controlled integration, sampling and
/// termination detection. Deterministic for a fixed config.
RunRecord run(const RunConfig& config);

}  // namespace ptwell
