#pragma once

#include <array>
#include <cstdint>

#include "ptwell/observables.hpp"
#include "ptwell/two_mode.hpp"

namespace ptwell {

/// Mean-field seed for the four-well chain: reservoir phases are locked a
/// quarter turn against the neighbouring inner well.
struct MeanFieldSeed {
    std::array<Complex, 4> psi;
    double n1_0, n4_0, n, phi;

    static MeanFieldSeed from_target(const TwoModeTarget& target, double n1_0, double n4_0);
};

struct PerturbationSpec {
    double variance = 0.0;  // of the normal multipliers, mean is fixed at 1
    std::uint64_t seed = 0;
    // Complex deflections (variance split evenly between the parts) break the
    // occupation-locked phase structure of the seed; with purely real
    // multipliers every moment keeps its mean-field phase and the
    // onsite-energy system stays rank deficient.
    bool complex_multipliers = true;
};

struct ConstraintResiduals {
    std::array<double, 5> r{};
    double max_abs() const;
};

/// Condensate product state from mean-field coefficients with
/// sum_i |psi_i|^2 = n_total. Normalized on return.
ManyBodyState product_state(const std::array<Complex, 4>& psi,
                            const std::shared_ptr<const FockBasis>& basis);
ManyBodyState product_state(const std::vector<Complex>& psi,
                            const std::shared_ptr<const FockBasis>& basis);

/// Multiply every Fock coefficient by an independent normal sample with mean
/// 1 and the given variance, then renormalize. Deterministic for a fixed seed.
ManyBodyState perturb(const ManyBodyState& state, const PerturbationSpec& spec);

/// The five initial-state constraints evaluated on a single-particle matrix
/// (tunnelling rates inside the residuals come from the state itself).
ConstraintResiduals constraint_residuals(const Matrix& sigma1, const TwoModeTarget& target);

struct ProjectionOptions {
    double tolerance = 1e-9;   // target max-norm residual
    int max_iterations = 500;
};

/// Least-squares projection of the state onto the five constraints by
/// varying complex multipliers of the Fock coefficients. Damped Newton on the
/// squared residual with analytic derivatives; the coherence rows keep their
/// exact curvature because their gradients vanish at the solution (the
/// coherence magnitude saturates a Cauchy-Schwarz bound there). Returns the
/// normalized projected state and its residuals. Throws ConstraintSolveError
/// if the tolerance is not reached.
std::pair<ManyBodyState, ConstraintResiduals> project_constraints(
    const ManyBodyState& state, const TwoModeTarget& target,
    const ProjectionOptions& options = {});

}  // namespace ptwell
