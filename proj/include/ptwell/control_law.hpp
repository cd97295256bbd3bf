#pragma once

#include "ptwell/observables.hpp"

namespace ptwell {

/// Coefficients of the 2x2 linear system for the onsite energies,
///   alpha_r eps1 + beta_r eps4 = omega_r
///   alpha_i eps1 + beta_i eps4 = omega_i.
struct LinearSystemCoeffs {
    double alpha_r, beta_r, omega_r;
    double alpha_i, beta_i, omega_i;
    double det() const { return alpha_r * beta_i - beta_r * alpha_i; }
};

/// Thresholds used when the control law is evaluated inside a run.
struct ControlThresholds {
    double collapse_current;   // minimum |jtilde_12|, |jtilde_34|
    double degeneracy_factor;  // |det| cutoff relative to coefficient scale
};

ControlThresholds default_thresholds(int n_total);

/// J12 = 2 gamma n2 / jtilde_12 and J34 = 2 gamma n3 / jtilde_34.
/// Throws CollapseDetected when a reduced current is below threshold.
std::pair<double, double> tunnelling_controls(const DensityMoments& moments, double gamma,
                                              double collapse_current_threshold);

/// Assemble the linear-system coefficients from the instantaneous moments
/// and the already-computed tunnelling rates.
LinearSystemCoeffs coefficient_assembly(const DensityMoments& moments, double j12, double j34,
                                        double j23, double u);

/// True when the system is rank deficient (determinant below the cutoff
/// relative to the coefficient scale) with a right-hand side consistent with
/// the degenerate column space. Then infinitely many solutions exist; this is
/// the product-state signature. Tightly constrained mixed states also drive
/// the determinant to zero (the saturated inner coherence makes the columns
/// parallel) but leave the right-hand side inconsistent, so they are not
/// degenerate in this sense and keep a unique least-squares minimiser.
bool onsite_system_degenerate(const LinearSystemCoeffs& coeffs, double degeneracy_factor);

/// Regularized minimum-norm solution of the 2x2 system. Identical to the
/// Cramer solution for well-conditioned systems; near rank deficiency the
/// null-direction component is damped so the energies stay finite. Always
/// finite for finite coefficients.
std::pair<double, double> solve_onsite_system(const LinearSystemCoeffs& coeffs);

/// Checked solve: throws PureStateDegeneracy when the system is degenerate
/// per onsite_system_degenerate, otherwise returns solve_onsite_system.
std::pair<double, double> onsite_controls(const LinearSystemCoeffs& coeffs,
                                          double degeneracy_factor);

/// Residual of the reservoir-decoupling requirement -J12 sigma_13 + J34 sigma_24.
Complex verify_requirement(const Matrix& sigma1, double j12, double j34);

/// Full feedback law: moments -> ControlParams. Throws CollapseDetected /
/// PureStateDegeneracy per the thresholds.
ControlParams evaluate_controls(const DensityMoments& moments, double gamma, double j23,
                                double u, const ControlThresholds& thresholds);

/// Same computation with no threshold checks; used inside the integrator
/// right-hand side where classification happens at step endpoints. Returns
/// NaN energies when the coefficients themselves are non-finite.
ControlParams evaluate_controls_raw(const DensityMoments& moments, double gamma, double j23,
                                    double u);

}  // namespace ptwell
