#pragma once

#include <Eigen/Dense>
#include <complex>

namespace ptwell {

/// Stationary gain/loss two-mode reference: the lowest PT-symmetric
/// eigenstate and its first-order observables, used as the control target.
struct TwoModeTarget {
    double gamma;
    double j;
    double n;
    double g = 0.0;  // macroscopic interaction, only enters the GPE flow

    double phi() const;       // -1/2 arcsin(gamma/j)
    double current() const;   // jtilde = 2 n gamma / j
    double correlation() const;  // c = 2 n sqrt(1 - gamma^2/j^2)

    /// The eigenstate (psi1, psi2) = sqrt(n) (e^{i phi}, e^{-i phi}).
    Eigen::Vector2cd eigenstate() const;

    /// Right-hand side of the two-mode GPE, d psi/dt.
    Eigen::Vector2cd gpe_rhs(const Eigen::Vector2cd& psi) const;
};

/// Throws BrokenPTRegimeError when gamma > j.
TwoModeTarget target_from(double gamma, double j, double n, double g = 0.0);

/// Norm of d/dt (n1, n2, jtilde, c) evaluated analytically on the eigenstate;
/// stationary up to the global chemical-potential phase.
double verify_stationarity(const TwoModeTarget& target);

/// Max drift of (n1, n2, jtilde, c) over a GPE integration of length dt.
double gpe_observable_drift(const TwoModeTarget& target, double dt, double tol = 1e-12);

}  // namespace ptwell
