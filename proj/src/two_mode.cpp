#include "ptwell/two_mode.hpp"

#include <cmath>

#include "ptwell/errors.hpp"
#include "ptwell/rk45.hpp"

namespace ptwell {

using Eigen::Vector2cd;
using Eigen::Vector4d;

double TwoModeTarget::phi() const { return -0.5 * std::asin(gamma / j); }

double TwoModeTarget::current() const { return 2.0 * n * gamma / j; }

double TwoModeTarget::correlation() const {
    return 2.0 * n * std::sqrt(1.0 - gamma * gamma / (j * j));
}

Vector2cd TwoModeTarget::eigenstate() const {
    const std::complex<double> i(0.0, 1.0);
    const double p = phi();
    return {std::sqrt(n) * std::exp(i * p), std::sqrt(n) * std::exp(-i * p)};
}

Vector2cd TwoModeTarget::gpe_rhs(const Vector2cd& psi) const {
    const std::complex<double> i(0.0, 1.0);
    Vector2cd dpsi;
    dpsi[0] = -i * ((g * std::norm(psi[0]) + i * gamma) * psi[0] - j * psi[1]);
    dpsi[1] = -i * ((g * std::norm(psi[1]) - i * gamma) * psi[1] - j * psi[0]);
    return dpsi;
}

TwoModeTarget target_from(double gamma, double j, double n, double g) {
    if (gamma < 0.0 || j <= 0.0 || n <= 0.0)
        throw std::invalid_argument("target_from requires gamma >= 0, j > 0, n > 0");
    if (gamma > j)
        throw BrokenPTRegimeError("gamma exceeds j: PT-symmetric regime broken");
    return {gamma, j, n, g};
}

namespace {

Vector4d observables(const Vector2cd& psi) {
    const std::complex<double> cross = std::conj(psi[0]) * psi[1];
    return {std::norm(psi[0]), std::norm(psi[1]), 2.0 * cross.imag(), 2.0 * cross.real()};
}

}  // namespace

double verify_stationarity(const TwoModeTarget& target) {
    const Vector2cd psi = target.eigenstate();
    const Vector2cd dpsi = target.gpe_rhs(psi);
    // d/dt of the phase-invariant observables from the product rule.
    const double dn1 = 2.0 * (std::conj(psi[0]) * dpsi[0]).real();
    const double dn2 = 2.0 * (std::conj(psi[1]) * dpsi[1]).real();
    const std::complex<double> dcross = std::conj(dpsi[0]) * psi[1] + std::conj(psi[0]) * dpsi[1];
    const Vector4d rate(dn1, dn2, 2.0 * dcross.imag(), 2.0 * dcross.real());
    return rate.norm();
}

double gpe_observable_drift(const TwoModeTarget& target, double dt, double tol) {
    Vector2cd psi = target.eigenstate();
    const Vector4d ref = observables(psi);
    Rk45<Vector2cd> stepper([&](double, const Vector2cd& y) { return target.gpe_rhs(y); }, tol);
    double t = 0.0;
    double h = 1e-3;
    double drift = 0.0;
    while (t < dt - 1e-15) {
        t = stepper.step(t, psi, h, dt);
        drift = std::max(drift, (observables(psi) - ref).cwiseAbs().maxCoeff());
    }
    return drift;
}

}  // namespace ptwell
