#include "ptwell/control_law.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "ptwell/errors.hpp"

namespace ptwell {

namespace {

// Damping scale for the near-singular solve, relative to the largest singular
// value. Prepared mixed states satisfy the constraints so tightly that the
// columns of the system are numerically parallel; the null direction is
// filtered instead of amplified. Well-conditioned systems are unaffected to
// second order in this constant.
constexpr double kOnsiteRcond = 1e-4;

// Right-hand sides closer to the degenerate column space than this (relative
// to their norm) count as consistent. Product states land at rounding level,
// prepared mixed states keep an inconsistency of order the impurity.
constexpr double kConsistencyTol = 1e-8;

struct OnsiteSolve {
    double eps1, eps4;
    double relative_residual;  // |A eps - w| / |w|
};

OnsiteSolve solve_regularized(const LinearSystemCoeffs& c) {
    Eigen::Matrix2d a;
    a << c.alpha_r, c.beta_r, c.alpha_i, c.beta_i;
    const Eigen::Vector2d w(c.omega_r, c.omega_i);
    const Eigen::JacobiSVD<Eigen::Matrix2d> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector2d s = svd.singularValues();
    const double lambda = kOnsiteRcond * s(0);
    Eigen::Vector2d filtered = Eigen::Vector2d::Zero();
    for (int i = 0; i < 2; ++i) {
        const double den = s(i) * s(i) + lambda * lambda;
        if (den > 0.0) filtered(i) = s(i) * svd.matrixU().col(i).dot(w) / den;
    }
    const Eigen::Vector2d eps = svd.matrixV() * filtered;
    const double wnorm = w.norm();
    const double residual = (a * eps - w).norm();
    return {eps(0), eps(1), wnorm > 0.0 ? residual / wnorm : 0.0};
}

}  // namespace

ControlThresholds default_thresholds(int n_total) {
    return {1e-6 * static_cast<double>(n_total), 1e-10};
}

std::pair<double, double> tunnelling_controls(const DensityMoments& moments, double gamma,
                                              double collapse_current_threshold) {
    if (gamma == 0.0) return {0.0, 0.0};  // no transport demanded
    const double jt12 = moments.current(0, 1);
    const double jt34 = moments.current(2, 3);
    if (std::abs(jt12) < collapse_current_threshold ||
        std::abs(jt34) < collapse_current_threshold) {
        throw CollapseDetected("reduced current below collapse threshold");
    }
    const double j12 = 2.0 * gamma * moments.occupation(1) / jt12;
    const double j34 = 2.0 * gamma * moments.occupation(2) / jt34;
    return {j12, j34};
}

LinearSystemCoeffs coefficient_assembly(const DensityMoments& moments, double j12, double j34,
                                        double j23, double u) {
    ControlParams p;
    p.j12 = j12;
    p.j34 = j34;
    p.j23 = j23;
    p.u = u;

    const double n2 = moments.occupation(1);
    const double n3 = moments.occupation(2);
    const double jt12 = moments.current(0, 1);
    const double jt34 = moments.current(2, 3);
    const double jt13 = moments.current(0, 2);
    const double jt24 = moments.current(1, 3);
    const double c12 = moments.correlation(0, 1);
    const double c34 = moments.correlation(2, 3);
    const double c13 = moments.correlation(0, 2);
    const double c24 = moments.correlation(1, 3);

    auto x = [&](int k, int l) { return 2.0 * hierarchy_z(moments, p, k, l).real(); };
    auto y = [&](int k, int l) { return 2.0 * hierarchy_z(moments, p, k, l).imag(); };
    const double x12 = x(0, 1), y13 = y(0, 2), x13 = x(0, 2);
    const double x34 = x(2, 3), y24 = y(1, 3), x24 = x(1, 3);
    const double x22 = x(1, 1), y22 = y(1, 1);
    const double x33 = x(2, 2), y33 = y(2, 2);

    LinearSystemCoeffs c;
    c.alpha_r = 0.5 * j12 * (c12 * c13 / jt12 + jt13);
    c.beta_r = 0.5 * j34 * (c34 * c24 / jt34 + jt24);
    c.omega_r = 0.5 * j12 * (y22 * c13 / (2.0 * n2) + x12 * c13 / jt12 +
                             x22 * jt13 / (2.0 * n2) + y13) -
                0.5 * j34 * (y33 * c24 / (2.0 * n3) + x34 * c24 / jt34 +
                             x33 * jt24 / (2.0 * n3) + y24);
    c.alpha_i = 0.5 * j12 * (c12 * jt13 / jt12 - c13);
    c.beta_i = 0.5 * j34 * (c34 * jt24 / jt34 - c24);
    c.omega_i = 0.5 * j12 * (-x22 * c13 / (2.0 * n2) + y22 * jt13 / (2.0 * n2) +
                             x12 * jt13 / jt12 - x13) -
                0.5 * j34 * (-x33 * c24 / (2.0 * n3) + y33 * jt24 / (2.0 * n3) +
                             x34 * jt24 / jt34 - x24);

    if (!std::isfinite(c.alpha_r) || !std::isfinite(c.beta_r) || !std::isfinite(c.omega_r) ||
        !std::isfinite(c.alpha_i) || !std::isfinite(c.beta_i) || !std::isfinite(c.omega_i)) {
        throw CollapseDetected("non-finite linear-system coefficients");
    }
    return c;
}

bool onsite_system_degenerate(const LinearSystemCoeffs& c, double degeneracy_factor) {
    const double scale = std::abs(c.alpha_r * c.beta_i) + std::abs(c.beta_r * c.alpha_i) + 1e-300;
    if (std::abs(c.det()) >= degeneracy_factor * scale) return false;
    return solve_regularized(c).relative_residual < kConsistencyTol;
}

std::pair<double, double> solve_onsite_system(const LinearSystemCoeffs& c) {
    const OnsiteSolve s = solve_regularized(c);
    return {s.eps1, s.eps4};
}

std::pair<double, double> onsite_controls(const LinearSystemCoeffs& c,
                                          double degeneracy_factor) {
    const double scale = std::abs(c.alpha_r * c.beta_i) + std::abs(c.beta_r * c.alpha_i) + 1e-300;
    const OnsiteSolve s = solve_regularized(c);
    if (std::abs(c.det()) < degeneracy_factor * scale &&
        s.relative_residual < kConsistencyTol) {
        throw PureStateDegeneracy(
            "onsite-energy system is rank deficient with a consistent right-hand side");
    }
    return {s.eps1, s.eps4};
}

Complex verify_requirement(const Matrix& sigma1, double j12, double j34) {
    return -j12 * sigma1(0, 2) + j34 * sigma1(1, 3);
}

ControlParams evaluate_controls(const DensityMoments& moments, double gamma, double j23,
                                double u, const ControlThresholds& thresholds) {
    auto [j12, j34] = tunnelling_controls(moments, gamma, thresholds.collapse_current);
    ControlParams p;
    p.j12 = j12;
    p.j34 = j34;
    p.j23 = j23;
    p.u = u;
    if (gamma == 0.0) {
        // Hermitian limit: no transport demanded, the reservoirs decouple and
        // the onsite-energy system is trivially satisfied by zero.
        return p;
    }
    LinearSystemCoeffs coeffs = coefficient_assembly(moments, j12, j34, j23, u);
    auto [eps1, eps4] = onsite_controls(coeffs, thresholds.degeneracy_factor);
    p.eps1 = eps1;
    p.eps4 = eps4;
    return p;
}

ControlParams evaluate_controls_raw(const DensityMoments& moments, double gamma, double j23,
                                    double u) {
    ControlParams p;
    p.j23 = j23;
    p.u = u;
    if (gamma == 0.0) return p;
    const double jt12 = moments.current(0, 1);
    const double jt34 = moments.current(2, 3);
    const double j12 = 2.0 * gamma * moments.occupation(1) / jt12;
    const double j34 = 2.0 * gamma * moments.occupation(2) / jt34;
    p.j12 = j12;
    p.j34 = j34;
    LinearSystemCoeffs c;
    try {
        c = coefficient_assembly(moments, j12, j34, j23, u);
    } catch (const CollapseDetected&) {
        p.eps1 = std::numeric_limits<double>::quiet_NaN();
        p.eps4 = std::numeric_limits<double>::quiet_NaN();
        return p;
    }
    const OnsiteSolve s = solve_regularized(c);
    p.eps1 = s.eps1;
    p.eps4 = s.eps4;
    return p;
}

}  // namespace ptwell
