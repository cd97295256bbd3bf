#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ptwell/fock_basis.hpp"
#include "ptwell/hamiltonian.hpp"

namespace ptwell {

using Matrix = Eigen::MatrixXcd;

/// Single-particle matrix sigma_kl = <a^dag_k a_l> plus the two-particle
/// elements sigma_kkkl = <n_k a^dag_k a_l> and sigma_klll = <a^dag_k a_l n_l>
/// needed by the first-order hierarchy.
struct DensityMoments {
    Matrix sigma1;   // M x M, Hermitian
    Matrix s_kkkl;   // (k,l) entry holds sigma_{kkkl}
    Matrix s_klll;   // (k,l) entry holds sigma_{klll}

    int wells() const { return static_cast<int>(sigma1.rows()); }

    double occupation(int k) const { return sigma1(k, k).real(); }
    double current(int k, int l) const { return 2.0 * sigma1(k, l).imag(); }      // jtilde_kl
    double correlation(int k, int l) const { return 2.0 * sigma1(k, l).real(); }  // c_kl

    static DensityMoments compute(const ManyBodyState& state);
};

/// sigma_kl = <a^dag_k a_l>.
Matrix single_particle_matrix(const ManyBodyState& state);

/// sigma_klmn = <a^dag_k a_l a^dag_m a_n>, exact operator expectation.
Complex two_particle_element(const ManyBodyState& state, int k, int l, int m, int n);

/// Full rank-4 tensor, flattened as [((k*M + l)*M + m)*M + n]. Debug aid.
std::vector<Complex> two_particle_full(const ManyBodyState& state);

/// Scaled purity P = (M tr(rho^2) - 1)/(M - 1) of sigma1 restricted to the
/// given wells and normalized to unit trace.
double purity(const Matrix& sigma1, const std::vector<int>& wells_subset);

/// First-order observables at one instant.
struct DerivedFirstOrder {
    Eigen::VectorXd occupations;
    Eigen::MatrixXd currents;      // jtilde_kl = 2 Im sigma_kl
    Eigen::MatrixXd correlations;  // c_kl = 2 Re sigma_kl
    double purity2 = 0.0;          // inner wells
    double purity4 = 0.0;          // all wells
};

DerivedFirstOrder derive_first_order(const Matrix& sigma1);

/// Z_kl of the first-order hierarchy for the four-well chain: neighbour hop
/// terms plus the interaction closure through sigma_kkkl / sigma_klll.
/// Boundary rates J_01 and J_45 are zero.
Complex hierarchy_z(const DensityMoments& moments, const ControlParams& params, int k, int l);

/// Analytic d(sigma_kl)/dt: i d/dt sigma_kl = Z_kl - (eps_k - eps_l) sigma_kl.
Matrix bbgky_first_order_rhs(const DensityMoments& moments, const ControlParams& params);

}  // namespace ptwell
