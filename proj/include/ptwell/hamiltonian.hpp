#pragma once

#include "ptwell/fock_basis.hpp"

namespace ptwell {

/// Control parameters of the four-well chain. j12, j34, eps1, eps4 are the
/// feedback-controlled quantities; j23 and u are fixed for a run and
/// eps2 = eps3 = 0 throughout.
struct ControlParams {
    double j12 = 0.0;
    double j34 = 0.0;
    double eps1 = 0.0;
    double eps4 = 0.0;
    double j23 = 1.0;
    double u = 0.0;

    bool finite() const;

    /// Symmetric tunnelling rate between wells k and l (0-based, |k-l| = 1);
    /// zero for non-neighbours and chain boundaries.
    double hop_rate(int k, int l) const;

    /// Onsite energy of well k (0-based).
    double onsite(int k) const;
};

/// H |psi> for the four-well Bose-Hubbard chain,
///   H = -sum_<m,m'> J_mm' a^dag_m a_m' + (u/2) sum_m n_m (n_m - 1)
///       + sum_m eps_m n_m.
ManyBodyState apply_hamiltonian(const ManyBodyState& state, const ControlParams& params);

/// <psi|H|psi>; asserts the imaginary part is negligible.
double expectation(const ManyBodyState& state, const ControlParams& params);

}  // namespace ptwell
