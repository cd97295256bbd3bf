#include "ptwell/hamiltonian.hpp"

#include <cmath>

#include "ptwell/errors.hpp"

namespace ptwell {

bool ControlParams::finite() const {
    return std::isfinite(j12) && std::isfinite(j34) && std::isfinite(eps1) &&
           std::isfinite(eps4) && std::isfinite(j23) && std::isfinite(u);
}

double ControlParams::hop_rate(int k, int l) const {
    if (k > l) std::swap(k, l);
    if (l != k + 1) return 0.0;
    switch (k) {
        case 0: return j12;
        case 1: return j23;
        case 2: return j34;
        default: return 0.0;  // chain boundary
    }
}

double ControlParams::onsite(int k) const {
    if (k == 0) return eps1;
    if (k == 3) return eps4;
    return 0.0;
}

ManyBodyState apply_hamiltonian(const ManyBodyState& state, const ControlParams& params) {
    if (!params.finite())
        throw ControlDivergedError("non-finite control parameters");
    const FockBasis& basis = *state.basis;
    const int wells = basis.wells();
    const std::size_t dim = basis.dimension();
    const Vector& in = state.amplitudes;
    Vector out(static_cast<long>(dim));

    // Diagonal part: interaction + onsite energies.
    for (std::size_t i = 0; i < dim; ++i) {
        double diag = 0.5 * params.u * basis.pair_count(i);
        for (int w = 0; w < wells; ++w) {
            const double eps = params.onsite(w);
            if (eps != 0.0) diag += eps * basis.occupation(i, w);
        }
        out[static_cast<long>(i)] = diag * in[static_cast<long>(i)];
    }

    // Hopping: both directions of each nearest-neighbour pair, J symmetric.
    for (int k = 0; k + 1 < wells; ++k) {
        const double rate = params.hop_rate(k, k + 1);
        if (rate == 0.0) continue;
        const auto& fwd = basis.hop_table(k, k + 1);
        const auto& bwd = basis.hop_table(k + 1, k);
        for (std::size_t i = 0; i < dim; ++i) {
            if (fwd[i].target >= 0)
                out[fwd[i].target] -= rate * fwd[i].factor * in[static_cast<long>(i)];
            if (bwd[i].target >= 0)
                out[bwd[i].target] -= rate * bwd[i].factor * in[static_cast<long>(i)];
        }
    }
    return {state.basis, std::move(out)};
}

double expectation(const ManyBodyState& state, const ControlParams& params) {
    ManyBodyState h_psi = apply_hamiltonian(state, params);
    const Complex value = state.amplitudes.dot(h_psi.amplitudes);
    if (std::abs(value.imag()) > 1e-10)
        throw ControlDivergedError("energy expectation has non-negligible imaginary part");
    return value.real();
}

}  // namespace ptwell
