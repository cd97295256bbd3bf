#include "ptwell/observables.hpp"

#include <cmath>

#include "ptwell/errors.hpp"

namespace ptwell {

namespace {

// <psi| a^dag_k a_l |psi> in one pass over the hop table.
Complex hop_expectation(const ManyBodyState& state, int k, int l) {
    const Vector& amp = state.amplitudes;
    if (k == l) {
        double v = 0.0;
        for (std::size_t i = 0; i < state.basis->dimension(); ++i)
            v += std::norm(amp[static_cast<long>(i)]) * state.basis->occupation(i, k);
        return {v, 0.0};
    }
    const auto& table = state.basis->hop_table(k, l);
    Complex v = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table[i].target >= 0)
            v += std::conj(amp[table[i].target]) * table[i].factor * amp[static_cast<long>(i)];
    }
    return v;
}

// <psi| a^dag_k a_l |phi> where phi is a raw operator image.
Complex hop_matrix_element(const ManyBodyState& bra, const ManyBodyState& ket, int k, int l) {
    const Vector& b = bra.amplitudes;
    const Vector& a = ket.amplitudes;
    if (k == l) {
        Complex v = 0.0;
        for (std::size_t i = 0; i < bra.basis->dimension(); ++i)
            v += std::conj(b[static_cast<long>(i)]) *
                 static_cast<double>(bra.basis->occupation(i, k)) * a[static_cast<long>(i)];
        return v;
    }
    const auto& table = bra.basis->hop_table(k, l);
    Complex v = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table[i].target >= 0)
            v += std::conj(b[table[i].target]) * table[i].factor * a[static_cast<long>(i)];
    }
    return v;
}

}  // namespace

Matrix single_particle_matrix(const ManyBodyState& state) {
    const int wells = state.basis->wells();
    Matrix sigma(wells, wells);
    for (int k = 0; k < wells; ++k) {
        sigma(k, k) = hop_expectation(state, k, k);
        for (int l = k + 1; l < wells; ++l) {
            const Complex v = hop_expectation(state, k, l);
            sigma(k, l) = v;
            sigma(l, k) = std::conj(v);
        }
    }
    return sigma;
}

Complex two_particle_element(const ManyBodyState& state, int k, int l, int m, int n) {
    // Apply a^dag_m a_n, then close with a^dag_k a_l against the bra.
    ManyBodyState inner = (m == n) ? apply_number(state, m) : apply_hop(state, m, n);
    return hop_matrix_element(state, inner, k, l);
}

std::vector<Complex> two_particle_full(const ManyBodyState& state) {
    const int wells = state.basis->wells();
    std::vector<Complex> out(static_cast<std::size_t>(wells) * wells * wells * wells);
    for (int m = 0; m < wells; ++m)
        for (int n = 0; n < wells; ++n) {
            ManyBodyState inner = (m == n) ? apply_number(state, m) : apply_hop(state, m, n);
            for (int k = 0; k < wells; ++k)
                for (int l = 0; l < wells; ++l)
                    out[static_cast<std::size_t>(((k * wells + l) * wells + m) * wells + n)] =
                        hop_matrix_element(state, inner, k, l);
        }
    return out;
}

DensityMoments DensityMoments::compute(const ManyBodyState& state) {
    const int wells = state.basis->wells();
    const long dim = static_cast<long>(state.basis->dimension());
    const Vector& psi = state.amplitudes;

    // Build the operator images n_k|psi> and a^dag_k a_l|psi> once; every
    // moment below is an inner product between two of them. This is called
    // inside each integrator stage, so the fused passes matter.
    Matrix number(dim, wells);
    for (int k = 0; k < wells; ++k)
        for (long i = 0; i < dim; ++i)
            number(i, k) =
                static_cast<double>(state.basis->occupation(static_cast<std::size_t>(i), k)) *
                psi[i];
    Matrix hop(dim, wells * wells);
    for (int k = 0; k < wells; ++k)
        for (int l = 0; l < wells; ++l) {
            if (k == l) continue;
            auto col = hop.col(k * wells + l);
            col.setZero();
            const auto& table = state.basis->hop_table(k, l);
            for (std::size_t i = 0; i < table.size(); ++i)
                if (table[i].target >= 0)
                    col[table[i].target] += table[i].factor * psi[static_cast<long>(i)];
        }
    auto image = [&](int k, int l) -> Eigen::Ref<const Vector> {
        return (k == l) ? number.col(k) : hop.col(k * wells + l);
    };

    DensityMoments m;
    m.sigma1 = Matrix(wells, wells);
    m.s_kkkl = Matrix(wells, wells);
    m.s_klll = Matrix(wells, wells);
    for (int k = 0; k < wells; ++k) {
        m.sigma1(k, k) = Complex(psi.dot(number.col(k)).real(), 0.0);
        for (int l = k + 1; l < wells; ++l) {
            const Complex v = psi.dot(image(k, l));
            m.sigma1(k, l) = v;
            m.sigma1(l, k) = std::conj(v);
        }
    }
    for (int k = 0; k < wells; ++k)
        for (int l = 0; l < wells; ++l) {
            m.s_kkkl(k, l) = number.col(k).dot(image(k, l));
            m.s_klll(k, l) = (k == l) ? m.s_kkkl(k, l) : image(l, k).dot(number.col(l));
        }
    return m;
}

double purity(const Matrix& sigma1, const std::vector<int>& wells_subset) {
    const int m = static_cast<int>(wells_subset.size());
    if (m < 2) throw std::invalid_argument("purity needs at least two wells");
    Matrix red(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            red(a, b) = sigma1(wells_subset[static_cast<std::size_t>(a)],
                               wells_subset[static_cast<std::size_t>(b)]);
    const double tr = red.trace().real();
    if (std::abs(tr) < 1e-14)
        throw EmptySubsetError("zero trace on wells subset");
    red /= tr;
    const double tr2 = (red * red).trace().real();
    return (m * tr2 - 1.0) / (m - 1.0);
}

DerivedFirstOrder derive_first_order(const Matrix& sigma1) {
    const int wells = static_cast<int>(sigma1.rows());
    DerivedFirstOrder d;
    d.occupations = sigma1.diagonal().real();
    d.currents = 2.0 * sigma1.imag();
    d.correlations = 2.0 * sigma1.real();
    if (wells == 4) {
        d.purity2 = purity(sigma1, {1, 2});
        d.purity4 = purity(sigma1, {0, 1, 2, 3});
    }
    return d;
}

Complex hierarchy_z(const DensityMoments& moments, const ControlParams& params, int k, int l) {
    const Matrix& s = moments.sigma1;
    const int wells = moments.wells();
    Complex z = 0.0;
    if (k - 1 >= 0) z += params.hop_rate(k - 1, k) * s(k - 1, l);
    if (k + 1 < wells) z += params.hop_rate(k + 1, k) * s(k + 1, l);
    if (l - 1 >= 0) z -= params.hop_rate(l, l - 1) * s(k, l - 1);
    if (l + 1 < wells) z -= params.hop_rate(l, l + 1) * s(k, l + 1);
    // Uniform interaction on all sites.
    z -= params.u * (moments.s_kkkl(k, l) - s(k, l));
    z += params.u * (moments.s_klll(k, l) - s(k, l));
    return z;
}

Matrix bbgky_first_order_rhs(const DensityMoments& moments, const ControlParams& params) {
    const int wells = moments.wells();
    Matrix rhs(wells, wells);
    const Complex minus_i(0.0, -1.0);
    for (int k = 0; k < wells; ++k)
        for (int l = 0; l < wells; ++l) {
            const Complex z = hierarchy_z(moments, params, k, l);
            const double deps = params.onsite(k) - params.onsite(l);
            rhs(k, l) = minus_i * (z - deps * moments.sigma1(k, l));
        }
    return rhs;
}

}  // namespace ptwell
