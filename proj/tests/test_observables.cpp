#include <doctest.h>

#include <random>

#include "ptwell/observables.hpp"
#include "ptwell/state_prep.hpp"
#include "oracle.hpp"

using namespace ptwell;

namespace {

ManyBodyState basis_state(const std::shared_ptr<FockBasis>& basis, const std::vector<int>& occ) {
    Vector amp = Vector::Zero(static_cast<long>(basis->dimension()));
    amp[static_cast<long>(basis->index_of(occ))] = 1.0;
    return {basis, std::move(amp)};
}

std::vector<Complex> random_mean_field(std::mt19937_64& rng, int n_total) {
    std::normal_distribution<double> g;
    std::vector<Complex> psi(4);
    double norm2 = 0.0;
    for (auto& p : psi) {
        p = Complex(g(rng), g(rng));
        norm2 += std::norm(p);
    }
    for (auto& p : psi) p *= std::sqrt(n_total / norm2);
    return psi;
}

}  // namespace

TEST_CASE("single-particle matrix of a Fock state is its occupation diagonal") {
    const auto basis = build_basis(2, 4);
    const Matrix sigma = single_particle_matrix(basis_state(basis, {0, 2, 0, 0}));
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
            const Complex want = (k == 1 && l == 1) ? Complex(2.0, 0.0) : Complex(0.0, 0.0);
            CHECK(std::abs(sigma(k, l) - want) < 1e-14);
        }
}

TEST_CASE("sigma_2222 of |0,2,0,0> is the squared occupation") {
    const auto basis = build_basis(2, 4);
    const auto psi = basis_state(basis, {0, 2, 0, 0});
    CHECK(std::abs(two_particle_element(psi, 1, 1, 1, 1) - Complex(4.0, 0.0)) < 1e-14);
}

TEST_CASE("coherence of a one-particle superposition") {
    const auto basis = build_basis(1, 4);
    Vector amp = Vector::Zero(static_cast<long>(basis->dimension()));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    amp[static_cast<long>(basis->index_of({1, 0, 0, 0}))] = inv_sqrt2;
    amp[static_cast<long>(basis->index_of({0, 1, 0, 0}))] = inv_sqrt2;
    const Matrix sigma = single_particle_matrix({basis, std::move(amp)});
    CHECK(std::abs(sigma(0, 1) - Complex(0.5, 0.0)) < 1e-14);
}

TEST_CASE("product-state first moments are mean-field coefficient products") {
    std::mt19937_64 rng(41);
    const int n_total = 6;
    const auto basis = build_basis(n_total, 4);
    const auto psi = random_mean_field(rng, n_total);
    const Matrix sigma = single_particle_matrix(product_state(psi, basis));
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
            CHECK(std::abs(sigma(k, l) - std::conj(psi[static_cast<std::size_t>(k)]) *
                                             psi[static_cast<std::size_t>(l)]) < 1e-10);
}

TEST_CASE("product-state second moments follow the closed form") {
    std::mt19937_64 rng(43);
    const int n_total = 5;
    const auto basis = build_basis(n_total, 4);
    const auto psi = random_mean_field(rng, n_total);
    std::vector<Complex> phi(4);  // unit-normalized single-particle coefficients
    for (int i = 0; i < 4; ++i)
        phi[static_cast<std::size_t>(i)] =
            psi[static_cast<std::size_t>(i)] / std::sqrt(static_cast<double>(n_total));
    const auto state = product_state(psi, basis);
    const double nd = n_total;
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
            for (int m = 0; m < 4; ++m)
                for (int n = 0; n < 4; ++n) {
                    const Complex got = two_particle_element(state, k, l, m, n);
                    Complex want = nd * (nd - 1.0) * std::conj(phi[k]) * phi[l] *
                                   std::conj(phi[m]) * phi[n];
                    if (l == m) want += nd * std::conj(phi[k]) * phi[n];
                    CHECK(std::abs(got - want) < 1e-10);
                }
}

TEST_CASE("second moments match the dense operator oracle") {
    std::mt19937_64 rng(47);
    const int n_total = 3;
    const auto basis = build_basis(n_total, 4);
    const oracle::TensorSpace space(n_total, 4);
    const auto psi = oracle::random_state(basis, rng);
    const oracle::DenseVec dense = space.embed(psi);
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
            for (int m = 0; m < 4; ++m)
                for (int n = 0; n < 4; ++n) {
                    const Complex got = two_particle_element(psi, k, l, m, n);
                    const Complex want =
                        dense.dot(space.adag_a(k, l) * (space.adag_a(m, n) * dense));
                    CHECK(std::abs(got - want) < 1e-12);
                }
}

TEST_CASE("two_particle_full agrees with the per-element path") {
    std::mt19937_64 rng(53);
    const auto basis = build_basis(2, 4);
    const auto psi = oracle::random_state(basis, rng);
    const auto full = two_particle_full(psi);
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
            for (int m = 0; m < 4; ++m)
                for (int n = 0; n < 4; ++n)
                    CHECK(std::abs(full[static_cast<std::size_t>(((k * 4 + l) * 4 + m) * 4 + n)] -
                                   two_particle_element(psi, k, l, m, n)) < 1e-13);
}

TEST_CASE("scaled purity of a 2x2 diagonal reduced matrix") {
    Matrix sigma = Matrix::Zero(4, 4);
    sigma(1, 1) = 0.75;
    sigma(2, 2) = 0.25;
    CHECK(purity(sigma, {1, 2}) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("product states have unit purity") {
    std::mt19937_64 rng(59);
    const int n_total = 6;
    const auto basis = build_basis(n_total, 4);
    const auto state = product_state(random_mean_field(rng, n_total), basis);
    const Matrix sigma = single_particle_matrix(state);
    CHECK(purity(sigma, {0, 1, 2, 3}) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(purity(sigma, {1, 2}) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("empty wells subset is rejected") {
    Matrix sigma = Matrix::Zero(4, 4);
    sigma(2, 2) = 1.0;
    sigma(3, 3) = 1.0;
    CHECK_THROWS_AS(purity(sigma, {0, 1}), EmptySubsetError);
    CHECK_THROWS_AS(purity(sigma, {2}), std::invalid_argument);
}

TEST_CASE("hierarchy diagonal is stationary on Fock states without coherence") {
    const auto basis = build_basis(3, 4);
    ControlParams p;
    p.j12 = 0.5;
    p.j34 = 0.5;
    const auto psi = basis_state(basis, {1, 1, 1, 0});
    const DensityMoments moments = DensityMoments::compute(psi);
    const Matrix rhs = bbgky_first_order_rhs(moments, p);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(rhs(k, k)) < 1e-14);
}

TEST_CASE("hierarchy right-hand side matches exact finite differences") {
    std::mt19937_64 rng(61);
    const int n_total = 3;
    const auto basis = build_basis(n_total, 4);
    const oracle::TensorSpace space(n_total, 4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 3; ++rep) {
        const auto psi = oracle::random_state(basis, rng);
        ControlParams p;
        p.j12 = u(rng);
        p.j34 = u(rng);
        p.eps1 = u(rng);
        p.eps4 = u(rng);
        p.j23 = u(rng);
        p.u = 0.5 * std::abs(u(rng));

        const oracle::DenseMat h = space.hamiltonian(p);
        const oracle::DenseVec dense = space.embed(psi);
        const double dt = 1e-4;
        ManyBodyState fwd(basis, space.extract(space.propagate(h, dense, dt), basis));
        ManyBodyState bwd(basis, space.extract(space.propagate(h, dense, -dt), basis));
        const Matrix diff =
            (single_particle_matrix(fwd) - single_particle_matrix(bwd)) / (2.0 * dt);
        const Matrix rhs = bbgky_first_order_rhs(DensityMoments::compute(psi), p);
        CHECK((diff - rhs).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("derived first-order observables are consistent projections") {
    std::mt19937_64 rng(67);
    const auto basis = build_basis(3, 4);
    const auto psi = oracle::random_state(basis, rng);
    const Matrix sigma = single_particle_matrix(psi);
    const DerivedFirstOrder d = derive_first_order(sigma);
    for (int k = 0; k < 4; ++k) {
        CHECK(d.occupations[k] == doctest::Approx(sigma(k, k).real()).epsilon(1e-14));
        for (int l = 0; l < 4; ++l) {
            CHECK(d.currents(k, l) == doctest::Approx(2.0 * sigma(k, l).imag()).epsilon(1e-14));
            CHECK(d.correlations(k, l) ==
                  doctest::Approx(2.0 * sigma(k, l).real()).epsilon(1e-14));
        }
    }
    CHECK(d.purity2 == doctest::Approx(purity(sigma, {1, 2})).epsilon(1e-14));
    CHECK(d.purity4 == doctest::Approx(purity(sigma, {0, 1, 2, 3})).epsilon(1e-14));
}
