#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ptwell/errors.hpp"

namespace ptwell {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;

/// Occupation-number basis for n_total bosons in `wells` sites.
///
/// States are enumerated lexicographically descending in n1, then n2, ...
/// so indices are reproducible across runs. The basis also carries
/// precomputed hop tables: for every ordered pair (k, l), k != l, the image
/// index and matrix element of a^dag_k a_l acting on each basis state.
class FockBasis {
public:
    /// One entry of a hop table. target < 0 when a_l annihilates the state.
    struct HopEntry {
        std::int32_t target;
        double factor;  // sqrt((n_k + 1) * n_l)
    };

    FockBasis(int n_total, int wells, std::size_t max_dimension = kDefaultMaxDimension);

    int n_total() const { return n_total_; }
    int wells() const { return wells_; }
    std::size_t dimension() const { return dim_; }

    /// Occupation of well k (0-based) in basis state i.
    int occupation(std::size_t i, int k) const { return occ_[i * wells_ + k]; }

    std::vector<int> state(std::size_t i) const {
        return {occ_.begin() + static_cast<long>(i) * wells_,
                occ_.begin() + static_cast<long>(i + 1) * wells_};
    }

    /// Dense index of an occupation tuple; throws if the tuple is not in the basis.
    std::size_t index_of(const std::vector<int>& occ) const;

    /// Hop table for a^dag_k a_l (0-based wells, k != l).
    const std::vector<HopEntry>& hop_table(int k, int l) const;

    /// Sum_i n_i (n_i - 1) for basis state i; the interaction diagonal.
    double pair_count(std::size_t i) const { return pair_count_[i]; }

    /// Stable textual serialization of the enumeration, used by golden tests.
    std::string serialize() const;

    static constexpr std::size_t kDefaultMaxDimension = 5'000'000;

private:
    int n_total_;
    int wells_;
    std::size_t dim_;
    std::vector<int> occ_;          // dim x wells, row major
    std::vector<double> pair_count_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<HopEntry>> hops_;  // wells*wells tables, k*wells+l

    static std::string key(const int* occ, int wells);
};

std::shared_ptr<FockBasis> build_basis(int n_total, int wells,
                                       std::size_t max_dimension = FockBasis::kDefaultMaxDimension);

/// Many-body amplitude vector over a Fock basis.
struct ManyBodyState {
    std::shared_ptr<const FockBasis> basis;
    Vector amplitudes;

    ManyBodyState() = default;
    ManyBodyState(std::shared_ptr<const FockBasis> b, Vector a)
        : basis(std::move(b)), amplitudes(std::move(a)) {}

    double norm() const { return amplitudes.norm(); }
    void normalize() { amplitudes /= amplitudes.norm(); }
};

/// Raw action of a^dag_k a_l (no renormalization).
ManyBodyState apply_hop(const ManyBodyState& state, int k, int l);

/// Raw action of the number operator n_k.
ManyBodyState apply_number(const ManyBodyState& state, int k);

}  // namespace ptwell
