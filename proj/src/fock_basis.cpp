#include "ptwell/fock_basis.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ptwell {

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

}  // namespace

std::string FockBasis::key(const int* occ, int wells) {
    std::string s;
    s.reserve(static_cast<std::size_t>(wells) * 3);
    for (int i = 0; i < wells; ++i) {
        s += std::to_string(occ[i]);
        s += ',';
    }
    return s;
}

FockBasis::FockBasis(int n_total, int wells, std::size_t max_dimension)
    : n_total_(n_total), wells_(wells) {
    if (n_total < 1) throw std::invalid_argument("n_total must be >= 1");
    if (wells < 2) throw std::invalid_argument("wells must be >= 2");

    dim_ = binomial(static_cast<std::size_t>(n_total + wells - 1),
                    static_cast<std::size_t>(n_total));
    if (dim_ > max_dimension) {
        throw CapacityError("Fock-space dimension " + std::to_string(dim_) +
                            " exceeds cap " + std::to_string(max_dimension));
    }

    occ_.reserve(dim_ * static_cast<std::size_t>(wells));
    std::vector<int> cur(static_cast<std::size_t>(wells), 0);
    // Lexicographic descending in n1, then n2, ...; the last well takes the rest.
    auto enumerate = [&](auto&& self, int well, int remaining) -> void {
        if (well == wells - 1) {
            cur[static_cast<std::size_t>(well)] = remaining;
            occ_.insert(occ_.end(), cur.begin(), cur.end());
            return;
        }
        for (int n = remaining; n >= 0; --n) {
            cur[static_cast<std::size_t>(well)] = n;
            self(self, well + 1, remaining - n);
        }
    };
    enumerate(enumerate, 0, n_total);

    index_.reserve(dim_ * 2);
    pair_count_.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        const int* o = occ_.data() + i * static_cast<std::size_t>(wells);
        index_.emplace(key(o, wells), i);
        double pc = 0.0;
        for (int w = 0; w < wells; ++w) pc += static_cast<double>(o[w]) * (o[w] - 1);
        pair_count_[i] = pc;
    }

    hops_.resize(static_cast<std::size_t>(wells) * wells);
    std::vector<int> img(static_cast<std::size_t>(wells));
    for (int k = 0; k < wells; ++k) {
        for (int l = 0; l < wells; ++l) {
            if (k == l) continue;
            auto& table = hops_[static_cast<std::size_t>(k) * wells + l];
            table.resize(dim_);
            for (std::size_t i = 0; i < dim_; ++i) {
                const int* o = occ_.data() + i * static_cast<std::size_t>(wells);
                if (o[l] == 0) {
                    table[i] = {-1, 0.0};
                    continue;
                }
                img.assign(o, o + wells);
                img[static_cast<std::size_t>(k)] += 1;
                img[static_cast<std::size_t>(l)] -= 1;
                auto it = index_.find(key(img.data(), wells));
                table[i] = {static_cast<std::int32_t>(it->second),
                            std::sqrt(static_cast<double>(o[k] + 1) * o[l])};
            }
        }
    }
}

std::size_t FockBasis::index_of(const std::vector<int>& occ) const {
    if (static_cast<int>(occ.size()) != wells_)
        throw std::invalid_argument("occupation tuple has wrong length");
    auto it = index_.find(key(occ.data(), wells_));
    if (it == index_.end())
        throw std::invalid_argument("occupation tuple not in basis");
    return it->second;
}

const std::vector<FockBasis::HopEntry>& FockBasis::hop_table(int k, int l) const {
    if (k == l || k < 0 || l < 0 || k >= wells_ || l >= wells_)
        throw std::invalid_argument("hop_table requires distinct valid well indices");
    return hops_[static_cast<std::size_t>(k) * wells_ + l];
}

std::string FockBasis::serialize() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < dim_; ++i) {
        for (int w = 0; w < wells_; ++w) {
            if (w) os << ',';
            os << occupation(i, w);
        }
        os << '\n';
    }
    return os.str();
}

std::shared_ptr<FockBasis> build_basis(int n_total, int wells, std::size_t max_dimension) {
    return std::make_shared<FockBasis>(n_total, wells, max_dimension);
}

ManyBodyState apply_hop(const ManyBodyState& state, int k, int l) {
    const auto& table = state.basis->hop_table(k, l);
    Vector out = Vector::Zero(state.amplitudes.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table[i].target >= 0)
            out[table[i].target] += table[i].factor * state.amplitudes[static_cast<long>(i)];
    }
    return {state.basis, std::move(out)};
}

ManyBodyState apply_number(const ManyBodyState& state, int k) {
    if (k < 0 || k >= state.basis->wells())
        throw std::invalid_argument("invalid well index");
    Vector out = state.amplitudes;
    for (std::size_t i = 0; i < state.basis->dimension(); ++i)
        out[static_cast<long>(i)] *= static_cast<double>(state.basis->occupation(i, k));
    return {state.basis, std::move(out)};
}

}  // namespace ptwell
