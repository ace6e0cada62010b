// Copyright 2026 The Automaton Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "alab/dense.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "alab/error.hpp"
#include "alab/rng.hpp"

namespace alab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

constexpr std::uint64_t bit(Site s) { return std::uint64_t{1} << s; }

/// Inserts a zero bit at each position of `sorted_positions` (ascending).
template <std::size_t K>
inline std::uint64_t insert_zeros(std::uint64_t x, const std::array<Site, K>& sorted_positions) {
    for (Site p : sorted_positions) {
        const std::uint64_t low = x & (bit(p) - 1);
        x = ((x >> p) << (p + 1)) | low;
    }
    return x;
}

template <std::size_t K>
std::array<Site, K> sorted(std::array<Site, K> a) {
    std::sort(a.begin(), a.end());
    return a;
}

void check_capacity(std::size_t n, std::size_t cap) {
    if (n > cap) {
        const double gib = std::ldexp(16.0, static_cast<int>(std::min<std::size_t>(n, 1000))) / (1 << 30);
        throw CapacityError(fmt::format("dense state for N={} needs {:.3g} GiB (cap N={})", n, gib, cap));
    }
}

}  // namespace

StateVector::StateVector(std::size_t n_sites, std::size_t cap) : n_(n_sites) {
    check_capacity(n_sites, cap);
    amps_.assign(std::size_t{1} << n_sites, Amp{0.0, 0.0});
    amps_[0] = 1.0;
}

StateVector StateVector::from_product(const ProductState& s, std::size_t cap) {
    check_capacity(s.n_sites(), cap);
    StateVector v;
    v.n_ = s.n_sites();
    v.amps_.assign(std::size_t{1} << v.n_, Amp{0.0, 0.0});
    v.amps_[0] = 1.0;
    // Build the tensor product site by site.
    for (std::size_t i = 0; i < v.n_; ++i) {
        const auto& [a, b] = s.site(i);
        const std::size_t half = std::size_t{1} << i;
        for (std::size_t x = 0; x < half; ++x) {
            v.amps_[x | half] = v.amps_[x] * b;
            v.amps_[x] *= a;
        }
    }
    return v;
}

StateVector StateVector::from_amplitudes(std::vector<Amp> amps, std::size_t cap) {
    if (amps.empty() || !std::has_single_bit(amps.size())) {
        throw InvalidArgument("amplitude vector length must be a power of two");
    }
    StateVector v;
    v.n_ = static_cast<std::size_t>(std::countr_zero(amps.size()));
    check_capacity(v.n_, cap);
    v.amps_ = std::move(amps);
    return v;
}

void StateVector::apply_gate(const Gate& g) {
    const std::size_t d = amps_.size();
    for (Site s : gate_sites(g)) {
        if (s >= n_) throw InvalidArgument(fmt::format("gate site {} out of range", s));
    }
    std::visit(Overloaded{
                   [&](const CNot& x) {
                       const auto pos = sorted(std::array<Site, 2>{x.control, x.target});
                       for (std::uint64_t k = 0; k < d / 4; ++k) {
                           const std::uint64_t i0 = insert_zeros(k, pos) | bit(x.control);
                           std::swap(amps_[i0], amps_[i0 | bit(x.target)]);
                       }
                   },
                   [&](const Swap& x) {
                       const auto pos = sorted(std::array<Site, 2>{x.a, x.b});
                       for (std::uint64_t k = 0; k < d / 4; ++k) {
                           const std::uint64_t base = insert_zeros(k, pos);
                           std::swap(amps_[base | bit(x.a)], amps_[base | bit(x.b)]);
                       }
                   },
                   [&](const RzPair& x) {
                       std::array<Amp, 4> ph;
                       for (int ba = 0; ba < 2; ++ba) {
                           for (int bb = 0; bb < 2; ++bb) {
                               ph[ba | (bb << 1)] =
                                   std::polar(1.0, x.angle_a * (1 - 2 * ba) + x.angle_b * (1 - 2 * bb));
                           }
                       }
                       for (std::uint64_t i = 0; i < d; ++i) {
                           amps_[i] *= ph[((i >> x.a) & 1U) | (((i >> x.b) & 1U) << 1)];
                       }
                   },
                   [&](const CCNotPhase& x) {
                       const auto pos = sorted(std::array<Site, 3>{x.c1, x.c2, x.target});
                       const Amp e = std::polar(1.0, x.angle);
                       for (std::uint64_t k = 0; k < d / 8; ++k) {
                           const std::uint64_t i0 = insert_zeros(k, pos) | bit(x.c1) | bit(x.c2);
                           const std::uint64_t i1 = i0 | bit(x.target);
                           const Amp a0 = amps_[i0];
                           amps_[i0] = e * amps_[i1];
                           amps_[i1] = e * a0;
                       }
                   },
                   [&](const Hadamard& x) {
                       const double h = 1.0 / std::numbers::sqrt2;
                       const std::array<Site, 1> pos{x.site};
                       for (std::uint64_t k = 0; k < d / 2; ++k) {
                           const std::uint64_t i0 = insert_zeros(k, pos);
                           const std::uint64_t i1 = i0 | bit(x.site);
                           const Amp a0 = amps_[i0], a1 = amps_[i1];
                           amps_[i0] = h * (a0 + a1);
                           amps_[i1] = h * (a0 - a1);
                       }
                   },
               },
               g);
}

void StateVector::check_circuit(const Circuit& c) const {
    if (c.n_sites() != n_) {
        throw InvalidArgument(fmt::format("circuit has {} sites, state has {}", c.n_sites(), n_));
    }
}

void StateVector::apply_circuit(const Circuit& c) {
    check_circuit(c);
    for (const Layer& layer : c.layers()) {
        for (const Gate& g : layer) apply_gate(g);
    }
}

void StateVector::apply_inverse(const Circuit& c) {
    check_circuit(c);
    for (auto it = c.layers().rbegin(); it != c.layers().rend(); ++it) {
        for (const Gate& g : *it) apply_gate(inverse(g));
    }
}

void StateVector::apply_x(Site s) {
    if (s >= n_) throw InvalidArgument(fmt::format("site {} out of range", s));
    const std::array<Site, 1> pos{s};
    for (std::uint64_t k = 0; k < amps_.size() / 2; ++k) {
        const std::uint64_t i0 = insert_zeros(k, pos);
        std::swap(amps_[i0], amps_[i0 | bit(s)]);
    }
}

void StateVector::apply_hadamard_all() {
    const std::size_t d = amps_.size();
    for (std::size_t h = 1; h < d; h <<= 1) {
        for (std::size_t i = 0; i < d; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                const Amp a = amps_[j], b = amps_[j + h];
                amps_[j] = a + b;
                amps_[j + h] = a - b;
            }
        }
    }
    const double scale = std::ldexp(1.0, -static_cast<int>(n_) / 2) * ((n_ % 2) ? 1.0 / std::numbers::sqrt2 : 1.0);
    for (auto& a : amps_) a *= scale;
}

double StateVector::norm_squared() const noexcept {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
}

StateVector::Amp StateVector::inner(const StateVector& other) const {
    if (other.n_ != n_) throw InvalidArgument("inner product of states with different sizes");
    Amp s{0.0, 0.0};
    for (std::size_t i = 0; i < amps_.size(); ++i) s += std::conj(amps_[i]) * other.amps_[i];
    return s;
}

StateVector apply_circuit(StateVector s, const Circuit& c) {
    s.apply_circuit(c);
    return s;
}

std::complex<double> expectation(const StateVector& s, const HeisenbergWord& w) {
    for (const auto& a : w.actions) {
        if (const auto* x = std::get_if<FlipX>(&a); x && x->site >= s.n_sites()) {
            throw InvalidArgument(fmt::format("flip site {} out of range", x->site));
        }
    }
    StateVector v = s;
    for (const auto& a : w.actions) {
        std::visit(Overloaded{
                       [&](const Forward& f) { v.apply_circuit(*f.circuit); },
                       [&](const Backward& b) { v.apply_inverse(*b.circuit); },
                       [&](const FlipX& x) { v.apply_x(x.site); },
                   },
                   a);
    }
    return s.inner(v);
}

std::complex<double> expectation(const StateVector& s, const PauliString& p) {
    StateVector v = s;
    auto amps = v.amps();
    for (const auto& [site, op] : p.ops) {
        if (site >= s.n_sites()) throw InvalidArgument(fmt::format("Pauli site {} out of range", site));
        switch (op) {
            case 'I':
                break;
            case 'X':
                v.apply_x(site);
                break;
            case 'Z':
                for (std::uint64_t i = 0; i < amps.size(); ++i) {
                    if ((i >> site) & 1U) amps[i] = -amps[i];
                }
                break;
            case 'Y':
                // Y = i X Z
                for (std::uint64_t i = 0; i < amps.size(); ++i) {
                    if ((i >> site) & 1U) amps[i] = -amps[i];
                }
                v.apply_x(site);
                for (auto& a : amps) a *= std::complex<double>{0.0, 1.0};
                break;
            default:
                throw InvalidArgument(fmt::format("unknown Pauli '{}'", op));
        }
    }
    return s.inner(v);
}

SchmidtSpectrum schmidt(const StateVector& s, std::span<const Site> subset) {
    const std::size_t n = s.n_sites();
    std::vector<bool> in_a(n, false);
    for (Site x : subset) {
        if (x >= n) throw InvalidArgument(fmt::format("subset site {} out of range", x));
        if (in_a[x]) throw InvalidArgument(fmt::format("subset site {} repeated", x));
        in_a[x] = true;
    }
    const std::size_t na = subset.size();
    if (na == 0 || na >= n) throw InvalidArgument("bipartition subset must be non-empty and proper");

    std::vector<Site> sites_a, sites_b;
    for (Site x = 0; x < n; ++x) (in_a[x] ? sites_a : sites_b).push_back(x);

    // Per-byte lookup tables for the (a, b) index split.
    const std::size_t chunks = (n + 7) / 8;
    std::vector<std::array<std::uint32_t, 256>> ta(chunks), tb(chunks);
    std::vector<std::uint32_t> pos_in_a(n), pos_in_b(n);
    for (std::size_t j = 0; j < sites_a.size(); ++j) pos_in_a[sites_a[j]] = static_cast<std::uint32_t>(j);
    for (std::size_t j = 0; j < sites_b.size(); ++j) pos_in_b[sites_b[j]] = static_cast<std::uint32_t>(j);
    for (std::size_t c = 0; c < chunks; ++c) {
        for (std::uint32_t byte = 0; byte < 256; ++byte) {
            std::uint32_t ia = 0, ib = 0;
            for (std::size_t k = 0; k < 8; ++k) {
                const std::size_t site = 8 * c + k;
                if (site >= n || !((byte >> k) & 1U)) continue;
                if (in_a[site]) {
                    ia |= 1U << pos_in_a[site];
                } else {
                    ib |= 1U << pos_in_b[site];
                }
            }
            ta[c][byte] = ia;
            tb[c][byte] = ib;
        }
    }

    const std::size_t da = std::size_t{1} << na;
    const std::size_t db = std::size_t{1} << (n - na);
    Eigen::MatrixXcd m(da, db);
    const auto amps = s.amps();
    for (std::uint64_t idx = 0; idx < amps.size(); ++idx) {
        std::uint32_t ia = 0, ib = 0;
        for (std::size_t c = 0; c < chunks; ++c) {
            const auto byte = static_cast<std::uint8_t>(idx >> (8 * c));
            ia |= ta[c][byte];
            ib |= tb[c][byte];
        }
        m(ia, ib) = amps[idx];
    }

    const std::size_t dsmall = std::min(da, db);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dsmall, dsmall);
    if (da <= db) {
        rho.selfadjointView<Eigen::Lower>().rankUpdate(m);
    } else {
        rho.selfadjointView<Eigen::Lower>().rankUpdate(m.adjoint());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);

    SchmidtSpectrum sp;
    sp.subset.assign(subset.begin(), subset.end());
    sp.values.assign(da - dsmall, 0.0);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double v = es.eigenvalues()[i];
        sp.values.push_back(v < 1e-14 ? 0.0 : v);
    }
    std::sort(sp.values.begin(), sp.values.end());
    return sp;
}

std::vector<Site> half_cut(std::size_t n_sites) {
    std::vector<Site> a(n_sites / 2);
    std::iota(a.begin(), a.end(), Site{0});
    return a;
}

std::vector<double> exact_distribution(const StateVector& s, MeasureBasis basis) {
    std::vector<double> p(s.dim());
    if (basis == MeasureBasis::X) {
        StateVector v = s;
        v.apply_hadamard_all();
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(v[i]);
    } else {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(s[i]);
    }
    return p;
}

std::vector<std::uint64_t> sample_bitstrings(const StateVector& s, MeasureBasis basis, std::size_t n,
                                             std::uint64_t seed) {
    const auto p = exact_distribution(s, basis);
    std::vector<double> cdf(p.size());
    std::partial_sum(p.begin(), p.end(), cdf.begin());
    const double total = cdf.back();
    Rng rng(seed);
    std::vector<std::uint64_t> out(n);
    for (auto& x : out) {
        const double u = uniform01(rng) * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        x = static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(p.size()) - 1));
    }
    return out;
}

}  // namespace alab
