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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "alab/dense.hpp"
#include "alab/error.hpp"
#include "alab/metrics.hpp"
#include "alab/otoc.hpp"

using namespace alab;

namespace {

Circuit random_circuit(std::size_t n, std::size_t depth, std::uint64_t seed, GateSet set = GateSet::Automaton) {
    EnsembleSpec s;
    s.n_sites = n;
    s.depth = depth;
    s.master_seed = seed;
    s.gate_set = set;
    return build_brickwork(s);
}

StateVector random_state(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> g;
    std::vector<std::complex<double>> a(std::size_t{1} << n);
    double norm = 0;
    for (auto& x : a) {
        x = {g(rng), g(rng)};
        norm += std::norm(x);
    }
    for (auto& x : a) x /= std::sqrt(norm);
    return StateVector::from_amplitudes(std::move(a));
}

}  // namespace

TEST(StateVector, CapacityAndShape) {
    EXPECT_THROW(StateVector(23), CapacityError);
    EXPECT_THROW(StateVector(12, 10), CapacityError);
    StateVector s(3);
    EXPECT_EQ(s.dim(), 8u);
    EXPECT_EQ(s[0], std::complex<double>(1.0, 0.0));
    EXPECT_THROW(StateVector::from_amplitudes(std::vector<std::complex<double>>(6)), InvalidArgument);
}

TEST(StateVector, IdentityCircuit) {
    const auto s = random_state(6, 1);
    const auto t = apply_circuit(s, Circuit(6));
    for (std::uint64_t x = 0; x < s.dim(); ++x) EXPECT_EQ(s[x], t[x]);
}

TEST(StateVector, BasisStateStaysBasisState) {
    const Circuit c = random_circuit(10, 40, 2);
    StateVector s(10);
    s.apply_circuit(c);
    int nonzero = 0;
    for (auto a : s.amps()) {
        if (std::abs(a) > 1e-12) {
            ++nonzero;
            EXPECT_NEAR(std::abs(a), 1.0, 1e-12);
        }
    }
    EXPECT_EQ(nonzero, 1);
}

TEST(StateVector, NormPreservedLayerByLayer) {
    auto s = random_state(10, 3);
    const Circuit c = random_circuit(10, 30, 4, GateSet::Clifford);
    for (const auto& layer : c.layers()) {
        for (const auto& g : layer) s.apply_gate(g);
        EXPECT_NEAR(s.norm_squared(), 1.0, 1e-10);
    }
}

TEST(StateVector, GateMatrices) {
    // H on |0> then CNOT(0 -> 1) gives a Bell pair
    StateVector s(2);
    s.apply_gate(Hadamard{0});
    s.apply_gate(CNot{0, 1});
    EXPECT_NEAR(s[0].real(), std::numbers::sqrt2 / 2, 1e-15);
    EXPECT_NEAR(s[3].real(), std::numbers::sqrt2 / 2, 1e-15);
    EXPECT_NEAR(std::abs(s[1]) + std::abs(s[2]), 0.0, 1e-15);

    StateVector r(2);
    r.apply_gate(RzPair{0, 0.3, 1, 0.5});
    EXPECT_NEAR(std::arg(r[0]), 0.8, 1e-15);

    StateVector cc = StateVector::from_amplitudes({0, 0, 0, 1, 0, 0, 0, 0});
    cc.apply_gate(CCNotPhase{0, 1, 2, 0.6});
    EXPECT_NEAR(std::abs(cc[7] - std::polar(1.0, 0.6)), 0.0, 1e-15);
}

TEST(StateVector, InverseUndoes) {
    const auto s = random_state(8, 5);
    auto t = s;
    const Circuit c = random_circuit(8, 20, 6, GateSet::Clifford);
    t.apply_circuit(c);
    t.apply_inverse(c);
    EXPECT_NEAR(std::abs(t.inner(s)), 1.0, 1e-12);
}

TEST(StateVector, WalshHadamardMatchesGates) {
    const auto s = random_state(7, 8);
    auto a = s, b = s;
    a.apply_hadamard_all();
    for (Site i = 0; i < 7; ++i) b.apply_gate(Hadamard{i});
    for (std::uint64_t x = 0; x < s.dim(); ++x) EXPECT_NEAR(std::abs(a[x] - b[x]), 0.0, 1e-13);
}

TEST(Expectation, Examples) {
    const std::vector<int> signs{1, -1, 1, 1, -1};
    const auto sv = StateVector::from_product(ProductState::x_basis(signs));
    EXPECT_NEAR(std::abs(expectation(sv, HeisenbergWord{}) - 1.0), 0.0, 1e-14);
    for (Site i = 0; i < 5; ++i) {
        EXPECT_NEAR(expectation(sv, PauliString{{{i, 'X'}}}).real(), signs[i], 1e-14);
        EXPECT_NEAR(expectation(sv, HeisenbergWord{{FlipX{i}}}).real(), signs[i], 1e-14);
    }
    auto empty = std::make_shared<const Circuit>(Circuit(5));
    const auto w = compile(parse_spec("~X3 X0 ~X3 X0"), empty);
    EXPECT_NEAR(std::abs(expectation(sv, w) - 1.0), 0.0, 1e-14);

    const auto z = StateVector::from_product(ProductState::basis(3, 0b101));
    EXPECT_NEAR(expectation(z, PauliString{{{0, 'Z'}, {1, 'Z'}}}).real(), -1.0, 1e-15);
    EXPECT_NEAR(std::abs(expectation(z, PauliString{{{2, 'Y'}}})), 0.0, 1e-15);
}

TEST(Expectation, CompiledWordEqualsOperatorProduct) {
    const Circuit c = random_circuit(10, 12, 9);
    auto cp = std::make_shared<const Circuit>(c);
    Rng rng(4);
    const auto psi = StateVector::from_product(ProductState::haar_random(10, rng));
    const auto spec = parse_spec("~X5 X1 ~X5 X0 ~X5 X1 ~X5 X0");
    // direct: apply factors right to left, each conjugated one as U^dagger X U
    auto v = psi;
    for (auto f = spec.factors.rbegin(); f != spec.factors.rend(); ++f) {
        if (f->conjugated) {
            v.apply_circuit(c);
            v.apply_x(f->site);
            v.apply_inverse(c);
        } else {
            v.apply_x(f->site);
        }
    }
    const auto direct = psi.inner(v);
    EXPECT_NEAR(std::abs(expectation(psi, compile(spec, cp)) - direct), 0.0, 1e-12);
}

TEST(Schmidt, Examples) {
    const auto prod = StateVector::from_product(ProductState::all_plus(6));
    const std::vector<Site> a{0, 3, 4};
    const auto sp = schmidt(prod, a);
    ASSERT_EQ(sp.values.size(), 8u);
    EXPECT_NEAR(sp.values.back(), 1.0, 1e-12);
    EXPECT_NEAR(std::accumulate(sp.values.begin(), sp.values.end() - 1, 0.0), 0.0, 1e-12);

    StateVector bell(2);
    bell.apply_gate(Hadamard{0});
    bell.apply_gate(CNot{0, 1});
    const std::vector<Site> first{0};
    const auto b = schmidt(bell, first);
    ASSERT_EQ(b.values.size(), 2u);
    EXPECT_NEAR(b.values[0], 0.5, 1e-12);
    EXPECT_NEAR(b.values[1], 0.5, 1e-12);

    const std::vector<Site> none{}, all{0, 1};
    EXPECT_THROW(schmidt(bell, none), InvalidArgument);
    EXPECT_THROW(schmidt(bell, all), InvalidArgument);
}

TEST(Schmidt, TraceAndComplementSymmetry) {
    Rng rng(12);
    for (std::uint64_t k = 0; k < 100; ++k) {
        const std::size_t n = 4 + k % 7;
        const auto s = random_state(n, k + 40);
        std::vector<Site> a, b;
        for (Site i = 0; i < n; ++i) (rng() & 1U ? a : b).push_back(i);
        if (a.empty() || b.empty()) continue;
        const auto sa = schmidt(s, a), sb = schmidt(s, b);
        EXPECT_NEAR(std::accumulate(sa.values.begin(), sa.values.end(), 0.0), 1.0, 1e-9);
        for (double v : sa.values) EXPECT_GE(v, 0.0);
        EXPECT_NEAR(von_neumann(sa), von_neumann(sb), 1e-9);
        EXPECT_TRUE(std::is_sorted(sa.values.begin(), sa.values.end()));
    }
}

TEST(Schmidt, NonContiguousMatchesPermutedContiguous) {
    // swapping sites 1 and 4 maps subset {0, 4} onto {0, 1}
    const auto s = random_state(6, 77);
    auto t = s;
    t.apply_gate(Swap{1, 4});
    const std::vector<Site> a{0, 4}, b{0, 1};
    const auto sa = schmidt(s, a), sb = schmidt(t, b);
    for (std::size_t i = 0; i < sa.values.size(); ++i) EXPECT_NEAR(sa.values[i], sb.values[i], 1e-12);
}

TEST(Distribution, AutomatonKeepsZBasisUniform) {
    auto s = StateVector::from_product(ProductState::all_plus(10));
    s.apply_circuit(random_circuit(10, 40, 13));
    const auto p = exact_distribution(s, MeasureBasis::Z);
    for (double x : p) EXPECT_NEAR(x, 1.0 / 1024.0, 1e-14);
}

TEST(Distribution, AllPlusInXBasisIsDelta) {
    const auto s = StateVector::from_product(ProductState::all_plus(8));
    const auto p = exact_distribution(s, MeasureBasis::X);
    EXPECT_NEAR(p[0], 1.0, 1e-13);
    EXPECT_NEAR(std::accumulate(p.begin() + 1, p.end(), 0.0), 0.0, 1e-13);
}

TEST(Distribution, SamplesFollowExactProbabilities) {
    auto s = StateVector::from_product(ProductState::all_plus(8));
    s.apply_circuit(random_circuit(8, 30, 14));
    const auto p = exact_distribution(s, MeasureBasis::X);
    const std::size_t n = 1'000'000;
    const auto xs = sample_bitstrings(s, MeasureBasis::X, n, 5);
    ASSERT_EQ(xs.size(), n);
    std::vector<double> freq(p.size(), 0.0);
    for (auto x : xs) freq[x] += 1.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double sigma = std::sqrt(n * p[i] * (1 - p[i]));
        EXPECT_LE(std::abs(freq[i] - n * p[i]), 5.0 * sigma + 1e-9) << i;
    }
    EXPECT_EQ(sample_bitstrings(s, MeasureBasis::X, 1000, 5), sample_bitstrings(s, MeasureBasis::X, 1000, 5));
}
