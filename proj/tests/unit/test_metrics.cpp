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

#include "alab/error.hpp"
#include "alab/metrics.hpp"

using namespace alab;

namespace {

SchmidtSpectrum spectrum(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return {std::move(v), {}};
}

SchmidtSpectrum random_spectrum(Rng& rng, std::size_t d) {
    std::vector<double> v(d);
    double s = 0;
    for (auto& x : v) {
        x = -std::log(uniform01(rng) + 1e-300);
        s += x;
    }
    for (auto& x : v) x /= s;
    return spectrum(v);
}

StateVector ghz(std::size_t n) {
    std::vector<std::complex<double>> a(std::size_t{1} << n);
    a.front() = a.back() = std::numbers::sqrt2 / 2;
    return StateVector::from_amplitudes(std::move(a));
}

}  // namespace

TEST(Entropy, VonNeumannExamples) {
    EXPECT_EQ(von_neumann(spectrum({0, 0, 1})), 0.0);
    EXPECT_NEAR(von_neumann(spectrum({0.5, 0.5})), 1.0, 1e-15);
    EXPECT_NEAR(von_neumann(spectrum(std::vector<double>(32, 1.0 / 32))), 5.0, 1e-13);
}

TEST(Entropy, PageValues) {
    EXPECT_NEAR(page_entropy(256, 256), 8.0 - 1.0 / (2.0 * std::numbers::ln2), 1e-12);
    EXPECT_NEAR(page_entropy(256, 256), 7.2787, 5e-5);
    EXPECT_EQ(page_entropy(1, 1), 0.0);
    EXPECT_NEAR(page_entropy(2, 32768), 1.0, 1e-4);
    EXPECT_NEAR(page_entropy(64, 4), page_entropy(4, 64), 1e-15);
}

TEST(Entropy, RenyiExamples) {
    const auto flat = spectrum(std::vector<double>(16, 1.0 / 16));
    for (double a : {0.5, 2.0, 3.0, 7.5}) EXPECT_NEAR(renyi(flat, a), 4.0, 1e-12);
    EXPECT_NEAR(min_entropy(flat), 4.0, 1e-12);
    EXPECT_THROW(renyi(flat, 1.0), InvalidArgument);
    EXPECT_THROW(renyi(flat, 0.0), InvalidArgument);
    EXPECT_THROW(trace_power(flat, 0), InvalidArgument);
    EXPECT_NEAR(renyi(flat, std::numeric_limits<double>::infinity()), 4.0, 1e-12);
}

TEST(Entropy, OrderingOnRandomSpectra) {
    Rng rng(6);
    for (int k = 0; k < 100; ++k) {
        const auto sp = random_spectrum(rng, 2 + static_cast<std::size_t>(k));
        EXPECT_NEAR(trace_power(sp, 1), 1.0, 1e-12);
        double prev = renyi(sp, 0.25);
        for (double a : {0.5, 0.9, 1.5, 2.0, 3.0, 5.0, 10.0}) {
            const double r = renyi(sp, a);
            EXPECT_LE(r, prev + 1e-12);
            prev = r;
            if (a > 1) {
                EXPECT_LE(min_entropy(sp), r + 1e-12);
                EXPECT_LE(r, von_neumann(sp) + 1e-12);
            }
        }
        for (int j = 1; j < 10; ++j) EXPECT_LE(trace_power(sp, j + 1), trace_power(sp, j) + 1e-15);
    }
}

TEST(Bipartition, ProductAndGhz) {
    const auto p = bipartition_scan(StateVector::from_product(ProductState::all_plus(8)), ScanMode::all());
    EXPECT_EQ(p.entries.size(), 70u);
    for (const auto& e : p.entries) EXPECT_NEAR(e.entropy, 0.0, 1e-10);
    EXPECT_NEAR(p.std_dev, 0.0, 1e-10);

    const auto g = bipartition_scan(ghz(10), ScanMode::all());
    EXPECT_EQ(g.entries.size(), 252u);
    for (const auto& e : g.entries) {
        EXPECT_NEAR(e.entropy, 1.0, 1e-12);
        EXPECT_EQ(std::popcount(e.subset_mask), 5);
    }
    EXPECT_NEAR(g.mean, 1.0, 1e-12);
    EXPECT_NEAR(g.std_dev, 0.0, 1e-12);
}

TEST(Bipartition, SampledAndErrors) {
    EXPECT_THROW(bipartition_scan(StateVector(5), ScanMode::all()), InvalidArgument);
    const auto g = bipartition_scan(ghz(12), ScanMode::sample(40, 3));
    EXPECT_EQ(g.entries.size(), 40u);
    for (const auto& e : g.entries) EXPECT_EQ(std::popcount(e.subset_mask), 6);
    const auto h = bipartition_scan(ghz(12), ScanMode::sample(40, 3), 3);
    for (std::size_t i = 0; i < 40; ++i) EXPECT_EQ(g.entries[i].subset_mask, h.entries[i].subset_mask);
}

TEST(Bipartition, EntropyBounds) {
    EnsembleSpec spec;
    spec.n_sites = 10;
    spec.depth = 30;
    auto s = StateVector::from_product(ProductState::all_plus(10));
    s.apply_circuit(build_brickwork(spec));
    for (const auto& e : bipartition_scan(s, ScanMode::all()).entries) {
        EXPECT_GE(e.entropy, 0.0);
        EXPECT_LE(e.entropy, 5.0 + 1e-12);
    }
}

TEST(LevelSpacing, RatioExamples) {
    const std::vector<double> even{0.0, 1.0, 2.0};
    EXPECT_EQ(spacing_ratios(even), std::vector<double>{1.0});
    const std::vector<double> uneven{0.0, 1.0, 3.0};
    EXPECT_EQ(spacing_ratios(uneven), std::vector<double>{0.5});
    std::size_t zeros = 0;
    const std::vector<double> degenerate{1.0, 1.0, 2.0, 4.0};
    const auto r = spacing_ratios(degenerate, &zeros);
    EXPECT_EQ(zeros, 1u);
    EXPECT_EQ(r[0], 0.0);
    EXPECT_EQ(r[1], 0.5);
}

TEST(LevelSpacing, FloorAndErrors) {
    const auto sp = spectrum({0.0, 1e-15, 0.1, 0.2, 0.3, 0.4});
    const auto st = level_spacing(sp);
    EXPECT_EQ(st.discarded_levels, 2u);
    EXPECT_EQ(st.ratios.size(), 2u);
    EXPECT_THROW(level_spacing(spectrum({0.0, 0.5, 0.5})), InvalidArgument);
    const auto tr = level_spacing(sp, 3);
    EXPECT_EQ(tr.ratios.size(), 1u);
    for (double r : st.ratios) {
        EXPECT_GE(r, 0.0);
        EXPECT_LE(r, 1.0);
    }
}

TEST(LevelSpacing, HistogramIsDensity) {
    Rng rng(2);
    std::vector<double> r(1000);
    for (auto& x : r) x = uniform01(rng);
    const auto st = stats_from_ratios(r, 10);
    double integral = 0;
    for (std::size_t i = 0; i < 10; ++i) integral += st.hist_density[i] * (st.hist_edges[i + 1] - st.hist_edges[i]);
    EXPECT_NEAR(integral, 1.0, 1e-12);
}

TEST(Rmt, PoissonReferenceIsStable) {
    const auto a = rmt_reference(RmtEnsemble::Poisson, 16, 100'000, 1);
    const auto b = rmt_reference(RmtEnsemble::Poisson, 16, 100'000, 2);
    EXPECT_NEAR(a.mean_r, b.mean_r, 0.002);
    EXPECT_NEAR(a.mean_r, 2.0 * std::numbers::ln2 - 1.0, 0.005);
    // maximal at r -> 0
    EXPECT_EQ(std::max_element(a.hist_density.begin(), a.hist_density.end()), a.hist_density.begin());
    EXPECT_THROW(rmt_reference(RmtEnsemble::Poisson, 8, 10, 1), InvalidArgument);
}

TEST(Rmt, GueReferenceIsStable) {
    const auto a = rmt_reference(RmtEnsemble::GUE, 200, 100, 1);
    const auto b = rmt_reference(RmtEnsemble::GUE, 200, 100, 2);
    EXPECT_NEAR(a.mean_r, b.mean_r, 0.01);
    EXPECT_NEAR(a.mean_r, 0.5996, 0.01);
    EXPECT_LT(a.hist_density.front(), 0.1 * *std::max_element(a.hist_density.begin(), a.hist_density.end()));
}

TEST(Histogram, BinsAndFit) {
    Rng rng(11);
    const double d = 1 << 16;
    std::vector<double> p(1 << 16);
    for (auto& x : p) x = -std::log(1.0 - uniform01(rng)) / d;
    const auto h = bitstring_histogram(p, d);
    for (std::size_t i = 0; i + 1 < h.edges.size(); ++i) EXPECT_LT(h.edges[i], h.edges[i + 1]);
    const auto f = porter_thomas_fit(h, 1.0, 10.0);
    EXPECT_NEAR(f.slope, -1.0, 0.05);
    EXPECT_GT(f.r_squared, 0.99);
}

TEST(DesignBound, UniformNeverViolates) {
    std::vector<double> p(4096, 1.0 / 4096);
    std::vector<double> grid;
    for (double g = 1.0; g <= 20.0; g += 0.5) grid.push_back(g);
    const auto rep = design_bound_check(p, 4096, grid);
    for (const auto& row : rep.rows) {
        if (row.gamma >= 1.0) {
            EXPECT_FALSE(row.violated) << row.gamma;
            EXPECT_EQ(row.tail, 0.0);
        }
    }
    EXPECT_FALSE(rep.violation_onset.has_value());
    EXPECT_EQ(rep.gamma_star, 20.0);
}

TEST(DesignBound, ExponentialSamplesStayBelow) {
    Rng rng(5);
    const double d = 1 << 18;
    std::vector<double> p(1 << 18);
    for (auto& x : p) x = -std::log(1.0 - uniform01(rng)) / d;
    std::vector<double> grid;
    for (double g = 0.5; g <= 12.0; g += 0.5) grid.push_back(g);
    const auto rep = design_bound_check(p, d, grid);
    EXPECT_FALSE(rep.violation_onset.has_value());
}

TEST(DesignBound, DetectsHeavyTail) {
    // half the strings carry all the weight: tail(1) = 0.5 > 1.1 e^{-1} + allowance
    std::vector<double> p(1024, 0.0);
    for (std::size_t i = 0; i < 512; ++i) p[i] = 1.0 / 512;
    const std::vector<double> grid{0.5, 1.0, 1.5, 2.5};
    const auto rep = design_bound_check(p, 1024, grid);
    ASSERT_TRUE(rep.violation_onset.has_value());
    EXPECT_EQ(*rep.violation_onset, 1.0);
    EXPECT_EQ(rep.gamma_star, 0.5);
    EXPECT_FALSE(rep.rows[3].violated);
}

TEST(HaarOracle, Values) {
    const std::vector<int> ks{1, 2, 3};
    const auto a = haar_trace_power_oracle(2, 2, ks, 1'000'000, 1);
    const auto b = haar_trace_power_oracle(2, 2, ks, 1'000'000, 2);
    EXPECT_NEAR(a[0].mean, 1.0, 1e-12);
    // E Tr rho^2 = (dA + dB) / (dA dB + 1) = 0.8 for two qubits
    EXPECT_NEAR(a[1].mean, 0.8, 4 * a[1].std_error);
    EXPECT_NEAR(a[1].mean, b[1].mean, 1e-3);
    EXPECT_THROW(haar_trace_power_oracle(2048, 1024, ks, 1, 1), CapacityError);
}
