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

#include "alab/dense.hpp"
#include "alab/error.hpp"
#include "alab/otoc.hpp"

using namespace alab;

namespace {

EnsembleSpec ensemble(std::size_t n, std::uint64_t seed = 0) {
    EnsembleSpec e;
    e.n_sites = n;
    e.master_seed = seed;
    return e;
}

OtocSeries make_series(std::vector<std::pair<std::size_t, double>> pts) {
    OtocSeries s;
    for (auto [d, v] : pts) s.points.push_back(OtocPoint{d, v, 0.0, 0.0, 0.0, 1, 1});
    return s;
}

}  // namespace

TEST(Spec, TextRoundTrip) {
    const auto s = parse_spec("~X50 X0 ~X50 X0");
    ASSERT_EQ(s.points(), 4u);
    EXPECT_TRUE(s.factors[0].conjugated);
    EXPECT_EQ(s.factors[0].site, 50u);
    EXPECT_FALSE(s.factors[1].conjugated);
    EXPECT_EQ(format_spec(s), "~X50 X0 ~X50 X0");
    EXPECT_THROW(parse_spec("~Y3 X0"), InvalidArgument);
    EXPECT_THROW(parse_spec("X"), InvalidArgument);
    EXPECT_THROW(parse_spec("X3a"), InvalidArgument);
    EXPECT_THROW(parse_spec("  "), InvalidArgument);
    EXPECT_THROW(parse_spec("X1 X2 X3").validate(10), InvalidArgument);
    EXPECT_THROW(parse_spec("X1 X12").validate(10), InvalidArgument);
}

TEST(Recursive, SmallOrders) {
    const std::vector<Site> one{50};
    EXPECT_EQ(format_spec(expand_recursive(one, 0)), "~X50 X0 ~X50 X0");
    const std::vector<Site> two{50, 1};
    EXPECT_EQ(format_spec(expand_recursive(two, 0)), "~X50 X1 ~X50 X0 ~X50 X1 ~X50 X0");
    const std::vector<Site> none{};
    EXPECT_THROW(expand_recursive(none, 0), InvalidArgument);
}

TEST(Recursive, LengthDoubles) {
    std::vector<Site> sites{100};
    for (std::size_t k = 2; k <= 10; ++k) {
        EXPECT_EQ(expand_recursive(sites, 0).points(), std::size_t{1} << k);
        sites.push_back(static_cast<Site>(k));
    }
}

TEST(Recursive, ProbeSites) {
    EXPECT_EQ(recursive_probe_sites(100, 4), (std::vector<Site>{50}));
    EXPECT_EQ(recursive_probe_sites(100, 8), (std::vector<Site>{50, 1}));
    EXPECT_EQ(recursive_probe_sites(100, 16), (std::vector<Site>{50, 2, 1}));
    EXPECT_THROW(recursive_probe_sites(100, 12), InvalidArgument);
}

TEST(Compile, PassCounts) {
    auto c = std::make_shared<const Circuit>(build_brickwork(ensemble(10)));
    const auto w4 = compile(parse_spec("~X5 X0 ~X5 X0"), c);
    EXPECT_EQ(w4.circuit_passes(), 4u);
    for (std::size_t k = 2; k <= 6; ++k) {
        const auto spec = expand_recursive(std::vector<Site>(k - 1, 5), 0);
        EXPECT_LE(compile(spec, c).circuit_passes(), spec.points() + 1);
    }
    auto empty = std::make_shared<const Circuit>(Circuit(10));
    const auto bare = compile(parse_spec("~X5 X0 ~X5 X0"), empty);
    ASSERT_EQ(bare.actions.size(), 4u);
    for (const auto& a : bare.actions) EXPECT_TRUE(std::holds_alternative<FlipX>(a));
}

TEST(LightCone, ContactDepthMatchesSupport) {
    const auto spec = parse_spec("~X20 X0 ~X20 X0");
    const std::size_t t = light_cone_contact_depth(spec, 40, true, 100);
    // the cone of site 20 grows by about one site per layer on each side
    EXPECT_GE(t, 18u);
    EXPECT_LE(t, 21u);
    const Circuit c = build_brickwork(ensemble(40, 1));
    // the geometric cone bounds the gate-level support
    const auto sup = heisenberg_support(truncate(c, t - 1), 20);
    EXPECT_FALSE(sup[0]);
    EXPECT_EQ(light_cone_contact_depth(parse_spec("~X3 X3"), 40, true, 100), 0u);
}

TEST(LightCone, SeriesIsOneBeforeContact) {
    SeriesRequest req;
    req.spec = parse_spec("~X20 X0 ~X20 X0");
    req.ensemble = ensemble(40);
    const std::size_t contact = light_cone_contact_depth(req.spec, 40, true, 100);
    for (std::size_t t = 0; t < contact; t += 2) req.depths.push_back(t);
    req.realizations = 3;
    req.samples = 256;
    const auto s = evaluate_series(req);
    for (const auto& p : s.points) {
        EXPECT_NEAR(p.mean, 1.0, 1e-12) << p.depth;
        EXPECT_LT(p.std_error, 1e-12);
    }
}

TEST(Series, MatchesExactAtSmallSize) {
    SeriesRequest req;
    req.spec = parse_spec("~X5 X0 ~X5 X0");
    req.ensemble = ensemble(10);
    req.depths = {0, 2, 4, 6, 8, 12, 16};
    req.realizations = 4;
    req.samples = 20000;
    req.seed = 8;
    const auto mc = evaluate_series(req);
    const auto ex = evaluate_series_exact(req);
    ASSERT_EQ(mc.points.size(), ex.points.size());
    int ok = 0;
    for (std::size_t i = 0; i < mc.points.size(); ++i) {
        EXPECT_EQ(mc.points[i].depth, ex.points[i].depth);
        if (std::abs(mc.points[i].mean - ex.points[i].mean) <= 4 * mc.points[i].mc_error + 1e-12) ++ok;
        EXPECT_LE(std::abs(mc.points[i].mean), 1.0 + 4 * mc.points[i].std_error + 1e-12);
    }
    EXPECT_GE(ok, 6);
}

TEST(Series, BudgetAndEnsembleChecks) {
    SeriesRequest req;
    req.spec = parse_spec("~X5 X0 ~X5 X0");
    req.ensemble = ensemble(100);
    req.depths = {100, 200};
    req.realizations = 50;
    req.samples = 100'000'000;
    EXPECT_GT(series_cost(req), req.max_cost);
    EXPECT_THROW(evaluate_series(req), CapacityError);
    req.ensemble.gate_set = GateSet::Clifford;
    req.samples = 10;
    EXPECT_THROW(evaluate_series(req), InvalidArgument);
}

TEST(ScramblingTime, Rules) {
    EXPECT_THROW(scrambling_time(make_series({{0, 1}, {1, 1}, {2, 1}}), 0.5), NoCrossing);
    try {
        scrambling_time(make_series({{0, 1}, {1, 0.8}}), 0.5);
        FAIL();
    } catch (const NoCrossing& e) {
        EXPECT_EQ(e.series_min(), 0.8);
    }
    const double t = scrambling_time(make_series({{1, 1}, {2, 1}, {3, 0}, {4, 0}}), 0.5);
    EXPECT_GT(t, 2.0);
    EXPECT_LT(t, 3.0);
    EXPECT_DOUBLE_EQ(t, 2.5);
    // a late bump above epsilon moves t* past it
    EXPECT_DOUBLE_EQ(scrambling_time(make_series({{0, 1}, {10, 0}, {20, 0.6}, {30, 0.1}}), 0.5), 22.0);
}

TEST(DepthGrid, Shape) {
    EXPECT_EQ(depth_grid(8, 20, 4), (std::vector<std::size_t>{0, 1, 2, 4, 8, 12, 16, 20}));
    EXPECT_THROW(depth_grid(8, 20, 0), InvalidArgument);
}

TEST(Search, Equivalences) {
    const std::vector<Site> pool{0, 1, 5, 6};
    const auto a = parse_spec("~X0 X6 ~X0 X0 ~X0 X6 ~X0 X0");
    const auto eq = equivalent_specs(a, pool, 12);
    auto has = [&](const char* text) { return std::find(eq.begin(), eq.end(), parse_spec(text)) != eq.end(); };
    EXPECT_TRUE(has("~X6 X0 ~X6 X6 ~X6 X0 ~X6 X6"));  // L/2 translation
    EXPECT_FALSE(has("~X0 X0 ~X0 X6 ~X0 X0 ~X0 X6"));  // pair rotation is not exact
    EXPECT_FALSE(has("~X0 X0 ~X0 X0 ~X0 X0 ~X0 X0"));
    EXPECT_TRUE(has("~X0 X6 ~X0 X0 ~X0 X6 ~X0 X1"));  // free trailing site
    EXPECT_EQ(canonical_spec(a, pool, 12), eq.front());
    // translation leaves the pool for site 1
    const auto b = equivalent_specs(parse_spec("~X1 X0 ~X1 X0"), pool, 12);
    for (const auto& s : b) EXPECT_NE(s.factors[0].site, 7u);
}

TEST(Search, EquivalentSpecsShareValues) {
    // N % 4 != 0, so only reversal and the free trailing site apply and hold per realization
    const auto e = ensemble(10);
    const std::vector<Site> pool{0, 1, 4, 5};
    const auto psi = ProductState::all_plus(10);
    for (const char* text : {"~X0 X5 ~X1 X0 ~X4 X5 ~X0 X1", "~X5 X0 ~X1 X4"}) {
        const auto cls = equivalent_specs(parse_spec(text), pool, 10);
        ASSERT_GT(cls.size(), 4u);
        const auto v = exact_spec_values(cls, e, 7, 2, 9, psi);
        for (double x : v) EXPECT_NEAR(x, v.front(), 1e-12) << text;
    }
}

TEST(Search, ExactValuesMatchDense) {
    const auto e = ensemble(8);
    const std::vector<OtocSpec> specs{parse_spec("~X4 X0 ~X4 X0"), parse_spec("~X0 X4 ~X0 X0 ~X0 X4 ~X0 X0"),
                                      parse_spec("~X1 X3 ~X3 X1")};
    const auto psi = ProductState::all_plus(8);
    const auto v = exact_spec_values(specs, e, 6, 3, 5, psi);
    const auto sv = StateVector::from_product(psi);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        double ref = 0;
        for (std::size_t r = 0; r < 3; ++r) {
            auto c = std::make_shared<const Circuit>(realization_circuit(e, 6, 5, r));
            ref += expectation(sv, compile(specs[i], c)).real() / 3.0;
        }
        EXPECT_NEAR(v[i], ref, 1e-10);
    }
}

TEST(Search, PrunedSearchMatchesBruteForce) {
    const std::size_t n = 12;
    const auto e = ensemble(n);
    const auto psi = ProductState::all_plus(n);
    auto eval = [&](std::span<const OtocSpec> specs) { return exact_spec_values(specs, e, 12, 8, 4, psi); };
    SearchRequest req;
    req.points = 4;
    req.n_sites = n;
    req.survivors = 256;
    const auto pruned = max_otoc_search(req, eval, eval);
    req.prune_symmetric = false;
    const auto full = max_otoc_search(req, eval, eval);
    EXPECT_FALSE(pruned.partial);
    EXPECT_EQ(pruned.enumerated, 256u);
    EXPECT_LT(pruned.evaluated_coarse, 256u);
    EXPECT_EQ(full.evaluated_coarse, 256u);
    EXPECT_NEAR(pruned.best_value, full.best_value, 1e-12);
    const std::vector<Site> pool{0, 1, 5, 6};
    const auto cls = equivalent_specs(full.best, pool, n);
    EXPECT_NE(std::find(cls.begin(), cls.end(), pruned.best), cls.end()) << format_spec(pruned.best);
}

TEST(Search, PartialFlag) {
    auto eval = [](std::span<const OtocSpec> specs) { return std::vector<double>(specs.size(), 0.0); };
    SearchRequest req;
    req.points = 16;
    req.n_sites = 12;
    req.max_specs = 1000;
    req.prune_symmetric = false;
    const auto res = max_otoc_search(req, eval, eval);
    EXPECT_TRUE(res.partial);
    EXPECT_EQ(res.enumerated, 1000u);
}
