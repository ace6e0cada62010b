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

#include "alab/error.hpp"
#include "alab/fits.hpp"

using namespace alab;

TEST(LeastSquares, ExactLine) {
    const std::vector<double> x{1, 0, 1, 1, 1, 2, 1, 3};
    const std::vector<double> y{1, 3, 5, 7};
    const auto f = least_squares(x, 2, y);
    EXPECT_NEAR(f.params[0], 1.0, 1e-12);
    EXPECT_NEAR(f.params[1], 2.0, 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    for (double r : f.residuals) EXPECT_NEAR(r, 0.0, 1e-12);
}

TEST(LeastSquares, Degenerate) {
    const std::vector<double> x{1, 2, 1, 2, 1, 2};
    const std::vector<double> y{1, 2, 3};
    EXPECT_THROW(least_squares(x, 2, y), InvalidArgument);
    const std::vector<double> few{1, 2};
    const std::vector<double> one{1};
    EXPECT_THROW(least_squares(few, 2, one), InvalidArgument);
}

TEST(ComplexityFits, LinearInK) {
    std::vector<TStarEntry> table;
    for (std::size_t l : {50, 100, 200}) {
        for (std::size_t k : {4, 8, 16}) {
            table.push_back({k, l, 0.01, 3.0 * static_cast<double>(l) + 5.0 * static_cast<double>(k)});
        }
    }
    const auto f = complexity_fits(table, 0.01);
    EXPECT_NEAR(f.slope_k, 5.0, 1e-9);
    EXPECT_NEAR(f.lin_v_b, 3.0, 1e-9);
    EXPECT_NEAR(f.lin_fit.r_squared, 1.0, 1e-12);
    ASSERT_EQ(f.ratios.size(), 3u);
    for (const auto& r : f.ratios) EXPECT_NEAR(r.ratio, 2.0, 1e-12);
    // constant per-size slope: alpha = 0
    ASSERT_TRUE(f.alpha.has_value());
    EXPECT_NEAR(*f.alpha, 0.0, 1e-9);
}

TEST(ComplexityFits, LogarithmicInK) {
    std::vector<TStarEntry> table;
    for (std::size_t k : {4, 8, 16, 32}) table.push_back({k, 100, 0.1, 2.0 * 100 + 7.0 * std::log2(double(k))});
    const auto f = complexity_fits(table, 0.1);
    EXPECT_NEAR(f.log_v_b, 2.0, 1e-9);
    EXPECT_NEAR(f.log_v_k, 7.0, 1e-9);
    EXPECT_FALSE(f.alpha.has_value());
    EXPECT_THROW(complexity_fits(table, 0.2), InvalidArgument);
}

TEST(PowerLaw, RecoversExponent) {
    std::vector<double> l{100, 200, 400, 800, 1600}, d;
    for (double x : l) d.push_back(0.37 * std::pow(x, 0.5));
    const auto p = fit_power_law(l, d);
    EXPECT_NEAR(p.exponent, 0.5, 1e-6);
    EXPECT_NEAR(p.prefactor, 0.37, 1e-6);

    std::vector<TStarEntry> table;
    for (std::size_t i = 0; i < l.size(); ++i) {
        for (std::size_t k : {4, 8, 16}) {
            table.push_back({k, static_cast<std::size_t>(l[i]), 0.01, 1.5 * l[i] + d[i] * static_cast<double>(k)});
        }
    }
    const auto f = complexity_fits(table, 0.01);
    ASSERT_TRUE(f.alpha.has_value());
    EXPECT_NEAR(*f.alpha, 0.5, 1e-6);
    const std::vector<double> bad{1, -2, 3};
    EXPECT_THROW(fit_power_law(l, d.empty() ? d : std::vector<double>{1, 2}), InvalidArgument);
    EXPECT_THROW(fit_power_law(bad, bad), InvalidArgument);
}
