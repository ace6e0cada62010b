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

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace alab {

struct LeastSquares {
    std::vector<double> params;
    std::vector<double> std_errors;
    std::vector<double> residuals;
    double r_squared = 0.0;
};

/// Ordinary least squares y ~ X beta with X given row-major (rows x cols).
/// Throws InvalidArgument when rows < cols or X is rank deficient.
LeastSquares least_squares(std::span<const double> design, std::size_t cols, std::span<const double> y);

/// Scrambling time of the points-point correlator at system size n_sites and threshold epsilon.
struct TStarEntry {
    std::size_t points;
    std::size_t n_sites;
    double epsilon;
    double t_star;
};

struct GapRatio {
    std::size_t n_sites;
    double epsilon;
    double ratio;  ///< (t*_16 - t*_8) / (t*_8 - t*_4)
};

struct ScramblingFit {
    /// t* = v_B L + v_k log2(k)
    double log_v_b = 0.0;
    double log_v_k = 0.0;
    LeastSquares log_fit;
    /// t* = v_B L + slope_k k with slope_k = Delta sqrt(L)
    double lin_v_b = 0.0;
    double slope_k = 0.0;
    double delta = 0.0;
    LeastSquares lin_fit;
    /// Delta(L) = c L^alpha from per-size gaps (t*_8 - t*_4), when at least three sizes are present.
    std::optional<double> alpha;
    std::optional<double> alpha_err;
    std::optional<double> prefactor;
    std::vector<GapRatio> ratios;
};

/// Fits t*(k, L) at the given epsilon and gap ratios at every epsilon present.
/// Needs at least three (k, t*) entries at that epsilon.
ScramblingFit complexity_fits(std::span<const TStarEntry> table, double epsilon);

struct PowerLaw {
    double prefactor;
    double exponent;
    double exponent_err;
    LeastSquares fit;
};

/// y = c x^alpha by least squares on logs; needs >= 3 positive points.
PowerLaw fit_power_law(std::span<const double> x, std::span<const double> y);

}  // namespace alab
