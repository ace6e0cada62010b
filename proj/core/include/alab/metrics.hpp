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
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "alab/dense.hpp"

namespace alab {

// All entropies are in bits.

double von_neumann(const SchmidtSpectrum& sp);

/// log2(dA) - dA / (2 ln 2 dB), clamped at 0. Swaps the arguments (with a warning on stderr) when dA > dB.
double page_entropy(double dim_a, double dim_b);

/// (1 / (1 - alpha)) log2 sum lambda^alpha; throws InvalidArgument for alpha = 1 (use von_neumann) or alpha <= 0.
double renyi(const SchmidtSpectrum& sp, double alpha);
/// sum lambda^k for integer k >= 1.
double trace_power(const SchmidtSpectrum& sp, int k);
/// -log2 lambda_max
double min_entropy(const SchmidtSpectrum& sp);

// ---------------------------------------------------------------------------
// Bipartition statistics

struct BipartitionEntropy {
    std::uint64_t subset_mask;  ///< bit i set when site i is in A
    double entropy;
};

struct EntropyStats {
    std::vector<BipartitionEntropy> entries;
    double mean = 0.0;
    double std_dev = 0.0;  ///< population standard deviation over entries
};

struct ScanMode {
    /// Empty means every size-N/2 subset.
    std::optional<std::size_t> sampled;
    std::uint64_t seed = 0;

    static ScanMode all() { return {}; }
    static ScanMode sample(std::size_t n, std::uint64_t seed) { return {n, seed}; }
};

/// Largest number of subsets mode=all accepts.
inline constexpr std::size_t kMaxExhaustiveBipartitions = 1'000'000;

/// S_vN over equal-size bipartitions. Throws InvalidArgument for odd N or when mode=all exceeds the cap.
EntropyStats bipartition_scan(const StateVector& s, const ScanMode& mode, std::size_t workers = 1);

/// Mean and population standard deviation.
std::pair<double, double> mean_std(std::span<const double> xs);

// ---------------------------------------------------------------------------
// Level spacing

struct LevelSpacingStats {
    std::vector<double> ratios;
    std::vector<double> hist_edges;   ///< uniform bins on [0, 1]
    std::vector<double> hist_density; ///< normalized so the density integrates to 1
    double mean_r = 0.0;
    std::size_t discarded_levels = 0; ///< eigenvalues below the floor
    std::size_t zero_spacings = 0;    ///< spacing pairs that produced r = 0 from a zero gap
};

inline constexpr double kLevelFloor = 1e-12;
inline constexpr std::size_t kDefaultRatioBins = 20;

/// r_i = min(s_i / s_{i+1}, s_{i+1} / s_i) over ascending retained levels. truncation = 0 keeps
/// every level above the floor; otherwise only the largest `truncation` levels.
LevelSpacingStats level_spacing(const SchmidtSpectrum& sp, std::size_t truncation = 0);

/// r ratios of an arbitrary ascending level list (no floor applied).
std::vector<double> spacing_ratios(std::span<const double> ascending_levels, std::size_t* zero_spacings = nullptr);

/// Concatenates ratios and recomputes histogram and mean.
LevelSpacingStats pool(std::span<const LevelSpacingStats> parts, std::size_t bins = kDefaultRatioBins);
LevelSpacingStats stats_from_ratios(std::vector<double> ratios, std::size_t bins = kDefaultRatioBins);

enum class RmtEnsemble { GUE, Poisson };

/// Sampled reference: GUE draws Gaussian Hermitian matrices, Poisson draws i.i.d. uniform levels.
LevelSpacingStats rmt_reference(RmtEnsemble ensemble, std::size_t matrix_dim, std::size_t n_samples,
                                std::uint64_t seed);

// ---------------------------------------------------------------------------
// Bit-string statistics

struct BitstringHistogram {
    std::vector<double> edges;    ///< gamma = d p bin edges, strictly increasing
    std::vector<double> counts;
    double total_mass = 0.0;      ///< number of probabilities binned (including overflow)

    /// Fraction of entries per unit gamma in bin i.
    double density(std::size_t i) const;
};

/// Bins gamma = d * p over [0, gamma_max) with a fixed width.
BitstringHistogram bitstring_histogram(std::span<const double> probabilities, double dim, double bin_width = 1.0,
                                       double gamma_max = 20.0);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_err = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Weighted least-squares fit of ln(density) against bin centre over [gamma_lo, gamma_hi];
/// empty bins are skipped, weights are the bin counts (Poisson variance of the log).
LineFit porter_thomas_fit(const BitstringHistogram& h, double gamma_lo, double gamma_hi);

struct DesignBoundRow {
    double gamma;
    double tail;       ///< empirical Pr[d p > gamma]
    double bound;      ///< (1 + eps) e^{-gamma}
    double allowance;  ///< statistical slack added before calling a violation
    bool violated;
};

struct DesignBoundReport {
    std::vector<DesignBoundRow> rows;
    double gamma_star = 0.0;                 ///< largest grid gamma with no violation at or below it
    std::optional<double> violation_onset;  ///< first violated grid gamma
};

/// Compares the empirical tail of d p to (1 + eps) e^{-gamma}. A violation needs the tail to
/// exceed the bound by more than z_sigma binomial standard errors of the bound at that gamma.
DesignBoundReport design_bound_check(std::span<const double> probabilities, double dim,
                                     std::span<const double> gamma_grid, double eps = 0.1, double z_sigma = 3.0);

/// Number of entries with d p > gamma at each grid point.
std::vector<std::size_t> tail_counts(std::span<const double> probabilities, double dim,
                                     std::span<const double> gamma_grid);

/// design_bound_check on pooled tail counts over `total` entries.
DesignBoundReport design_bound_from_tails(std::span<const double> gamma_grid, std::span<const std::size_t> tails,
                                          std::size_t total, double eps = 0.1, double z_sigma = 3.0);

// ---------------------------------------------------------------------------
// Haar oracle

struct TracePowerEstimate {
    int k;
    double mean;
    double std_error;
};

/// E_Haar[Tr rho_A^k] for k in ks, from n_samples normalized Gaussian vectors of size dA dB.
std::vector<TracePowerEstimate> haar_trace_power_oracle(std::size_t dim_a, std::size_t dim_b, std::span<const int> ks,
                                                        std::size_t n_samples, std::uint64_t seed);

}  // namespace alab
