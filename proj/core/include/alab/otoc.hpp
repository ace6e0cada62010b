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
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alab/automaton.hpp"
#include "alab/circuit.hpp"
#include "alab/error.hpp"

namespace alab {

/// One factor of a correlator: X_site, or U^dagger X_site U when conjugated.
struct OtocFactor {
    bool conjugated;
    Site site;
    friend bool operator==(const OtocFactor&, const OtocFactor&) = default;
    friend auto operator<=>(const OtocFactor&, const OtocFactor&) = default;
};

/// Factors in bra-ket order, left to right: <F_0 F_1 ... F_{n-1}>.
struct OtocSpec {
    std::vector<OtocFactor> factors;

    std::size_t points() const noexcept { return factors.size(); }
    /// Throws InvalidArgument for odd length or sites >= n_sites.
    void validate(std::size_t n_sites) const;
    friend bool operator==(const OtocSpec&, const OtocSpec&) = default;
    friend auto operator<=>(const OtocSpec&, const OtocSpec&) = default;
};

/// "~X50 X0 ~X50 X0"
std::string format_spec(const OtocSpec& spec);
OtocSpec parse_spec(std::string_view text);

/// Unrolls U1 = U^dagger X_{i1} U, Um = U(m-1)^dagger X_{im} U(m-1) into
/// < U(k-1)^dagger X_base U(k-1) X_base >, a 2^k-factor spec for k-1 probe sites.
OtocSpec expand_recursive(std::span<const Site> probe_sites, Site base_site);

/// Probe sites {L/2, log2(k) - 2, ..., 2, 1} for the k = 2^m point recursive correlator with base site 0.
std::vector<Site> recursive_probe_sites(std::size_t n_sites, std::size_t points);

/// Lowers the spec to a Heisenberg word on prefix; adjacent Backward/Forward pairs cancel.
HeisenbergWord compile(const OtocSpec& spec, std::shared_ptr<const Circuit> prefix);

/// Depth of the first layer at which the backward light cone of any conjugated site can reach
/// a bare site, using the brickwork bond geometry. Before this depth the value is exactly 1
/// when every site occurs an even number of times among conjugated and among bare factors.
std::size_t light_cone_contact_depth(const OtocSpec& spec, std::size_t n_sites, bool periodic,
                                     std::size_t max_depth);

/// Support of U^dagger X_site U for the given circuit prefix (gate geometry only).
std::vector<bool> heisenberg_support(const Circuit& c, Site site);

// ---------------------------------------------------------------------------
// Series

struct OtocPoint {
    std::size_t depth;
    double mean;        ///< real part of the realization-averaged estimate
    double mean_imag;
    double std_error;   ///< standard error of the ensemble mean (between-realization spread)
    double mc_error;    ///< Monte Carlo part only: sqrt(sum sigma_r^2) / R
    std::size_t n_samples;       ///< per realization
    std::size_t n_realizations;
};

struct OtocSeries {
    OtocSpec spec;
    std::size_t n_sites = 0;
    std::uint64_t seed = 0;
    std::vector<OtocPoint> points;
};

struct SeriesRequest {
    OtocSpec spec;
    EnsembleSpec ensemble;  ///< depth is ignored; max(depths) is used
    std::vector<std::size_t> depths;
    std::size_t realizations = 1;
    std::size_t samples = 10'000;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    /// Refuse runs whose cost model R M points N sum(t) exceeds this.
    double max_cost = 5e13;
};

/// Cost model: realizations * samples * points * N * sum(depths).
double series_cost(const SeriesRequest& req);

/// Seeded circuit for realization r (master seed derived from (seed, r)).
Circuit realization_circuit(const EnsembleSpec& ensemble, std::size_t depth, std::uint64_t seed, std::size_t r);

enum class SeriesEngine { MonteCarlo, Exact };

/// Throws CapacityError when the cost model exceeds req.max_cost, InvalidArgument for non-automaton ensembles.
void check_series_cost(const SeriesRequest& req);

/// Estimates at every requested depth (sorted, deduplicated) for realization r alone.
std::vector<McEstimate> series_realization(const SeriesRequest& req, std::size_t r, const ProductState& state,
                                           SeriesEngine engine);

/// Series from per-realization estimates, merged in realization order.
OtocSeries combine_series(const SeriesRequest& req, std::span<const std::vector<McEstimate>> per_realization);

/// Monte Carlo series on the X-basis all-plus state unless `state` is given.
OtocSeries evaluate_series(const SeriesRequest& req, const std::optional<ProductState>& state = std::nullopt);

/// Same realizations and depths, evaluated exactly with the dense engine.
OtocSeries evaluate_series_exact(const SeriesRequest& req, const std::optional<ProductState>& state = std::nullopt);

/// Raised when a series never falls below epsilon; carries the series minimum.
class NoCrossing : public Error {
  public:
    NoCrossing(double series_min, double epsilon);
    double series_min() const noexcept { return min_; }

  private:
    double min_;
};

/// Smallest depth after which every estimate stays below epsilon, interpolated linearly between
/// the last point at or above epsilon and the next one.
double scrambling_time(const OtocSeries& series, double epsilon);

/// Geometric-then-linear depth grid: doubling up to `dense_from`, step `step` until max_depth.
std::vector<std::size_t> depth_grid(std::size_t dense_from, std::size_t max_depth, std::size_t step);

// ---------------------------------------------------------------------------
// Max-OTOC search

/// Evaluates E[Re F] for many specs at one depth.
using SpecEvaluator = std::function<std::vector<double>(std::span<const OtocSpec>)>;

struct SearchRequest {
    std::size_t points = 8;           ///< number of factors (4, 8, 16, ...)
    std::vector<Site> site_pool;      ///< default {0, 1, L/2-1, L/2}
    std::size_t n_sites = 0;
    /// Score one representative per rotation group in the coarse stage.
    bool prune_symmetric = true;
    std::size_t survivors = 32;       ///< specs promoted to the fine stage
    std::size_t max_specs = 2'000'000;
};

struct SearchResult {
    OtocSpec best;
    double best_value = 0.0;
    std::vector<std::pair<OtocSpec, double>> ranking;  ///< fine-stage values, descending
    std::size_t enumerated = 0;
    std::size_t evaluated_coarse = 0;
    bool partial = false;  ///< enumeration cap reached
};

/// Enumerates alternating specs ~X_a X_b ... over the pool. With pruning, exact classes are grouped
/// under cyclic rotation by factor pairs and the coarse evaluator scores one spec per group; the fine
/// evaluator then scores the canonical spec of every exact class in the surviving groups.
SearchResult max_otoc_search(const SearchRequest& req, const SpecEvaluator& coarse, const SpecEvaluator& fine);

/// Smallest member of the exact equivalence class.
OtocSpec canonical_spec(const OtocSpec& spec, std::span<const Site> pool, std::size_t n_sites);

/// Specs with the same ensemble average on an X-basis eigenstate: the L/2 translation (L % 4 == 0),
/// reversal, and any final bare site. Cyclic rotation is not included; it does not hold for states.
std::vector<OtocSpec> equivalent_specs(const OtocSpec& spec, std::span<const Site> pool, std::size_t n_sites);

/// Exact ensemble averages for many alternating specs at one depth via meet-in-the-middle over
/// dense state vectors; N must fit the dense cap.
std::vector<double> exact_spec_values(std::span<const OtocSpec> specs, const EnsembleSpec& ensemble,
                                      std::size_t depth, std::size_t realizations, std::uint64_t seed,
                                      const ProductState& state);

/// Single-realization values behind exact_spec_values.
std::vector<double> exact_spec_values_at(std::span<const OtocSpec> specs, const EnsembleSpec& ensemble,
                                         std::size_t depth, std::uint64_t seed, std::size_t r,
                                         const ProductState& state);

/// Single-realization values behind mc_spec_values.
std::vector<double> mc_spec_values_at(std::span<const OtocSpec> specs, const EnsembleSpec& ensemble,
                                      std::size_t depth, std::size_t samples, std::uint64_t seed, std::size_t r,
                                      const ProductState& state, std::size_t workers = 1);

/// Monte Carlo ensemble averages for many specs at one depth.
std::vector<double> mc_spec_values(std::span<const OtocSpec> specs, const EnsembleSpec& ensemble, std::size_t depth,
                                   std::size_t realizations, std::size_t samples, std::uint64_t seed,
                                   const ProductState& state, std::size_t workers = 1);

}  // namespace alab
