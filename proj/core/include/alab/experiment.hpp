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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alab/circuit.hpp"
#include "alab/error.hpp"

namespace alab {

enum class ExperimentKind {
    Bitstrings,
    EntropyTimeseries,
    BipartitionScan,
    RenyiVsHaar,
    LevelSpacing,
    OtocRecursive,
    OtocMaxSearch,
    ScramblingFit,
    VerifyOracle,
};

std::span<const ExperimentKind> all_kinds();
std::string_view kind_name(ExperimentKind k);
/// Throws InvalidArgument listing the valid names.
ExperimentKind parse_kind(std::string_view name);

struct KindInfo {
    ExperimentKind kind;
    std::string_view name;
    std::string_view figure;   ///< which figure or section the defaults reproduce
    std::string_view summary;
    std::string_view outputs;  ///< CSV/JSON files and their columns
};
const KindInfo& kind_info(ExperimentKind k);

/// Default configuration for a kind as pretty-printed JSON.
std::string default_config_text(ExperimentKind k);

/// Raised for configuration problems; the message names the offending field.
class ConfigError : public InvalidArgument {
  public:
    using InvalidArgument::InvalidArgument;
};

/// Fully resolved configuration. Built from the kind defaults, then an optional JSON file, then
/// `key=value` overrides with dotted paths (e.g. `ensemble.n_sites=12`).
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::VerifyOracle;

    EnsembleSpec ensemble;           ///< depth doubles as the circuit depth
    /// auto | x_plus | haar_product | random_x (each site |+> or |->). auto is x_plus for the
    /// automaton set and haar_product for the Clifford set.
    std::string state = "auto";
    std::size_t realizations = 1;
    std::size_t samples = 10'000;    ///< Monte Carlo samples per realization
    std::size_t workers = 1;
    std::uint64_t seed = 0;          ///< master seed
    std::filesystem::path output;

    // bitstrings
    std::string basis = "x";         ///< x | z
    double bin_width = 1.0;
    double gamma_max = 20.0;
    std::vector<double> gamma_grid;
    double design_eps = 0.1;
    double fit_lo = 1.0;
    double fit_hi = 10.0;

    // entropy_timeseries
    std::size_t late_window = 20;

    // bipartition_scan
    std::optional<std::size_t> bipartition_samples;

    // renyi_vs_haar
    std::vector<int> trace_powers;
    std::size_t haar_samples = 2000;

    // level_spacing
    std::size_t truncation = 0;
    std::size_t ratio_bins = 20;
    std::size_t reference_samples = 200;

    // OTOC kinds
    std::vector<std::size_t> points;       ///< correlator orders (4, 8, 16, ...)
    std::vector<std::size_t> depths;       ///< explicit depth list; empty means depth_grid(...)
    std::size_t dense_from = 8;
    std::size_t depth_step = 4;
    std::vector<double> epsilons;
    std::string engine = "mc";             ///< mc | exact
    std::vector<std::size_t> sizes;        ///< scrambling_fit system sizes
    std::vector<Site> site_pool;           ///< otoc_max_search; empty means {0, 1, L/2-1, L/2}
    std::size_t survivors = 32;
    std::size_t coarse_samples = 1000;
    double max_cost = 5e13;

    // verify_oracle
    std::vector<std::string> specs;        ///< OTOC specs; "usual" and "recursive8" are expanded
    std::size_t depth_points = 30;
    double z_sigma = 4.0;
    double amplitude_tol = 1e-10;

    /// Canonical JSON of every field that affects data (workers and output are excluded).
    std::string canonical_json() const;
    /// FNV-1a 64 of canonical_json(), as 16 hex digits.
    std::string hash() const;
    /// Throws ConfigError on the first bad field.
    void validate() const;
};

/// Reads defaults for `kind`, merges `config_file` (if any) and the overrides, and validates.
ExperimentConfig load_config(ExperimentKind kind, const std::optional<std::filesystem::path>& config_file,
                             std::span<const std::string> overrides);

/// Output root: $AUTOMATON_LAB_OUTPUT when set, else ./runs.
std::filesystem::path default_output_root();

struct RunResult {
    std::filesystem::path directory;
    std::vector<std::string> files;       ///< data files, relative to directory
    std::size_t resumed_tasks = 0;        ///< tasks read back from partial files
    std::string summary;                  ///< short human-readable report
    bool checks_passed = true;            ///< only verify_oracle sets this to false
};

/// Runs the experiment. Writes into <output>/<kind>-<hash>/: data files, manifest.json and
/// partial/ (per-task checkpoints that make an interrupted run resumable).
RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace alab
