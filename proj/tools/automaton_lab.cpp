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

// automaton-lab: run, list and describe experiments.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "alab/experiment.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2 };

std::string json_escape(const std::string& s) {
    std::string r;
    for (char c : s) {
        if (c == '"' || c == '\\') r += '\\';
        r += c;
    }
    return r;
}

void print_list() {
    for (auto k : alab::all_kinds()) {
        const auto& i = alab::kind_info(k);
        fmt::print("{:<20} {}\n", i.name, i.figure);
    }
}

void print_describe(alab::ExperimentKind k) {
    const auto& i = alab::kind_info(k);
    fmt::print("{}\n  reproduces: {}\n\n{}\n\nDefault configuration:\n{}\n\nOutputs:\n", i.name, i.figure, i.summary,
               alab::default_config_text(k));
    std::string_view rest = i.outputs;
    while (!rest.empty()) {
        const auto nl = rest.find('\n');
        fmt::print("  {}\n", rest.substr(0, nl));
        if (nl == std::string_view::npos) break;
        rest.remove_prefix(nl + 1);
    }
    fmt::print("  manifest.json, partial/\n"
               "Every CSV starts with '# kind=... config_hash=... master_seed=...'.\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Automaton circuit experiments: scrambling, designs and OTOCs."};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "List experiment kinds");
    std::string describe_kind;
    auto* describe = app.add_subcommand("describe", "Show defaults and output schema of a kind");
    describe->add_option("kind", describe_kind, "Experiment kind")->required();

    std::string run_kind;
    std::optional<std::string> config_file;
    std::vector<std::string> sets;
    std::optional<std::size_t> n, depth, realizations, samples, workers;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    auto* run = app.add_subcommand("run", "Run an experiment");
    run->add_option("kind", run_kind, "Experiment kind")->required();
    run->add_option("--config", config_file, "JSON config file");
    run->add_option("--set", sets, "Override, key=value with dotted keys (repeatable)");
    run->add_option("--n", n, "ensemble.n_sites");
    run->add_option("--depth", depth, "ensemble.depth");
    run->add_option("--realizations", realizations, "Circuit realizations");
    run->add_option("--samples", samples, "Monte Carlo samples per realization");
    run->add_option("--workers", workers, "Worker threads");
    run->add_option("--seed", seed, "Master seed");
    run->add_option("--out", out, "Output root (default $AUTOMATON_LAB_OUTPUT or ./runs)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (list->parsed()) {
            print_list();
            return kOk;
        }
        if (describe->parsed()) {
            print_describe(alab::parse_kind(describe_kind));
            return kOk;
        }
        const auto kind = alab::parse_kind(run_kind);
        if (n) sets.push_back(fmt::format("ensemble.n_sites={}", *n));
        if (depth) sets.push_back(fmt::format("ensemble.depth={}", *depth));
        if (realizations) sets.push_back(fmt::format("realizations={}", *realizations));
        if (samples) sets.push_back(fmt::format("samples={}", *samples));
        if (workers) sets.push_back(fmt::format("workers={}", *workers));
        if (seed) sets.push_back(fmt::format("seed={}", *seed));
        if (out) sets.push_back(fmt::format("output=\"{}\"", json_escape(*out)));
        std::optional<std::filesystem::path> path;
        if (config_file) path = *config_file;
        const auto cfg = alab::load_config(kind, path, sets);
        const auto res = alab::run_experiment(cfg);
        fmt::print("{}\n", res.summary);
        fmt::print("output: {}", res.directory.string());
        if (res.resumed_tasks) fmt::print(" ({} tasks resumed)", res.resumed_tasks);
        fmt::print("\n");
        return res.checks_passed ? kOk : kRuntime;
    } catch (const alab::InvalidArgument& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kValidation;
    } catch (const alab::CapacityError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kValidation;
    } catch (const std::exception& e) {
        fmt::print(stderr, "runtime error: {}\n", e.what());
        return kRuntime;
    }
}
