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

#include "alab/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace alab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("alab_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig cfg_for(ExperimentKind k, std::vector<std::string> sets, const fs::path& out) {
    sets.push_back("output=\"" + out.string() + "\"");
    return load_config(k, std::nullopt, sets);
}

}  // namespace

TEST(Kinds, NamesRoundTrip) {
    EXPECT_EQ(all_kinds().size(), 9u);
    for (auto k : all_kinds()) EXPECT_EQ(parse_kind(kind_name(k)), k);
    try {
        parse_kind("histogram");
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("verify_oracle"), std::string::npos);
    }
    EXPECT_NE(std::string(kind_info(ExperimentKind::OtocRecursive).figure).find("L=100"), std::string::npos);
}

TEST(Config, DefaultsValidate) {
    for (auto k : all_kinds()) EXPECT_NO_THROW(load_config(k, std::nullopt, {})) << kind_name(k);
    const auto c = load_config(ExperimentKind::OtocRecursive, std::nullopt, {});
    EXPECT_EQ(c.ensemble.n_sites, 100u);
    EXPECT_TRUE(c.ensemble.periodic);
    EXPECT_EQ(c.points, (std::vector<std::size_t>{4, 8, 16}));
}

TEST(Config, ErrorsNameTheField) {
    auto msg = [](ExperimentKind k, std::vector<std::string> sets) -> std::string {
        try {
            load_config(k, std::nullopt, sets);
        } catch (const ConfigError& e) {
            return e.what();
        }
        return "";
    };
    EXPECT_NE(msg(ExperimentKind::Bitstrings, {"samples=10"}).find("'samples'"), std::string::npos);
    EXPECT_NE(msg(ExperimentKind::Bitstrings, {"ensemble.depht=10"}).find("ensemble.depht"), std::string::npos);
    EXPECT_NE(msg(ExperimentKind::Bitstrings, {"realizations=0"}).find("realizations"), std::string::npos);
    EXPECT_NE(msg(ExperimentKind::Bitstrings, {"realizations=many"}).find("realizations"), std::string::npos);
    EXPECT_NE(msg(ExperimentKind::EntropyTimeseries, {"ensemble.n_sites=15", "ensemble.periodic=false"}).find("n_sites"), std::string::npos);
    EXPECT_NE(msg(ExperimentKind::EntropyTimeseries, {"ensemble.n_sites=15"}).find("ensemble.periodic"), std::string::npos);
    EXPECT_NE(msg(ExperimentKind::Bitstrings, {"ensemble.n_sites=40"}).find("GiB"), std::string::npos);
    EXPECT_NE(msg(ExperimentKind::OtocRecursive, {"points=[6]"}).find("points"), std::string::npos);
    EXPECT_NE(msg(ExperimentKind::OtocRecursive, {"epsilons=[2]"}).find("epsilons"), std::string::npos);
    EXPECT_NE(msg(ExperimentKind::VerifyOracle, {"specs=[\"~X3 X\"]"}).find("specs"), std::string::npos);
    EXPECT_NE(msg(ExperimentKind::Bitstrings, {"noequals"}).find("key=value"), std::string::npos);
}

TEST(Config, FileThenOverrides) {
    const auto dir = scratch("cfgfile");
    fs::create_directories(dir);
    const auto file = dir / "c.json";
    std::ofstream(file) << R"({"kind": "verify_oracle", "ensemble": {"n_sites": 6}, "realizations": 4})";
    const std::vector<std::string> sets{"realizations=5", "ensemble.fixed_angle=1.5707963267948966"};
    const auto c = load_config(ExperimentKind::VerifyOracle, file, sets);
    EXPECT_EQ(c.ensemble.n_sites, 6u);
    EXPECT_EQ(c.realizations, 5u);
    ASSERT_TRUE(c.ensemble.fixed_angle.has_value());
    EXPECT_THROW(load_config(ExperimentKind::Bitstrings, file, {}), ConfigError);
    std::ofstream(file) << "{ not json";
    EXPECT_THROW(load_config(ExperimentKind::VerifyOracle, file, {}), ConfigError);
}

TEST(Config, HashIgnoresWorkersAndOutput) {
    const auto a = load_config(ExperimentKind::Bitstrings, std::nullopt, {});
    const auto b = load_config(ExperimentKind::Bitstrings, std::nullopt,
                               std::vector<std::string>{"workers=4", "output=\"/elsewhere\""});
    const auto c = load_config(ExperimentKind::Bitstrings, std::nullopt, std::vector<std::string>{"seed=1"});
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_NE(a.hash(), c.hash());
    EXPECT_EQ(a.hash().size(), 16u);
    // stable across builds; a change here invalidates every resumable run directory
    EXPECT_EQ(a.hash(), load_config(ExperimentKind::Bitstrings, std::nullopt, {}).hash());
}

TEST(Runner, VerifyOracleSmall) {
    const auto out = scratch("verify");
    const auto cfg = cfg_for(ExperimentKind::VerifyOracle,
                             {"ensemble.n_sites=6", "ensemble.depth=12", "realizations=2", "samples=4000"}, out);
    const auto r = run_experiment(cfg);
    EXPECT_TRUE(r.checks_passed) << r.summary;
    EXPECT_EQ(r.directory.filename().string(), "verify_oracle-" + cfg.hash());
    const auto manifest = slurp(r.directory / "manifest.json");
    EXPECT_NE(manifest.find("\"complete\""), std::string::npos);
    for (const auto& f : r.files) {
        EXPECT_NE(manifest.find(f), std::string::npos) << f;
        EXPECT_NE(slurp(r.directory / f).find(cfg.hash()), std::string::npos) << f;
    }
}

TEST(Runner, WorkersAndResumeGiveIdenticalFiles) {
    const auto out = scratch("resume");
    const std::vector<std::string> sets{"ensemble.n_sites=20", "ensemble.depth=30", "realizations=3",
                                        "samples=500",         "points=[4,8]",      "depth_step=6"};
    auto one = sets;
    one.push_back("workers=1");
    auto three = sets;
    three.push_back("workers=3");
    const auto a = run_experiment(cfg_for(ExperimentKind::OtocRecursive, one, out / "a"));
    const auto b = run_experiment(cfg_for(ExperimentKind::OtocRecursive, three, out / "b"));
    ASSERT_EQ(a.files, b.files);
    for (const auto& f : a.files) EXPECT_EQ(slurp(a.directory / f), slurp(b.directory / f)) << f;

    // interrupted run: some checkpoints survive, outputs are gone
    std::size_t kept = 0, i = 0;
    for (const auto& e : fs::directory_iterator(b.directory / "partial")) {
        if (i++ % 2) fs::remove(e.path());
        else ++kept;
    }
    for (const auto& f : b.files) fs::remove(b.directory / f);
    const auto c = run_experiment(cfg_for(ExperimentKind::OtocRecursive, three, out / "b"));
    EXPECT_EQ(c.resumed_tasks, kept);
    for (const auto& f : a.files) EXPECT_EQ(slurp(a.directory / f), slurp(c.directory / f)) << f;
}

TEST(Runner, StaleCheckpointIsRecomputed) {
    const auto out = scratch("stale");
    const auto cfg = cfg_for(ExperimentKind::Bitstrings, {"ensemble.n_sites=6", "ensemble.depth=10", "realizations=2"},
                             out);
    const auto a = run_experiment(cfg);
    const auto reference = slurp(a.directory / "histogram.csv");
    std::ofstream(a.directory / "partial" / "r00000.json") << R"({"config_hash":"0000000000000000","task":"r00000","data":{}})";
    const auto b = run_experiment(cfg);
    EXPECT_EQ(b.resumed_tasks, 1u);
    EXPECT_EQ(slurp(b.directory / "histogram.csv"), reference);
}

TEST(Runner, CostGuardRefusesBeforeWork) {
    const auto out = scratch("cost");
    const auto cfg = cfg_for(ExperimentKind::OtocRecursive, {"max_cost=1000"}, out);
    EXPECT_THROW(run_experiment(cfg), CapacityError);
}
