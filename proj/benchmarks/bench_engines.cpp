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

#include <benchmark/benchmark.h>

#include <memory>

#include "alab/automaton.hpp"
#include "alab/dense.hpp"
#include "alab/metrics.hpp"
#include "alab/otoc.hpp"

using namespace alab;

namespace {

Circuit make_circuit(std::size_t n, std::size_t depth, std::uint64_t seed = 1) {
    EnsembleSpec e;
    e.n_sites = n;
    e.depth = depth;
    e.master_seed = seed;
    return build_brickwork(e);
}

}  // namespace

// One trajectory at a time through the generic gate interpreter.
static void BM_EvolveScalar(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Circuit c = make_circuit(n, 100);
    Trajectory t;
    t.bits = BitString(n);
    for (auto _ : state) {
        evolve(t, c);
        benchmark::DoNotOptimize(t.phase);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EvolveScalar)->Arg(16)->Arg(64)->Arg(100);

// 64 lanes per pass; items are trajectories, so compare directly with BM_EvolveScalar.
static void BM_EvolveBatch(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const FlatCircuit c(make_circuit(n, 100));
    TrajectoryBatch b(n);
    for (auto _ : state) {
        b.apply(c, +1);
        benchmark::DoNotOptimize(b.words().data());
    }
    state.SetItemsProcessed(state.iterations() * TrajectoryBatch::kLanes);
}
BENCHMARK(BM_EvolveBatch)->Arg(16)->Arg(64)->Arg(100);

// Cost per trajectory should grow linearly in depth.
static void BM_EvolveDepth(benchmark::State& state) {
    const auto depth = static_cast<std::size_t>(state.range(0));
    const FlatCircuit c(make_circuit(100, depth));
    TrajectoryBatch b(100);
    for (auto _ : state) {
        b.apply(c, +1);
        benchmark::DoNotOptimize(b.words().data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EvolveDepth)->RangeMultiplier(2)->Range(25, 800)->Complexity(benchmark::oN);

static void BM_McOtoc(benchmark::State& state) {
    const auto c = std::make_shared<const Circuit>(make_circuit(100, 200));
    const auto word = compile(expand_recursive(recursive_probe_sites(100, 8), 0), c);
    const auto psi = ProductState::all_plus(100);
    for (auto _ : state) benchmark::DoNotOptimize(mc_expectation(word, psi, 1024, 7));
    state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_McOtoc);

static void BM_DenseLayer(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Circuit c = make_circuit(n, 1);
    StateVector s = StateVector::from_product(ProductState::all_plus(n));
    for (auto _ : state) {
        s.apply_circuit(c);
        benchmark::DoNotOptimize(s.amps().data());
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(s.dim() * sizeof(StateVector::Amp)));
}
BENCHMARK(BM_DenseLayer)->DenseRange(12, 20, 4);

static void BM_SchmidtHalfCut(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    StateVector s = StateVector::from_product(ProductState::all_plus(n));
    s.apply_circuit(make_circuit(n, 50));
    const auto cut = half_cut(n);
    for (auto _ : state) benchmark::DoNotOptimize(von_neumann(schmidt(s, cut)));
}
BENCHMARK(BM_SchmidtHalfCut)->DenseRange(10, 16, 2);

BENCHMARK_MAIN();
