#include <cmath>
#include <map>
#include <random>

#include <benchmark/benchmark.h>

#include "lineage/disruption.hpp"
#include "lineage/graph.hpp"
#include "lineage/stats.hpp"
#include "lineage/structure.hpp"
#include "lineage/synth.hpp"

using namespace lineage;

namespace {

const ingest::Snapshot& snapshot(std::size_t nodes) {
    static std::map<std::size_t, ingest::Snapshot> cache;
    auto it = cache.find(nodes);
    if (it == cache.end()) {
        synth::SynthOptions o;
        o.nodes = nodes;
        o.seed = 1;
        it = cache.emplace(nodes, synth::generate(o)).first;
    }
    return it->second;
}

const graph::LineageGraph& graph_of(std::size_t nodes) {
    static std::map<std::size_t, graph::LineageGraph> cache;
    auto it = cache.find(nodes);
    if (it == cache.end()) {
        it = cache.emplace(nodes, graph::build_graph(snapshot(nodes)).graph).first;
    }
    return it->second;
}

void BM_BuildGraph(benchmark::State& state) {
    const auto& snap = snapshot(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(graph::build_graph(snap));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildGraph)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_MdiSweep(benchmark::State& state) {
    const auto& g = graph_of(state.range(0));
    disruption::SweepOptions o;
    o.windows = {30, 60, 90, 120, 150, 180};
    o.workers = static_cast<unsigned>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(disruption::mdi_sweep(g, o));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MdiSweep)->Args({100'000, 1})->Args({100'000, 4})->Unit(benchmark::kMillisecond);

void BM_Wcc(benchmark::State& state) {
    const auto& g = graph_of(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(structure::weakly_connected_components(g));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Wcc)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_PowerLawFit(benchmark::State& state) {
    const auto dist = structure::in_degrees(graph_of(100'000), structure::Scope::overall);
    const auto estimator = static_cast<structure::PowerLawEstimator>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(structure::fit_power_law(dist, std::nullopt, estimator));
    }
}
BENCHMARK(BM_PowerLawFit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Lowess(benchmark::State& state) {
    std::mt19937_64 rng{3};
    std::uniform_int_distribution<int> degree{1, 400};
    std::normal_distribution<double> noise{0.0, 0.3};
    std::vector<double> x, y;
    for (std::int64_t i = 0; i < state.range(0); ++i) {
        x.push_back(degree(rng));
        y.push_back(std::tanh((x.back() - 150.0) / 80.0) + noise(rng));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(analytics::lowess(x, y));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Lowess)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
