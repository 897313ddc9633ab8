// Serial reference against the OpenMP kernels.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "aci/experiment.hpp"
#include "aci/model.hpp"
#include "aci/simulator.hpp"

using namespace aci;

namespace {

Execution mode(const benchmark::State& state) {
    return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

void label(benchmark::State& state) {
    state.SetLabel(state.range(0) == 0 ? "serial" : "parallel x" + std::to_string(max_threads()));
}

void BM_ViolationRates(benchmark::State& state) {
    const auto cfg = calibrate_defaults();
    const auto n = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(violation_rates(cfg, n, 7, mode(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n) * kCandidateCount);
    label(state);
}
BENCHMARK(BM_ViolationRates)->ArgsProduct({{0, 1}, {1000, 10000}})->Unit(benchmark::kMillisecond);

void BM_Moments(benchmark::State& state) {
    std::mt19937 gen(1);
    std::uniform_real_distribution<double> u(1.0, 100.0);
    std::vector<Point> pts(static_cast<std::size_t>(state.range(1)));
    for (auto& p : pts) {
        p.x = u(gen);
        p.y = 1.0 + 0.0056 * p.x * p.x;
    }
    for (auto _ : state) benchmark::DoNotOptimize(accumulate_moments(pts, 2, mode(state)));
    state.SetItemsProcessed(state.iterations() * state.range(1));
    label(state);
}
BENCHMARK(BM_Moments)->ArgsProduct({{0, 1}, {2500, 100000}})->Unit(benchmark::kMicrosecond);

void BM_SeedSweep(benchmark::State& state) {
    ExperimentSpec spec;
    spec.cycles = 100;
    const auto seeds = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(run_seed_sweep(spec, 1, seeds, mode(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(seeds));
    label(state);
}
BENCHMARK(BM_SeedSweep)->ArgsProduct({{0, 1}, {10}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
