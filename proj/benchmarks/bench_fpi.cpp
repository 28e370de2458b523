// Fixed-point route benchmarks: cost per model size and load.  Iteration
// count grows like 1 / (1 - r) toward saturation while the per-sweep cost
// is the lattice volume, so the two axes separate cleanly.

#include <benchmark/benchmark.h>

#include "priq/fpi.hpp"
#include "priq/model.hpp"

namespace {

priq::ModelParams model_for(int levels, double r) {
    std::vector<double> nu(static_cast<std::size_t>(levels),
                           1.0 / static_cast<double>(levels));
    return priq::ModelParams::from_fractions(r, nu, 4, 1.0);
}

void BM_FpiDepth(benchmark::State& state) {
    const auto m = model_for(2, 0.7);
    const int n_max = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto pmf = priq::run_fpi(m, n_max);
        benchmark::DoNotOptimize(pmf.values.storage().data());
    }
}

void BM_FpiLoad(benchmark::State& state) {
    const double r = static_cast<double>(state.range(0)) / 100.0;
    const auto m = model_for(2, r);
    for (auto _ : state) {
        auto pmf = priq::run_fpi(m, 60);
        benchmark::DoNotOptimize(pmf.values.storage().data());
    }
    state.SetLabel("r=" + std::to_string(r));
}

void BM_FpiLevels(benchmark::State& state) {
    const auto m = model_for(static_cast<int>(state.range(0)), 0.7);
    for (auto _ : state) {
        auto pmf = priq::run_fpi(m, 20);
        benchmark::DoNotOptimize(pmf.values.storage().data());
    }
}

}  // namespace

BENCHMARK(BM_FpiDepth)->Arg(40)->Arg(80)->Arg(160)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FpiLoad)->Arg(50)->Arg(70)->Arg(90)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FpiLevels)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
