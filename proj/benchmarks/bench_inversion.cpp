// Transform-route benchmarks.  The headline comparison: a four-radius
// mixture of length-N transforms versus one plain transform of length M*N
// reaching the same alias depth.  Cost scales per transform axis, so the
// mixture should sit near M^(K-2) of the single-circle time at equal
// accuracy, a large saving once K grows.

#include <benchmark/benchmark.h>

#include "priq/inversion.hpp"
#include "priq/model.hpp"
#include "priq/pgf.hpp"

namespace {

priq::ModelParams model_for(int levels, double r = 0.9) {
    std::vector<double> nu(static_cast<std::size_t>(levels),
                           1.0 / static_cast<double>(levels));
    return priq::ModelParams::from_fractions(r, nu, 4, 1.0);
}

void invert_with(benchmark::State& state, int levels, int components, int n_fft,
                 int n_max) {
    const auto m = model_for(levels);
    const priq::PgfEvaluator ev(m);
    // Equal alias budget: alpha digits spread over components * n_fft.
    const auto scheme = priq::plan_scheme(m, n_max, components, components > 1 ? 0.05 : 0.0,
                                          12.0, n_fft);
    for (auto _ : state) {
        auto pmf = priq::invert_joint(ev, scheme, n_max);
        benchmark::DoNotOptimize(pmf.values.storage().data());
    }
    state.SetLabel("n_fft=" + std::to_string(n_fft) + " M=" + std::to_string(components));
}

void BM_JointMixture(benchmark::State& state) {
    invert_with(state, static_cast<int>(state.range(0)), 4,
                static_cast<int>(state.range(1)), static_cast<int>(state.range(1)) - 1);
}

void BM_JointSingleCircle(benchmark::State& state) {
    // Same reachable depth as the mixture four times shorter.
    invert_with(state, static_cast<int>(state.range(0)), 1,
                4 * static_cast<int>(state.range(1)), static_cast<int>(state.range(1)) - 1);
}

void BM_MarginalInversion(benchmark::State& state) {
    const auto m = model_for(2);
    const priq::PgfEvaluator ev(m);
    const int n_max = static_cast<int>(state.range(0));
    // The budget must grow with the transform length, or the planned radius
    // drifts onto the convergence boundary; keep the radius of the default
    // 128-point scheme.
    int n_fft = 1;
    while (n_fft <= n_max) n_fft *= 2;
    const auto scheme = priq::plan_scheme(m, n_max, 4, 0.05, 12.0 * n_fft / 128.0);
    for (auto _ : state) {
        auto w = priq::invert_marginal(
            [&](priq::cplx z) { return ev.marginal_pgf(1, z); }, scheme, n_max);
        benchmark::DoNotOptimize(w.data());
    }
}

}  // namespace

BENCHMARK(BM_JointMixture)
    ->ArgsProduct({{3, 4}, {64, 128, 256}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JointSingleCircle)
    ->ArgsProduct({{3, 4}, {64, 128, 256}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MarginalInversion)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
