// Discrete-event cross-validation: the event walk must reproduce known
// stationary quantities, stay deterministic per seed, and expose the
// sensitivity of each marginal to the service discipline.

#include "doctest.h"

#include <cmath>
#include <vector>

#include "priq/errors.hpp"
#include "priq/inversion.hpp"
#include "priq/model.hpp"
#include "priq/pgf.hpp"
#include "priq/simulator.hpp"

namespace {

// Full (unconditional) marginal of the p-th lowest level: wait-conditional
// marginal from the transform scaled by the wait probability, plus the
// no-wait atom at zero.
std::vector<double> full_marginal(const priq::ModelParams& m, int p, int n_max) {
    priq::PgfEvaluator ev(m);
    const auto scheme = priq::plan_scheme(m, n_max);
    auto w = priq::invert_marginal(
        [&](priq::cplx z) { return ev.marginal_pgf(p, z); }, scheme, n_max);
    const auto eq = priq::erlang_quantities(m);
    for (auto& x : w) x *= 1.0 - eq.no_wait;
    w[0] += eq.no_wait;
    return w;
}

double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    const std::size_t n = std::max(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double x = i < a.size() ? a[i] : 0.0;
        const double y = i < b.size() ? b[i] : 0.0;
        acc += std::abs(x - y);
    }
    return 0.5 * acc;
}

priq::SimConfig two_level_config() {
    const std::vector<double> nu{0.5, 0.5};
    return priq::SimConfig{priq::ModelParams::from_fractions(0.7, nu, 3, 1.0),
                           100'000, 1'000'000, 11};
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("single-queue mean waiting count matches the closed form") {
    // One server at half load: mean waiting count is r^2/(1-r) = 1/2.
    const std::vector<double> lam{0.5};
    priq::SimConfig cfg{priq::ModelParams::from_rates(lam, 1.0, 1), 100'000,
                        1'000'000, 7};
    const auto res = simulate(cfg);
    CHECK(std::abs(res.level_mean[0] - 0.5) < 3.0 * res.level_mean_se[0]);
    CHECK(res.level_mean_se[0] < 0.01);
    CHECK(std::abs(res.empty_fraction - 0.5) < 3.0 * res.empty_fraction_se);
}

TEST_CASE("event averaging recovers the embedded-chain distribution") {
    // With one server at half load the transition-embedded chain reweights
    // states by their exit rates; its mean waiting count is 3/4, clearly
    // separated from the time-stationary 1/2.
    const std::vector<double> lam{0.5};
    priq::SimConfig cfg{priq::ModelParams::from_rates(lam, 1.0, 1), 100'000,
                        1'000'000, 7};
    cfg.sampling = priq::SamplingMode::EventAveraged;
    const auto res = simulate(cfg);
    CHECK(std::abs(res.level_mean[0] - 0.75) < 3.0 * res.level_mean_se[0]);
}

TEST_CASE("histograms are normalized with nonnegative bins") {
    const auto res = simulate(two_level_config());
    for (const auto& hist : res.level_hist) {
        double sum = 0.0;
        for (double x : hist) {
            CHECK(x >= 0.0);
            sum += x;
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    double busy_sum = 0.0, agg_sum = 0.0;
    for (double x : res.busy_hist) busy_sum += x;
    for (double x : res.aggregate_hist) agg_sum += x;
    CHECK(std::abs(busy_sum - 1.0) < 1e-12);
    CHECK(std::abs(agg_sum - 1.0) < 1e-12);
    CHECK(res.busy_hist.size() == 4);
    CHECK(res.sim_time > 0.0);
}

TEST_CASE("identical configs give identical results") {
    const auto cfg = two_level_config();
    const auto a = simulate(cfg);
    const auto b = simulate(cfg);
    CHECK(a.level_hist == b.level_hist);
    CHECK(a.busy_hist == b.busy_hist);
    CHECK(a.aggregate_hist == b.aggregate_hist);
    CHECK(a.sim_time == b.sim_time);
}

TEST_CASE("empty-system fraction matches the birth-death closed form") {
    const auto res = simulate(two_level_config());
    const auto eq = priq::erlang_quantities(two_level_config().model);
    CHECK(std::abs(res.empty_fraction - eq.p0) < 3.0 * res.empty_fraction_se);
    CHECK(res.empty_fraction_se < 0.005);
}

TEST_CASE("per-level marginals match the transform route") {
    const auto cfg = two_level_config();
    const auto res = simulate(cfg);
    const std::vector<std::vector<double>> ana{full_marginal(cfg.model, 2, 60),
                                               full_marginal(cfg.model, 1, 60)};
    const auto cmp = compare_marginals(res, ana);
    REQUIRE(cmp.size() == 2);
    CHECK(cmp[0].level == 0);
    CHECK(cmp[0].tv < 5e-3);
    CHECK(cmp[1].tv < 8e-3);
    CHECK(cmp[0].max_z > 0.0);

    // The highest-priority marginal also has a direct closed form.
    std::vector<double> hi(res.level_hist[0].size());
    for (std::size_t n = 0; n < hi.size(); ++n)
        hi[n] = priq::high_priority_marginal(cfg.model, static_cast<int>(n));
    CHECK(tv_distance(res.level_hist[0], hi) < 5e-3);
}

TEST_CASE("comparing a result against its own histograms gives zero distance") {
    const auto res = simulate(two_level_config());
    const auto cmp = compare_marginals(res, res.level_hist);
    for (const auto& row : cmp) {
        CHECK(row.tv == 0.0);
        CHECK(row.max_z == 0.0);
    }
}

TEST_CASE("preemption changes the per-level marginals but not the aggregate") {
    const auto cfg = two_level_config();
    const auto base = simulate(cfg);
    auto pre_cfg = cfg;
    pre_cfg.discipline = priq::Discipline::Preemptive;
    pre_cfg.seed = 12;
    const auto pre = simulate(pre_cfg);

    // Work conservation with identical service rates makes the total count
    // process discipline-free, so the aggregate histogram stays put while
    // both per-level marginals move. The highest level moves the most: it
    // stops waiting behind in-service lower-priority clients.
    CHECK(tv_distance(base.aggregate_hist, pre.aggregate_hist) < 0.02);
    CHECK(tv_distance(base.level_hist[0], pre.level_hist[0]) > 0.05);
    CHECK(tv_distance(base.level_hist[1], pre.level_hist[1]) > 0.02);
}

TEST_CASE("configuration rejections") {
    const std::vector<double> zero{0.0, 0.0};
    CHECK_THROWS_AS(priq::ModelParams::from_loads(zero, 2, 1.0),
                    priq::ValidationError);

    auto cfg = two_level_config();
    cfg.sample_events = 16;  // fewer events than batches
    CHECK_THROWS_AS(simulate(cfg), priq::ValidationError);

    const auto res = simulate(two_level_config());
    const std::vector<std::vector<double>> wrong_levels{{1.0}};
    CHECK_THROWS_AS(compare_marginals(res, wrong_levels), priq::ValidationError);
    const std::vector<std::vector<double>> empty_marginal{{1.0}, {}};
    CHECK_THROWS_AS(compare_marginals(res, empty_marginal), priq::ValidationError);
}

}  // TEST_SUITE
