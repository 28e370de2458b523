#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "priq/model.hpp"
#include "priq/pgf.hpp"
#include "test_util.hpp"

using priq::cplx;
using priq::G0Form;
using priq::ModelParams;
using priq::PgfEvaluator;

namespace {

ModelParams random_model(testutil::Rng& rng, int levels, double total) {
    const auto nu = rng.fractions(levels);
    return ModelParams::from_fractions(total, nu, rng.uniform_int(1, 6));
}

std::vector<cplx> random_args(testutil::Rng& rng, int count, double radius) {
    std::vector<cplx> z(static_cast<std::size_t>(count));
    for (auto& v : z) v = rng.in_disc(radius);
    return z;
}

}  // namespace

TEST_SUITE_BEGIN("pgf");

TEST_CASE("empty prefix follows the boundary conventions") {
    testutil::Rng rng(11);
    const auto m = random_model(rng, 4, 0.8);
    const PgfEvaluator e(m);
    const auto z = random_args(rng, 3, 1.2);
    CHECK(e.beta(z, 0) == cplx{0.0, 0.0});
    const auto roots = e.zeta(z, 0);
    CHECK(std::abs(roots.plus - 1.0) < 1e-14);
    CHECK(std::abs(roots.minus - m.total_load()) < 1e-14);
}

TEST_CASE("root pairs satisfy sum and product identities at random points") {
    testutil::Rng rng(12);
    for (int trial = 0; trial < 1000; ++trial) {
        const int levels = rng.uniform_int(2, 6);
        const auto m = random_model(rng, levels, rng.uniform(0.1, 0.95));
        const PgfEvaluator e(m);
        const auto z = random_args(rng, levels - 1, 1.2);
        const int prefix = rng.uniform_int(0, levels - 1);
        const auto roots = e.zeta(z, prefix);
        const cplx b = 1.0 + m.total_load() - e.beta(z, prefix);
        const double sig = m.sigma(levels - prefix);
        CHECK(std::abs(roots.plus + roots.minus - b) <= 1e-13 * std::abs(b));
        CHECK(std::abs(roots.plus * roots.minus - sig) <=
              1e-13 * std::max(sig, 1.0));
        CHECK(std::abs(roots.plus) >= std::abs(roots.minus));
    }
}

TEST_CASE("at the all-ones point the roots are 1 and the untracked load") {
    testutil::Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const int levels = rng.uniform_int(2, 7);
        const auto m = random_model(rng, levels, rng.uniform(0.2, 0.9));
        const PgfEvaluator e(m);
        const std::vector<cplx> ones(static_cast<std::size_t>(levels - 1), cplx{1.0, 0.0});
        for (int prefix = 0; prefix <= levels - 1; ++prefix) {
            const double sig = m.sigma(levels - prefix);
            const cplx b = e.beta(ones, prefix);
            CHECK(std::abs(b - (m.total_load() - sig)) < 1e-14);
            const auto roots = e.zeta(ones, prefix);
            CHECK(std::abs(roots.plus - 1.0) < 1e-13);
            CHECK(std::abs(roots.minus - sig) < 1e-13);
        }
    }
}

TEST_CASE("adjacent prefixes agree on the cross-factor product") {
    // (1 - z q_plus')(1 - z q_minus') == (1 - z q_plus)(1 - z q_minus)
    // with z the coordinate joining prefix kappa-1 to kappa.
    testutil::Rng rng(14);
    for (int trial = 0; trial < 400; ++trial) {
        const int levels = rng.uniform_int(2, 6);
        const auto m = random_model(rng, levels, rng.uniform(0.1, 0.95));
        const PgfEvaluator e(m);
        const auto z = random_args(rng, levels - 1, 1.2);
        const int kappa = rng.uniform_int(1, levels - 1);
        const auto prev = e.zeta(z, kappa - 1);
        const auto cur = e.zeta(z, kappa);
        const cplx zk = z[static_cast<std::size_t>(kappa - 1)];
        const cplx lhs = (1.0 - zk * prev.plus) * (1.0 - zk * prev.minus);
        const cplx rhs = (1.0 - zk * cur.plus) * (1.0 - zk * cur.minus);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), 1.0));
    }
}

TEST_CASE("two-level cross product collapses to a linear factor") {
    testutil::Rng rng(15);
    for (int trial = 0; trial < 200; ++trial) {
        const std::vector<double> nu{rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)};
        const auto m = ModelParams::from_fractions(rng.uniform(0.1, 0.95), nu, 2);
        const PgfEvaluator e(m);
        const std::vector<cplx> z{rng.in_disc(1.2)};
        const auto roots = e.zeta(z, 1);
        const cplx lhs = (1.0 - roots.plus) * (1.0 - roots.minus);
        const cplx rhs = m.load(1) * (z[0] - 1.0);
        CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(std::abs(rhs), 1e-3));
    }
}

TEST_CASE("the two product forms of g0 agree inside the convergence region") {
    testutil::Rng rng(16);
    for (int trial = 0; trial < 100; ++trial) {
        const int levels = rng.uniform_int(2, 6);
        const double total = rng.uniform(0.2, 0.9);
        const auto m = random_model(rng, levels, total);
        const PgfEvaluator e(m);
        const auto z = random_args(rng, levels - 1, 0.95 / total);
        const cplx plus = e.g0(z, G0Form::Plus);
        const cplx minus = e.g0(z, G0Form::Minus);
        CHECK(std::abs(plus - minus) <= 1e-12 * std::abs(minus));
    }
}

TEST_CASE("g at the all-ones point reproduces the aggregate-free slice weights") {
    testutil::Rng rng(17);
    const auto m = random_model(rng, 3, 0.6);
    const PgfEvaluator e(m);
    const std::vector<cplx> ones(2, cplx{1.0, 0.0});
    // Slice generating values at z = 1: (1 - r1) r1^ell.
    const double r1 = m.load(0);
    for (int ell : {0, 1, 2, 5}) {
        const cplx v = e.g(ell, ones);
        CHECK(std::abs(v - (1.0 - r1) * std::pow(r1, ell)) < 1e-13);
    }
}

TEST_CASE("summing slices against a weight reproduces the aggregate form") {
    // sum_ell u^ell g_ell(w) = g0(w) / (1 - u * root(w)); with w carrying u on
    // the p-1 highest tracked levels and 1 elsewhere this must collapse to
    // the geometric aggregate of the p highest levels.
    testutil::Rng rng(18);
    for (int trial = 0; trial < 100; ++trial) {
        const int levels = rng.uniform_int(2, 6);
        const auto m = random_model(rng, levels, rng.uniform(0.2, 0.9));
        const PgfEvaluator e(m);
        const int p = rng.uniform_int(1, levels);
        const cplx u = rng.in_disc(0.9);
        std::vector<cplx> w(static_cast<std::size_t>(levels - 1), cplx{1.0, 0.0});
        for (int j = levels - p; j < levels - 1; ++j) w[static_cast<std::size_t>(j)] = u;
        const auto [base, root] = e.g0_and_root(w);
        const cplx lhs = base / (1.0 - u * root);
        const cplx rhs = e.aggregate_pgf(p, u);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
    }
}

TEST_CASE("marginal pgf matches the slice-sum route") {
    testutil::Rng rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        const int levels = rng.uniform_int(2, 5);
        const auto m = random_model(rng, levels, rng.uniform(0.2, 0.9));
        const PgfEvaluator e(m);
        const cplx zv = rng.in_disc(0.95);
        for (int p = 1; p <= levels; ++p) {
            cplx lhs;
            if (p == levels) {
                // Highest level: weight the slice index itself.
                const std::vector<cplx> ones(static_cast<std::size_t>(levels - 1),
                                             cplx{1.0, 0.0});
                const auto [base, root] = e.g0_and_root(ones);
                lhs = base / (1.0 - zv * root);
            } else {
                std::vector<cplx> w(static_cast<std::size_t>(levels - 1), cplx{1.0, 0.0});
                w[static_cast<std::size_t>(p - 1)] = zv;
                const auto [base, root] = e.g0_and_root(w);
                lhs = base / (1.0 - root);
            }
            const cplx rhs = e.marginal_pgf(p, zv);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
        }
    }
}

TEST_CASE("marginal and aggregate forms normalize at one") {
    testutil::Rng rng(20);
    const auto m = random_model(rng, 5, 0.85);
    const PgfEvaluator e(m);
    for (int p = 1; p <= 5; ++p) {
        CHECK(std::abs(e.marginal_pgf(p, cplx{1.0, 0.0}) - 1.0) < 1e-13);
        CHECK(std::abs(e.aggregate_pgf(p, cplx{1.0, 0.0}) - 1.0) < 1e-13);
    }
}

TEST_CASE("dropping the high-side variables aggregates the top levels") {
    testutil::Rng rng(21);
    const std::vector<double> nu{0.2, 0.1, 0.4, 0.3};
    const auto m4 = ModelParams::from_fractions(0.8, nu, 3);
    // Top two levels merged into one class.
    const std::vector<double> nu3{0.3, 0.4, 0.3};
    const auto m3 = ModelParams::from_fractions(0.8, nu3, 3);
    const PgfEvaluator e4(m4);
    const PgfEvaluator e3(m3);
    for (int trial = 0; trial < 50; ++trial) {
        const cplx z1 = rng.in_disc(1.1);
        const cplx z2 = rng.in_disc(1.1);
        const std::vector<cplx> zfull{z1, z2, cplx{0.0, 0.0}};
        const std::vector<cplx> zred{z1, z2};
        const cplx lhs = e4.g0(zfull);
        const cplx rhs = e3.g0(zred);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
    }
}

TEST_CASE("exclusively-high weights solve the full-prefix quadratic at zero") {
    testutil::Rng rng(22);
    const auto m = random_model(rng, 4, 0.9);
    const PgfEvaluator e(m);
    const double total = m.total_load();
    const double root = e.exclusively_high_pmf(1) / e.exclusively_high_pmf(0);
    CHECK(std::abs(root * root - (1.0 + total) * root + m.sigma(1)) < 1e-14);
    CHECK(e.exclusively_high_pmf(0) == doctest::Approx(1.0 - total).epsilon(1e-15));
    // Explicit closed form of the smaller root.
    const double direct =
        0.5 * (1.0 + total - std::sqrt((1.0 + total) * (1.0 + total) - 4.0 * m.sigma(1)));
    CHECK(root == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("exclusively-low values delegate to the lowest marginal") {
    const std::vector<double> nu{1.0, 1.0};
    const auto m = ModelParams::from_fractions(0.5, nu, 1);
    const std::vector<double> lo{0.4, 0.2, 0.1};
    CHECK(PgfEvaluator::exclusively_low_pmf(m, 0, lo) == doctest::Approx(0.5));
    CHECK(PgfEvaluator::exclusively_low_pmf(m, 2, lo) ==
          doctest::Approx(0.25 * 0.2).epsilon(1e-15));
    CHECK_THROWS_AS((void)PgfEvaluator::exclusively_low_pmf(m, 4, lo),
                    priq::ValidationError);
}

TEST_CASE("near-coincident roots raise the degenerate flag") {
    const std::vector<double> nu{1.0, 1.0};
    const auto m = ModelParams::from_fractions(0.5, nu, 1);  // loads 0.25, 0.25
    const PgfEvaluator e(m);
    // Choose z so the prefix-1 discriminant vanishes: b = 2 sqrt(r1).
    const double z_deg = (1.5 - 2.0 * std::sqrt(0.25)) / 0.25;
    const std::vector<cplx> z{cplx{z_deg, 0.0}};
    CHECK(e.zeta(z, 1).degenerate);
    const std::vector<cplx> z2{cplx{0.3, 0.0}};
    CHECK_FALSE(e.zeta(z2, 1).degenerate);
}

TEST_CASE("evaluation at a factor pole is refused") {
    const std::vector<double> nu{1.0, 1.0};
    const auto m = ModelParams::from_fractions(0.5, nu, 1);
    const PgfEvaluator e(m);
    const std::vector<cplx> z{cplx{2.0, 0.0}};  // z = 1/r
    CHECK_THROWS_AS((void)e.g0(z, G0Form::Minus), priq::NumericError);
    try {
        (void)e.g0(z, G0Form::Minus);
    } catch (const priq::NumericError& err) {
        CHECK(err.code() == "PoleProximity");
    }
}

TEST_CASE("argument shape errors are rejected") {
    const std::vector<double> nu{1.0, 1.0, 1.0};
    const auto m = ModelParams::from_fractions(0.6, nu, 2);
    const PgfEvaluator e(m);
    const std::vector<cplx> z{cplx{0.1, 0.0}};
    CHECK_THROWS_AS((void)e.g0(z), priq::ValidationError);
    CHECK_THROWS_AS((void)e.zeta(z, 3), priq::ValidationError);
    CHECK_THROWS_AS((void)e.marginal_pgf(0, cplx{0.5, 0.0}), priq::ValidationError);
    CHECK_THROWS_AS((void)e.marginal_pgf(4, cplx{0.5, 0.0}), priq::ValidationError);
    CHECK_THROWS_AS((void)e.aggregate_pgf(0, cplx{0.5, 0.0}), priq::ValidationError);
}

TEST_SUITE_END();
