#include "priq/pgf.hpp"

#include <cmath>
#include <string>

namespace priq {

namespace {

constexpr double kPoleTol = 1e-13;
constexpr double kDegenerateTol = 1e-14;

// Roots of x^2 - b x + c = 0 without subtractive cancellation: pick the
// sign that grows |b + s*sqrt(disc)|, recover the other root from the
// product.  The returned pair is ordered by modulus, largest first.
RootPair stable_quadratic(cplx b, cplx c) {
    const cplx disc = b * b - 4.0 * c;
    cplx sq = std::sqrt(disc);
    if (std::real(std::conj(b) * sq) < 0.0) sq = -sq;
    RootPair out{};
    out.plus = 0.5 * (b + sq);
    out.minus = (out.plus == cplx{0.0, 0.0}) ? cplx{0.0, 0.0} : c / out.plus;
    out.degenerate = std::abs(disc) < kDegenerateTol;
    return out;
}

cplx cpow_int(cplx base, int e) {
    cplx acc{1.0, 0.0};
    cplx b = base;
    for (int n = e; n > 0; n >>= 1) {
        if (n & 1) acc *= b;
        b *= b;
    }
    return acc;
}

}  // namespace

PgfEvaluator::PgfEvaluator(ModelParams m) : model_(std::move(m)) {
    const int levels = model_.levels();
    rev_load_.resize(static_cast<std::size_t>(levels));
    for (int k = 0; k < levels; ++k)
        rev_load_[static_cast<std::size_t>(k)] = model_.load(levels - 1 - k);
}

cplx PgfEvaluator::beta(std::span<const cplx> z, int prefix_len) const {
    if (prefix_len < 0 || prefix_len > levels() - 1)
        throw ValidationError("PrefixOutOfRange",
                              "prefix length must lie in [0, levels-1]");
    if (static_cast<std::size_t>(prefix_len) > z.size())
        throw ValidationError("DimensionMismatch", "prefix longer than argument vector");
    cplx acc{0.0, 0.0};
    for (int k = 0; k < prefix_len; ++k)
        acc += z[static_cast<std::size_t>(k)] * rev_load_[static_cast<std::size_t>(k)];
    return acc;
}

RootPair PgfEvaluator::zeta(std::span<const cplx> z, int prefix_len) const {
    const cplx b = 1.0 + model_.total_load() - beta(z, prefix_len);
    const double untracked = model_.sigma(levels() - prefix_len);
    return stable_quadratic(b, cplx{untracked, 0.0});
}

cplx PgfEvaluator::g0(std::span<const cplx> z, G0Form form) const {
    const int d = levels() - 1;
    if (z.size() != static_cast<std::size_t>(d))
        throw ValidationError("DimensionMismatch",
                              "g0 expects exactly levels-1 arguments");
    const double total = model_.total_load();
    cplx acc{1.0 - total, 0.0};
    cplx beta_run{0.0, 0.0};
    RootPair prev = stable_quadratic(cplx{1.0 + total, 0.0}, cplx{total, 0.0});
    for (int k = 1; k <= d; ++k) {
        const cplx zk = z[static_cast<std::size_t>(k - 1)];
        beta_run += zk * rev_load_[static_cast<std::size_t>(k - 1)];
        const RootPair cur =
            stable_quadratic(1.0 + total - beta_run, cplx{model_.sigma(levels() - k), 0.0});
        const cplx num = (form == G0Form::Plus) ? 1.0 - zk * prev.plus : 1.0 - zk * cur.minus;
        const cplx den = (form == G0Form::Plus) ? 1.0 - zk * cur.plus : 1.0 - zk * prev.minus;
        if (std::abs(den) < kPoleTol)
            throw NumericError("PoleProximity",
                               "generating-function factor denominator within " +
                                   std::to_string(kPoleTol) + " of zero");
        acc *= num / den;
        prev = cur;
    }
    return acc;
}

cplx PgfEvaluator::g(int ell, std::span<const cplx> z, G0Form form) const {
    if (ell < 0) throw ValidationError("NegativeIndex", "slice index must be >= 0");
    return g0(z, form) * cpow_int(zeta(z, levels() - 1).minus, ell);
}

std::pair<cplx, cplx> PgfEvaluator::g0_and_root(std::span<const cplx> z) const {
    const int d = levels() - 1;
    if (z.size() != static_cast<std::size_t>(d))
        throw ValidationError("DimensionMismatch",
                              "g0 expects exactly levels-1 arguments");
    const double total = model_.total_load();
    cplx acc{1.0 - total, 0.0};
    cplx beta_run{0.0, 0.0};
    cplx prev_minus{total, 0.0};
    for (int k = 1; k <= d; ++k) {
        const cplx zk = z[static_cast<std::size_t>(k - 1)];
        beta_run += zk * rev_load_[static_cast<std::size_t>(k - 1)];
        const RootPair cur =
            stable_quadratic(1.0 + total - beta_run, cplx{model_.sigma(levels() - k), 0.0});
        const cplx den = 1.0 - zk * prev_minus;
        if (std::abs(den) < kPoleTol)
            throw NumericError("PoleProximity",
                               "generating-function factor denominator within " +
                                   std::to_string(kPoleTol) + " of zero");
        acc *= (1.0 - zk * cur.minus) / den;
        prev_minus = cur.minus;
    }
    return {acc, prev_minus};
}

cplx PgfEvaluator::marginal_pgf(int p, cplx z) const {
    if (p < 1 || p > levels())
        throw ValidationError("LevelOutOfRange", "marginal level must lie in [1, levels]");
    const double lo = model_.load(levels() - p);     // the tracked level
    const double hi = model_.sigma(levels() - p);    // everything above it
    const double sum = model_.sigma(levels() - p + 1);
    const RootPair roots = stable_quadratic(1.0 + sum - lo * z, cplx{hi, 0.0});
    const cplx den = roots.plus - sum;
    if (std::abs(den) < kPoleTol)
        throw NumericError("PoleProximity", "marginal evaluated at its pole");
    return (1.0 - sum) / den;
}

cplx PgfEvaluator::aggregate_pgf(int p, cplx u) const {
    if (p < 1 || p > levels())
        throw ValidationError("LevelOutOfRange", "aggregate depth must lie in [1, levels]");
    const double s = model_.sigma(p);
    const cplx den = 1.0 - s * u;
    if (std::abs(den) < kPoleTol)
        throw NumericError("PoleProximity", "aggregate evaluated at its pole");
    return (1.0 - s) / den;
}

double PgfEvaluator::exclusively_high_pmf(int ell) const {
    if (ell < 0) throw ValidationError("NegativeIndex", "queue length must be >= 0");
    const std::vector<cplx> zeros(static_cast<std::size_t>(levels() - 1), cplx{0.0, 0.0});
    const cplx root = zeta(zeros, levels() - 1).minus;
    return (1.0 - model_.total_load()) * std::pow(std::real(root), ell);
}

double PgfEvaluator::exclusively_low_pmf(const ModelParams& m, int n,
                                         std::span<const double> low_marginal) {
    if (n < 0) throw ValidationError("NegativeIndex", "queue length must be >= 0");
    if (n == 0) return 1.0 - m.total_load();
    if (static_cast<std::size_t>(n - 1) >= low_marginal.size())
        throw ValidationError("MissingMarginal",
                              "lowest-level marginal too short for requested index");
    return m.load(m.levels() - 1) * low_marginal[static_cast<std::size_t>(n - 1)];
}

}  // namespace priq
