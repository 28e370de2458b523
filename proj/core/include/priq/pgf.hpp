#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "priq/model.hpp"

namespace priq {

using cplx = std::complex<double>;

// The zero-highest-queue generating function is a product of ratios; the two
// algebraically equal arrangements differ numerically.  Plus keeps the
// larger root in the denominators, Minus keeps everything singularity-free
// inside the convergence region and is the form evaluated on contours.
enum class G0Form { Plus, Minus };

struct RootPair {
    cplx plus;        // larger-modulus root of the prefix quadratic
    cplx minus;       // companion root, sigma / plus
    bool degenerate;  // discriminant within 1e-14 of zero: roots nearly collide
};

// Evaluator for the stationary joint queue-length generating function,
// conditioned on all servers being busy.  Arguments z are ordered from the
// lowest priority level upward: z[0] tracks level K, z[K-2] tracks level 2.
// The highest level's count is exposed through the slice index ell, not a
// transform variable.
class PgfEvaluator {
public:
    explicit PgfEvaluator(ModelParams m);

    const ModelParams& model() const noexcept { return model_; }
    int levels() const noexcept { return model_.levels(); }

    // Weighted load of the prefix_len lowest tracked levels,
    // sum over k < prefix_len of z[k] * load of level K-1-k.
    cplx beta(std::span<const cplx> z, int prefix_len) const;

    // Roots of the prefix characteristic quadratic
    //   x^2 - (1 + r - beta) x + sigma_untracked = 0,
    // branch-stable anywhere strictly inside |z| < 1/r (see zeta tests).
    RootPair zeta(std::span<const cplx> z, int prefix_len) const;

    cplx g0(std::span<const cplx> z, G0Form form = G0Form::Minus) const;

    // Generating function of the joint distribution restricted to highest
    // queue length ell: g0 times the full-prefix minus-root to the ell.
    cplx g(int ell, std::span<const cplx> z, G0Form form = G0Form::Minus) const;

    // One pass over the prefixes: (g0 in Minus form, full-prefix minus root).
    // This is the contour-evaluation workhorse.
    std::pair<cplx, cplx> g0_and_root(std::span<const cplx> z) const;

    // Wait-conditional marginal PGF of the p-th lowest level (p = 1 is the
    // lowest, p = K the highest), through the two-level reduction: everything
    // above the level acts as one aggregate class, everything below vanishes.
    cplx marginal_pgf(int p, cplx z) const;

    // Wait-conditional PGF of the combined count of the p highest levels.
    cplx aggregate_pgf(int p, cplx u) const;

    // P(highest queue = ell, all lower queues empty), closed form.
    double exclusively_high_pmf(int ell) const;

    // P(all queues empty except the lowest at n), expressed through the
    // wait-conditional marginal of the lowest level.
    static double exclusively_low_pmf(const ModelParams& m, int n,
                                      std::span<const double> low_marginal);

private:
    ModelParams model_;
    std::vector<double> rev_load_;  // rev_load_[k] = load of level K-1-k
};

}  // namespace priq
