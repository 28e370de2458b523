#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "priq/model.hpp"
#include "priq/nd_array.hpp"
#include "priq/pmf.hpp"

namespace priq {

// One application of the balance mapping on a padded lattice: every axis
// carries one ghost cell on each side, pinned to zero, so the convention
// "negative subscripts mean zero probability" and the truncation at the top
// edge are both mechanical.  Only the interior box is written.
NdArray<double> balance_map(const NdArray<double>& padded, const ModelParams& m);

struct FpiOptions {
    double eps_tol = 1e-9;
    std::uint64_t max_iters = 1'000'000;
    std::uint64_t memory_limit_bytes = kDefaultMemoryLimit;
    // Invoked every progress_every iterations when nonzero.
    std::uint64_t progress_every = 0;
    std::function<void(std::uint64_t iter, double delta)> on_progress;
};

// Per-iteration convergence record.  The sweep alternates with period two
// (a Jacobi even-odd effect), so the health check watches the two-step
// envelope: a step above both of its two predecessors is counted, never
// treated as fatal.
struct FpiTrace {
    std::vector<double> deltas;
    std::uint64_t non_monotone_steps = 0;
};

// Iterate the balance mapping on [0, n_max]^K to a fixed point: uniform
// amortization of the probability that leaks past the truncation edge,
// renormalization to a unit origin, sup-norm stopping rule, and a final
// rescale of the whole lattice by the idle-odds factor 1 - r.
JointPmf run_fpi(const ModelParams& m, int n_max, const FpiOptions& opt = {},
                 FpiTrace* trace = nullptr);

// How well one strictly interior point satisfies the balance relation
// against its reconstruction from the neighbours: |ln P(n) - ln P_nn(n)|
// with P_nn(n) = (P(n + e_1) + sum_k r_k P(n - e_k)) / (1 + r).
double interior_balance_residual(const JointPmf& p, std::span<const std::size_t> n);

}  // namespace priq
