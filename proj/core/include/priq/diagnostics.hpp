#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "priq/fpi.hpp"
#include "priq/model.hpp"
#include "priq/pmf.hpp"

namespace priq {

// Worst agreement observed at one abscissa value: digits is the decimal
// place count -log10(error), capped at 16.
struct TraceRow {
    std::size_t index = 0;
    double digits = 0.0;
};

// Outcome of one consistency test.  xi is the minimum of the trace digits,
// so recomputing it from the trace reproduces the reported value exactly.
// A point that passes the probability filter but cannot be evaluated (a
// non-positive entry, or a neighbour outside the lattice) is counted as
// excluded, never as a failure.
struct DiagnosticsReport {
    std::string test;
    double xi = 0.0;
    std::vector<TraceRow> trace;
    std::uint64_t admitted = 0;
    std::uint64_t excluded = 0;
    // configuration echo
    std::vector<double> loads;
    int n_max = 0;
    double p_min = 0.0;
    int n_lim = 0;
};

// Uniform samples of level fractions on the probability simplex
// (normalized exponential gaps); deterministic for a given seed.
std::vector<std::vector<double>> sample_simplex(int levels, int count,
                                                std::uint64_t seed);

// Shell sums against the exact geometric total-count law: consecutive
// log-differences of the aggregate must equal ln r.  Admits shells
// 1 <= k <= n_lim with (1-r) r^k above p_min.
DiagnosticsReport agg_test(const JointPmf& p, double p_min = 2.4e-6, int n_lim = -1);

// Interior balance reconstruction at every admitted lattice point
// n in [1, n_lim]^K with P(n) above p_min; the trace abscissa is the
// lowest-priority coordinate.
DiagnosticsReport nn_test(const JointPmf& p, double p_min = 1e-10, int n_lim = -1);

// The all-lower-queues-empty slice against its closed-form geometric decay;
// admits slice cells whose exact value stays above p_min.
DiagnosticsReport xhi_test(const JointPmf& p, double p_min = 1e-20, int n_lim = -1);

// The all-higher-queues-empty slice against the lowest-priority marginal
// recursion; the reference marginal comes from the caller (typically a
// one-dimensional transform inversion).
DiagnosticsReport xlo_test(const JointPmf& p, std::span<const double> low_marginal,
                           double p_min = 1e-6, int n_lim = -1);

struct FpiTestOptions {
    double p_min = 1e-10;
    int n_lim = -1;
    // transform route
    int components = 4;
    double spread = 0.05;
    double alpha = 12.0;
    // direct route
    FpiOptions fpi{};
    std::uint64_t memory_limit_bytes = kDefaultMemoryLimit;
};

// Cross-method agreement: the same lattice computed by transform inversion
// and by the direct iteration, compared in log space over points admitted
// by the transform values.
DiagnosticsReport fpi_test(const ModelParams& m, int n_max,
                           const FpiTestOptions& opt = {});

}  // namespace priq
