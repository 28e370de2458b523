#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "priq/model.hpp"
#include "priq/nd_array.hpp"

namespace priq {

// WaitConditional distributions are conditioned on every server being busy;
// Full distributions fold the no-wait atom at the origin back in.
enum class PmfKind { WaitConditional, Full };

// Provenance of a computed distribution, echoed into exports so a result
// can be traced back to how it was produced.
struct GeneratorInfo {
    std::string method;  // "fpi", "fft", "closed_form", "external"
    // fixed-point route
    std::uint64_t iterations = 0;
    double final_delta = 0.0;
    // transform route
    int n_fft = 0;
    double alpha = 0.0;
    double spread = 0.0;
    std::vector<double> radii;    // contour radii, one per mixture component
    std::vector<double> weights;  // mixture coefficients
    // Most negative raw entry seen while assembling the values array; 0 when
    // every entry came out non-negative. Kept so exporters and callers can
    // tell round-off dust from a genuine sign defect without rescanning.
    double worst_negative = 0.0;
};

// Default budget for producers of dense lattice distributions; individual
// calls may override it.
constexpr std::uint64_t kDefaultMemoryLimit = 12ull << 30;

// Joint stationary queue-length distribution on the truncated lattice
// [0, n_max]^K.  Axis 0 indexes the highest-priority level; priorities
// descend along the axes.
struct JointPmf {
    PmfKind kind = PmfKind::WaitConditional;
    ModelParams model;
    NdArray<double> values;
    GeneratorInfo generator;

    int levels() const { return static_cast<int>(values.rank()); }
    int n_max() const { return static_cast<int>(values.shape()[0]) - 1; }
};

// Fold the no-wait mass back in: a point mass at the origin plus the
// wait-conditional body scaled by the wait probability.
JointPmf full_pmf(const JointPmf& wait_conditional);

// Sum of entries on each diagonal shell (fixed total queue length).
// Shells with total above K * n_max do not exist on the lattice.
std::vector<double> shell_sums(const JointPmf& pmf);

// Marginal distribution of one level (0 = highest priority).
std::vector<double> level_marginal(const JointPmf& pmf, int level);

}  // namespace priq
