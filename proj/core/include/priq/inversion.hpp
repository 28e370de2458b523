#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "priq/pgf.hpp"
#include "priq/pmf.hpp"

namespace priq {

// Contour plan for transform inversion.  A single sampling circle aliases
// the tail back onto the head; a short mixture of slightly separated radii
// cancels the leading alias images, leaving a residual governed by the
// product of the dampened radii.  xi are the per-component dampened scales
// (strictly decreasing, all < 1), eta = xi / r the actual circle radii in
// the transform variable, weights the alias-cancelling combination.
struct MixtureScheme {
    int n_fft = 0;
    double alpha = 0.0;   // decimal accuracy budget driving the base radius
    double spread = 0.0;  // relative separation between extreme components
    std::vector<double> xi;
    std::vector<double> eta;
    std::vector<double> weights;

    int components() const { return static_cast<int>(xi.size()); }
};

// Alias-cancelling weights for given circle radii: component m carries
// 1 / prod_{l != m} (1 - (eta_m / eta_l)^n).  Scale-invariant in eta.
std::vector<double> mixture_coefficients(std::span<const double> eta, int n_fft);

// Choose transform length and radii for a target truncation n_max:
// the shortest power-of-two length exceeding n_max (overridable), radii
// spread below the base scale 10^(-alpha/(components*n_fft)) / geomean.
MixtureScheme plan_scheme(const ModelParams& m, int n_max, int components = 4,
                          double spread = 0.05, double alpha = 12.0,
                          int n_fft_override = 0, bool require_pow2 = true);

// Growth rate of the required transform length per unit of truncation
// depth implied by balancing rounding against alias residual; about 0.0037
// for the default four-component scheme.
double scheme_growth_rate(int components, double spread, double alpha);

// Invert a univariate PGF on the planned contours; returns coefficients
// 0..n_max.  The callable is evaluated on each mixture circle.
std::vector<double> invert_marginal(const std::function<cplx(cplx)>& pgf,
                                    const MixtureScheme& scheme, int n_max);

// Invert the joint generating function on a (K-1)-dimensional contour
// lattice; the highest-priority axis is expanded by direct root powers
// rather than a transform dimension.  Axis 0 of the result indexes the
// highest-priority level.
JointPmf invert_joint(const PgfEvaluator& e, const MixtureScheme& scheme, int n_max,
                      std::uint64_t memory_limit_bytes = kDefaultMemoryLimit);

// Round-trip of the single-pole ratio through one actual transform:
// measured curve should sit on the flat closed form 1 / (1 - xi^n_fft).
struct RatioProbe {
    std::vector<double> measured;
    double exact = 0.0;
};
RatioProbe ratio_probe(double xi, int n_fft);

// Error decomposition of the geometric inversion at per-server load r:
// overall deviation of the measured ratio from one, its transform-rounding
// part (distance to the exactly discretized mixture ratio), and the
// aliasing part (distance of that ratio from one).  Indices run to the
// last n with (1-r) r^n > p_min.
struct ErrorProbe {
    MixtureScheme scheme;
    int n_lim = 0;
    std::vector<double> overall;
    std::vector<double> transform_part;
    double alias_part = 0.0;
};
ErrorProbe error_probe(double r, int components = 4, double spread = 0.05,
                       double alpha = 12.0, double p_min = 1e-12);

}  // namespace priq
