#include "priq/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "priq/dft.hpp"

namespace priq {

namespace {

constexpr double kImagResidueTol = 1e-10;
// Raw transform entries below this cannot be explained by round-off on
// order-one samples and indicate a sign or symmetry defect. Round-off dust
// in deep cells (amplified by inward radius compensation) stays orders of
// magnitude above it; export-side clamping handles that dust.
constexpr double kNegativeSane = -1e-3;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_pow2_above(int n) {
    int p = 1;
    while (p <= n) p <<= 1;
    return p;
}

std::vector<double> spread_factors(int components, double spread) {
    std::vector<double> out(static_cast<std::size_t>(components));
    for (int m = 0; m < components; ++m)
        out[static_cast<std::size_t>(m)] =
            components == 1
                ? 1.0
                : 1.0 - spread * static_cast<double>(m) / static_cast<double>(components - 1);
    return out;
}

double geometric_mean(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += std::log(x);
    return std::exp(acc / static_cast<double>(v.size()));
}

void check_scheme_inputs(int components, double spread, double alpha) {
    if (components < 1)
        throw ValidationError("BadComponentCount", "need at least one contour radius");
    if (components > 1 && !(spread > 0.0))
        throw ValidationError("DegenerateSpread",
                              "spread must be positive when several radii are mixed");
    if (!(spread >= 0.0 && spread < 1.0))
        throw ValidationError("BadSpread", "spread must lie in [0, 1)");
    if (!(alpha > 0.0))
        throw ValidationError("BadAlpha", "accuracy budget must be positive");
}

}  // namespace

std::vector<double> mixture_coefficients(std::span<const double> eta, int n_fft) {
    const int count = static_cast<int>(eta.size());
    if (count < 1)
        throw ValidationError("BadComponentCount", "need at least one contour radius");
    if (n_fft < 1) throw ValidationError("BadTransformSize", "transform length must be >= 1");
    for (double x : eta)
        if (!(x > 0.0) || !std::isfinite(x))
            throw ValidationError("BadRadius", "radii must be positive and finite");
    std::vector<double> w(static_cast<std::size_t>(count));
    for (int m = 0; m < count; ++m) {
        double inv = 1.0;
        for (int l = 0; l < count; ++l) {
            if (l == m) continue;
            const double ratio = eta[static_cast<std::size_t>(m)] / eta[static_cast<std::size_t>(l)];
            if (std::abs(ratio - 1.0) < 1e-14)
                throw ValidationError("DuplicateRadii",
                                      "mixture radii must be pairwise distinct");
            // ratio^n through logs; the magnitudes can be enormous before the
            // 1 - x cancellations bring everything back to order one.
            inv *= 1.0 - std::exp(static_cast<double>(n_fft) * std::log(ratio));
        }
        if (inv == 0.0 || !std::isfinite(inv))
            throw NumericError("WeightOverflow", "mixture weight is not representable");
        w[static_cast<std::size_t>(m)] = 1.0 / inv;
    }
    return w;
}

MixtureScheme plan_scheme(const ModelParams& m, int n_max, int components, double spread,
                          double alpha, int n_fft_override, bool require_pow2) {
    check_scheme_inputs(components, spread, alpha);
    if (n_max < 1) throw ValidationError("BadTruncation", "n_max must be >= 1");
    MixtureScheme sc;
    sc.alpha = alpha;
    sc.spread = spread;
    sc.n_fft = n_fft_override > 0 ? n_fft_override : next_pow2_above(n_max);
    if (sc.n_fft <= n_max)
        throw ValidationError("TruncationExceedsGrid",
                              "transform length must exceed the truncation");
    if (require_pow2 && !is_pow2(sc.n_fft))
        throw ValidationError("BadTransformSize",
                              "transform length must be a power of two");

    const auto factors = spread_factors(components, spread);
    const double g = geometric_mean(factors);
    const double base =
        std::pow(10.0, -alpha / (static_cast<double>(components) * sc.n_fft)) / g;
    const double r = m.total_load();
    sc.xi.resize(static_cast<std::size_t>(components));
    sc.eta.resize(static_cast<std::size_t>(components));
    for (int i = 0; i < components; ++i) {
        sc.xi[static_cast<std::size_t>(i)] = factors[static_cast<std::size_t>(i)] * base;
        sc.eta[static_cast<std::size_t>(i)] = sc.xi[static_cast<std::size_t>(i)] / r;
        if (!(sc.xi[static_cast<std::size_t>(i)] < 1.0))
            throw ValidationError("RadiusExceedsConvergence",
                                  "a planned radius reaches the convergence boundary; "
                                  "lower n_fft or raise alpha");
    }
    sc.weights = mixture_coefficients(sc.eta, sc.n_fft);
    return sc;
}

double scheme_growth_rate(int components, double spread, double alpha) {
    check_scheme_inputs(components, spread, alpha);
    if (!(alpha < 15.0))
        throw ValidationError("BadAlpha",
                              "budget must stay below the working-precision ceiling");
    const auto factors = spread_factors(components, spread);
    const double g = geometric_mean(factors);
    return std::log10(g / (1.0 - spread)) / (15.0 - alpha);
}

namespace {

// Shared 1-D kernel: fill one circle, transform, accumulate weighted and
// radius-compensated coefficients.
void accumulate_circle(const std::function<cplx(cplx)>& pgf, double eta, double weight,
                       int n_fft, int n_max, const InverseDft& idft,
                       std::vector<cplx>& scratch, std::vector<double>& out) {
    const double step = 2.0 * M_PI / static_cast<double>(n_fft);
    for (int k = 0; k < n_fft; ++k) {
        const double ang = -step * static_cast<double>(k);
        const cplx z = eta * cplx{std::cos(ang), std::sin(ang)};
        const cplx v = pgf(z);
        if (!std::isfinite(std::real(v)) || !std::isfinite(std::imag(v)))
            throw NumericError("NonFiniteGridSample",
                               "generating function not finite on the contour");
        scratch[static_cast<std::size_t>(k)] = v;
    }
    idft.run(scratch.data());
    double comp = 1.0;  // eta^-n, advanced multiplicatively
    for (int n = 0; n <= n_max; ++n) {
        const cplx term = weight * comp * scratch[static_cast<std::size_t>(n)];
        if (std::abs(std::imag(term)) > kImagResidueTol)
            throw NumericError("ImaginaryResidue",
                               "inversion output has a non-negligible imaginary part");
        out[static_cast<std::size_t>(n)] += std::real(term);
        comp /= eta;
    }
}

}  // namespace

std::vector<double> invert_marginal(const std::function<cplx(cplx)>& pgf,
                                    const MixtureScheme& scheme, int n_max) {
    if (n_max < 0) throw ValidationError("BadTruncation", "n_max must be >= 0");
    if (scheme.n_fft <= n_max)
        throw ValidationError("TruncationExceedsGrid",
                              "transform length must exceed the truncation");
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
    std::vector<cplx> scratch(static_cast<std::size_t>(scheme.n_fft));
    const InverseDft idft({static_cast<std::size_t>(scheme.n_fft)});
    for (int m = 0; m < scheme.components(); ++m)
        accumulate_circle(pgf, scheme.eta[static_cast<std::size_t>(m)],
                          scheme.weights[static_cast<std::size_t>(m)], scheme.n_fft, n_max,
                          idft, scratch, out);
    return out;
}

JointPmf invert_joint(const PgfEvaluator& e, const MixtureScheme& scheme, int n_max,
                      std::uint64_t memory_limit_bytes) {
    const int levels = e.levels();
    if (levels < 2)
        throw ValidationError("LevelCountUnsupported",
                              "joint inversion needs >= 2 levels; a single level "
                              "has a closed form");
    if (n_max < 1) throw ValidationError("BadTruncation", "n_max must be >= 1");
    if (scheme.n_fft <= n_max)
        throw ValidationError("TruncationExceedsGrid",
                              "transform length must exceed the truncation");
    const int d = levels - 1;
    const std::size_t n = static_cast<std::size_t>(scheme.n_fft);
    const std::size_t box = static_cast<std::size_t>(n_max) + 1;

    std::size_t grid_count = 1, out_count = 1;
    for (int a = 0; a < d; ++a) grid_count *= n;
    for (int a = 0; a < levels; ++a) out_count *= box;
    const std::uint64_t need = 3ull * grid_count * sizeof(cplx) +
                               static_cast<std::uint64_t>(out_count) * sizeof(double);
    if (need > memory_limit_bytes)
        throw ResourceError("MemoryLimit",
                            "joint inversion needs about " + std::to_string(need >> 20) +
                                " MiB, above the configured limit");

    JointPmf result{PmfKind::WaitConditional, e.model(),
                    NdArray<double>::cube(static_cast<std::size_t>(levels), box),
                    GeneratorInfo{}};
    result.generator.method = "fft";
    result.generator.n_fft = scheme.n_fft;
    result.generator.alpha = scheme.alpha;
    result.generator.spread = scheme.spread;
    result.generator.radii = scheme.eta;
    result.generator.weights = scheme.weights;

    double* out = result.values.data();

    const InverseDft idft(std::vector<std::size_t>(static_cast<std::size_t>(d), n));
    std::vector<cplx> root(grid_count);   // full-prefix minus root
    std::vector<cplx> work(grid_count);   // g0, then the running slice product
    std::vector<cplx> slice(grid_count);  // transform scratch per slice
    std::vector<cplx> ztab(n);
    std::vector<std::size_t> grid_stride(static_cast<std::size_t>(d));
    {
        std::size_t s = 1;
        for (int a = d; a-- > 0;) {
            grid_stride[static_cast<std::size_t>(a)] = s;
            s *= n;
        }
    }

    double max_imag = 0.0;
    for (int comp = 0; comp < scheme.components(); ++comp) {
        const double eta = scheme.eta[static_cast<std::size_t>(comp)];
        const double weight = scheme.weights[static_cast<std::size_t>(comp)];
        const double step = 2.0 * M_PI / static_cast<double>(scheme.n_fft);
        for (std::size_t k = 0; k < n; ++k) {
            const double ang = -step * static_cast<double>(k);
            ztab[k] = eta * cplx{std::cos(ang), std::sin(ang)};
        }

        // Grid axis a holds the transform variable of level a+2, so axis
        // order matches the output layout; the evaluator wants arguments
        // from the lowest level up, i.e. axes reversed.
        std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
        std::vector<cplx> args(static_cast<std::size_t>(d), ztab[0]);
        for (std::size_t flat = 0; flat < grid_count; ++flat) {
            const auto [g0v, rootv] = e.g0_and_root(args);
            if (!std::isfinite(std::real(g0v)) || !std::isfinite(std::imag(g0v)) ||
                !std::isfinite(std::real(rootv)) || !std::isfinite(std::imag(rootv)))
                throw NumericError("NonFiniteGridSample",
                                   "generating function not finite on the contour");
            work[flat] = g0v;
            root[flat] = rootv;
            std::size_t a = static_cast<std::size_t>(d);
            while (a-- > 0) {
                if (++idx[a] < n) {
                    args[static_cast<std::size_t>(d) - 1 - a] = ztab[idx[a]];
                    break;
                }
                idx[a] = 0;
                args[static_cast<std::size_t>(d) - 1 - a] = ztab[0];
            }
        }

        // eta^-t for every possible coordinate total of the output box.
        std::vector<double> comp_pow(static_cast<std::size_t>(d) * n_max + 1);
        comp_pow[0] = 1.0;
        for (std::size_t t = 1; t < comp_pow.size(); ++t) comp_pow[t] = comp_pow[t - 1] / eta;

        for (int ell = 0; ell <= n_max; ++ell) {
            std::copy(work.begin(), work.end(), slice.begin());
            idft.run(slice.data());

            // Walk the output box of this slice; track the flat grid offset
            // and the coordinate total across odometer carries. Realness is
            // checked on the raw transform values: the exact coefficients are
            // real, so the imaginary part there is pure round-off, while the
            // radius compensation can exceed one and would blow harmless dust
            // past any fixed bound.
            std::vector<std::size_t> bidx(static_cast<std::size_t>(d), 0);
            std::size_t gflat = 0;
            std::size_t total = 0;
            double* out_slice = out + static_cast<std::size_t>(ell) * (out_count / box);
            const std::size_t box_count = out_count / box;
            for (std::size_t oflat = 0; oflat < box_count; ++oflat) {
                const double im = std::abs(std::imag(slice[gflat]));
                if (im > max_imag) max_imag = im;
                out_slice[oflat] += weight * comp_pow[total] * std::real(slice[gflat]);
                std::size_t a = static_cast<std::size_t>(d);
                while (a-- > 0) {
                    if (++bidx[a] < box) {
                        gflat += grid_stride[a];
                        ++total;
                        break;
                    }
                    gflat -= grid_stride[a] * (box - 1);
                    total -= box - 1;
                    bidx[a] = 0;
                }
            }

            if (ell < n_max)
                for (std::size_t i = 0; i < grid_count; ++i) work[i] *= root[i];
        }
    }

    if (max_imag > kImagResidueTol)
        throw NumericError("ImaginaryResidue",
                           "transform values have a non-negligible imaginary part");
    double worst = 0.0;
    for (std::size_t i = 0; i < out_count; ++i)
        if (out[i] < worst) worst = out[i];
    if (worst < kNegativeSane)
        throw NumericError("NegativeProbability",
                           "inversion produced a negative entry too large to be round-off");
    result.generator.worst_negative = worst;
    return result;
}

RatioProbe ratio_probe(double xi, int n_fft) {
    if (!(xi > 0.0 && xi < 1.0))
        throw ValidationError("BadRadius", "dampened scale must lie in (0, 1)");
    if (n_fft < 1) throw ValidationError("BadTransformSize", "transform length must be >= 1");
    RatioProbe probe;
    probe.exact = 1.0 / (1.0 - std::pow(xi, n_fft));
    std::vector<cplx> scratch(static_cast<std::size_t>(n_fft));
    const double step = 2.0 * M_PI / static_cast<double>(n_fft);
    for (int k = 0; k < n_fft; ++k) {
        const double ang = -step * static_cast<double>(k);
        scratch[static_cast<std::size_t>(k)] =
            1.0 / (1.0 - xi * cplx{std::cos(ang), std::sin(ang)});
    }
    const InverseDft idft({static_cast<std::size_t>(n_fft)});
    idft.run(scratch.data());
    probe.measured.resize(static_cast<std::size_t>(n_fft));
    double comp = 1.0;
    for (int nn = 0; nn < n_fft; ++nn) {
        probe.measured[static_cast<std::size_t>(nn)] =
            std::real(scratch[static_cast<std::size_t>(nn)]) / comp;
        comp *= xi;
    }
    return probe;
}

ErrorProbe error_probe(double r, int components, double spread, double alpha, double p_min) {
    if (!(r > 0.0 && r < 1.0))
        throw ValidationError("NonErgodic", "per-server load must lie in (0, 1)");
    if (!(p_min > 0.0 && p_min < 1.0 - r))
        throw ValidationError("BadTailCut",
                              "tail cut must be positive and below the head mass");
    ErrorProbe probe;
    // Deepest index with (1-r) r^n > p_min.
    probe.n_lim = static_cast<int>(std::floor(std::log(p_min / (1.0 - r)) / std::log(r)));
    if (probe.n_lim < 1) probe.n_lim = 1;

    const std::vector<double> lam{r};
    const auto m = ModelParams::from_loads(lam, 1, 1.0);
    probe.scheme = plan_scheme(m, probe.n_lim, components, spread, alpha);

    const auto pmf = invert_marginal(
        [r](cplx z) { return (1.0 - r) / (1.0 - r * z); }, probe.scheme, probe.n_lim);

    double ratio_disc = 0.0;
    for (int c = 0; c < probe.scheme.components(); ++c)
        ratio_disc += probe.scheme.weights[static_cast<std::size_t>(c)] /
                      (1.0 - std::pow(probe.scheme.xi[static_cast<std::size_t>(c)],
                                      probe.scheme.n_fft));
    probe.alias_part = std::abs(ratio_disc - 1.0);

    probe.overall.resize(static_cast<std::size_t>(probe.n_lim) + 1);
    probe.transform_part.resize(static_cast<std::size_t>(probe.n_lim) + 1);
    double exact = 1.0 - r;
    for (int n = 0; n <= probe.n_lim; ++n) {
        const double ratio = pmf[static_cast<std::size_t>(n)] / exact;
        probe.overall[static_cast<std::size_t>(n)] = std::abs(ratio - 1.0);
        probe.transform_part[static_cast<std::size_t>(n)] = std::abs(ratio - ratio_disc);
        exact *= r;
    }
    return probe;
}

}  // namespace priq
