#include "priq/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "priq/inversion.hpp"
#include "priq/pgf.hpp"
#include "splitmix.hpp"

namespace priq {
namespace {

// Agreement better than double precision can resolve reports the cap.
constexpr double kDigitsCap = 16.0;

double digits_of(double err) {
    if (err == 0.0) return kDigitsCap;
    return std::min(kDigitsCap, -std::log10(err));
}

// Keeps the worst (smallest) digit count seen at each abscissa value.
class TraceBuilder {
public:
    explicit TraceBuilder(std::size_t extent)
        : worst_(extent, 0.0), seen_(extent, false) {}

    void add(std::size_t index, double digits) {
        if (!seen_[index] || digits < worst_[index]) {
            worst_[index] = digits;
            seen_[index] = true;
        }
    }

    // Fills trace and xi; xi is recomputed as the minimum of the emitted
    // rows so a re-check of the exported trace reproduces it exactly.
    void finish(DiagnosticsReport& rep) const {
        rep.trace.clear();
        double xi = kDigitsCap;
        for (std::size_t i = 0; i < worst_.size(); ++i) {
            if (!seen_[i]) continue;
            rep.trace.push_back({i, worst_[i]});
            xi = std::min(xi, worst_[i]);
        }
        rep.xi = rep.trace.empty() ? 0.0 : xi;
    }

private:
    std::vector<double> worst_;
    std::vector<bool> seen_;
};

void check_filter(double p_min) {
    if (!(p_min > 0.0) || !(p_min < 1.0))
        throw ValidationError("BadFilter",
                              "probability floor must lie strictly in (0, 1)");
}

void check_kind(const JointPmf& p) {
    if (p.kind != PmfKind::WaitConditional)
        throw ValidationError("WrongKind",
                              "consistency tests run on the wait-conditional lattice");
}

int effective_cap(int n_lim, int n_max) {
    const int cap = n_lim < 0 ? n_max : std::min(n_lim, n_max);
    return std::max(cap, 0);
}

DiagnosticsReport make_report(std::string test, const ModelParams& m, int n_max,
                              double p_min, int cap) {
    DiagnosticsReport rep;
    rep.test = std::move(test);
    rep.loads.assign(m.loads().begin(), m.loads().end());
    rep.n_max = n_max;
    rep.p_min = p_min;
    rep.n_lim = cap;
    return rep;
}

void require_admitted(const DiagnosticsReport& rep) {
    if (rep.admitted == 0)
        throw ValidationError("EmptyAdmissibleSet",
                              rep.test + ": no lattice point passed the filters");
}

// Shared walk for the two lattice-wide tests: every point of [1, cap]^K is
// visited with a running flat offset, and `eval` is called once per point
// that clears the probability floor.
template <typename Eval>
void walk_interior(const NdArray<double>& v, int cap, double p_min, Eval&& eval) {
    if (cap < 1) return;
    const int k = static_cast<int>(v.rank());
    const auto& stride = v.strides();
    const auto cap_z = static_cast<std::size_t>(cap);
    std::vector<std::size_t> idx(static_cast<std::size_t>(k), 1);
    std::size_t flat = 0;
    for (int a = 0; a < k; ++a) flat += stride[static_cast<std::size_t>(a)];
    for (;;) {
        const double here = v[flat];
        if (here > p_min) eval(idx, flat, here);
        int a = k - 1;
        for (; a >= 0; --a) {
            const auto az = static_cast<std::size_t>(a);
            if (idx[az] < cap_z) {
                ++idx[az];
                flat += stride[az];
                break;
            }
            flat -= stride[az] * (idx[az] - 1);
            idx[az] = 1;
        }
        if (a < 0) break;
    }
}

}  // namespace

std::vector<std::vector<double>> sample_simplex(int levels, int count,
                                                std::uint64_t seed) {
    if (levels < 1)
        throw ValidationError("BadLevelCount", "need at least one level");
    if (count < 0)
        throw ValidationError("BadSampleCount", "sample count must be >= 0");
    detail::SplitMix64 rng{seed};
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int s = 0; s < count; ++s) {
        std::vector<double> gaps(static_cast<std::size_t>(levels));
        double total = 0.0;
        for (auto& g : gaps) {
            g = -std::log1p(-rng.uniform());
            total += g;
        }
        if (total <= 0.0) {  // every draw hit exactly zero: fall back to uniform
            gaps.assign(gaps.size(), 1.0);
            total = static_cast<double>(levels);
        }
        for (auto& g : gaps) g /= total;
        out.push_back(std::move(gaps));
    }
    return out;
}

DiagnosticsReport agg_test(const JointPmf& p, double p_min, int n_lim) {
    check_kind(p);
    check_filter(p_min);
    const int cap = effective_cap(n_lim, p.n_max());
    DiagnosticsReport rep = make_report("agg", p.model, p.n_max(), p_min, cap);

    const std::vector<double> shells = shell_sums(p);
    const double r = p.model.total_load();
    const double ln_r = std::log(r);
    TraceBuilder tb(static_cast<std::size_t>(cap) + 1);
    double exact = 1.0 - r;  // exact aggregate law at k = 0
    for (int k = 1; k <= cap; ++k) {
        exact *= r;
        if (!(exact > p_min)) break;  // the exact tail only decreases
        const auto kz = static_cast<std::size_t>(k);
        if (!(shells[kz] > 0.0) || !(shells[kz - 1] > 0.0)) {
            ++rep.excluded;
            continue;
        }
        const double err = std::abs(std::log(shells[kz]) - std::log(shells[kz - 1]) - ln_r);
        tb.add(kz, digits_of(err));
        ++rep.admitted;
    }
    require_admitted(rep);
    tb.finish(rep);
    return rep;
}

DiagnosticsReport nn_test(const JointPmf& p, double p_min, int n_lim) {
    check_kind(p);
    check_filter(p_min);
    const int cap = effective_cap(n_lim, p.n_max());
    DiagnosticsReport rep = make_report("nn", p.model, p.n_max(), p_min, cap);

    const int k = p.levels();
    const auto top = static_cast<std::size_t>(p.n_max());
    const auto& stride = p.values.strides();
    const double* v = p.values.data();
    const std::vector<double> load(p.model.loads().begin(), p.model.loads().end());
    const double norm = 1.0 + p.model.total_load();
    TraceBuilder tb(static_cast<std::size_t>(cap) + 1);

    walk_interior(p.values, cap, p_min,
                  [&](const std::vector<std::size_t>& idx, std::size_t flat, double here) {
                      if (idx[0] + 1 > top) {
                          // No upward neighbour on the lattice: the balance
                          // identity cannot be formed at the truncation face.
                          ++rep.excluded;
                          return;
                      }
                      double acc = v[flat + stride[0]];
                      for (int a = 0; a < k; ++a) {
                          const auto az = static_cast<std::size_t>(a);
                          acc += load[az] * v[flat - stride[az]];
                      }
                      const double reconstructed = acc / norm;
                      if (!(reconstructed > 0.0)) {
                          ++rep.excluded;
                          return;
                      }
                      const double err =
                          std::abs(std::log(here) - std::log(reconstructed));
                      tb.add(idx[static_cast<std::size_t>(k - 1)], digits_of(err));
                      ++rep.admitted;
                  });
    require_admitted(rep);
    tb.finish(rep);
    return rep;
}

DiagnosticsReport xhi_test(const JointPmf& p, double p_min, int n_lim) {
    check_kind(p);
    check_filter(p_min);
    const int cap = effective_cap(n_lim, p.n_max());
    DiagnosticsReport rep = make_report("xhi", p.model, p.n_max(), p_min, cap);

    const double r = p.model.total_load();
    const double r_hi = p.model.load(0);
    // Smaller root of x^2 - (1 + r) x + r_hi, in the subtraction-free form.
    const double disc = (1.0 + r) * (1.0 + r) - 4.0 * r_hi;
    const double z_minus = 2.0 * r_hi / (1.0 + r + std::sqrt(disc));
    const double ln_z = std::log(z_minus);

    const std::size_t step = p.values.strides()[0];
    const double* v = p.values.data();
    TraceBuilder tb(static_cast<std::size_t>(cap) + 1);
    double exact = 1.0 - r;  // closed-form slice value at ell = 0
    for (int ell = 1; ell <= cap; ++ell) {
        exact *= z_minus;
        if (!(exact > p_min)) break;
        const auto lz = static_cast<std::size_t>(ell);
        const double here = v[lz * step];
        const double prev = v[(lz - 1) * step];
        if (!(here > 0.0) || !(prev > 0.0)) {
            ++rep.excluded;
            continue;
        }
        const double err = std::abs(std::log(here) - std::log(prev) - ln_z);
        tb.add(lz, digits_of(err));
        ++rep.admitted;
    }
    require_admitted(rep);
    tb.finish(rep);
    return rep;
}

DiagnosticsReport xlo_test(const JointPmf& p, std::span<const double> low_marginal,
                           double p_min, int n_lim) {
    check_kind(p);
    check_filter(p_min);
    int cap = effective_cap(n_lim, p.n_max());
    cap = std::max(0, std::min(cap, static_cast<int>(low_marginal.size()) - 1));
    DiagnosticsReport rep = make_report("xlo", p.model, p.n_max(), p_min, cap);

    // Lowest priority is the last axis, so the slice (0, ..., 0, n) is the
    // first row of the flattened storage.
    const double* v = p.values.data();
    TraceBuilder tb(static_cast<std::size_t>(cap) + 1);
    for (int n = 1; n <= cap; ++n) {
        const auto nz = static_cast<std::size_t>(n);
        if (!(low_marginal[nz] > p_min)) continue;
        const double reference = PgfEvaluator::exclusively_low_pmf(p.model, n, low_marginal);
        const double here = v[nz];
        if (!(here > 0.0) || !(reference > 0.0)) {
            ++rep.excluded;
            continue;
        }
        const double err = std::abs(std::log(here) - std::log(reference));
        tb.add(nz, digits_of(err));
        ++rep.admitted;
    }
    require_admitted(rep);
    tb.finish(rep);
    return rep;
}

DiagnosticsReport fpi_test(const ModelParams& m, int n_max, const FpiTestOptions& opt) {
    check_filter(opt.p_min);
    const int cap = effective_cap(opt.n_lim, n_max);
    DiagnosticsReport rep = make_report("fpi", m, n_max, opt.p_min, cap);

    const MixtureScheme scheme =
        plan_scheme(m, n_max, opt.components, opt.spread, opt.alpha);
    const JointPmf transform = [&]() -> JointPmf {
        if (m.levels() > 1)
            return invert_joint(PgfEvaluator(m), scheme, n_max, opt.memory_limit_bytes);
        // The joint inversion needs a contour lattice; one level inverts as
        // a plain marginal and is wrapped into a rank-1 lattice here.
        PgfEvaluator ev(m);
        const std::vector<double> marg = invert_marginal(
            [&](cplx z) { return ev.marginal_pgf(1, z); }, scheme, n_max);
        JointPmf out{PmfKind::WaitConditional, m, NdArray<double>({marg.size()}), {}};
        std::copy(marg.begin(), marg.end(), out.values.data());
        out.generator.method = "fft";
        out.generator.n_fft = scheme.n_fft;
        out.generator.alpha = scheme.alpha;
        out.generator.spread = scheme.spread;
        out.generator.radii = scheme.eta;
        out.generator.weights = scheme.weights;
        return out;
    }();

    const JointPmf direct = run_fpi(m, n_max, opt.fpi);

    const int k = m.levels();
    const double* w = direct.values.data();
    TraceBuilder tb(static_cast<std::size_t>(cap) + 1);
    walk_interior(transform.values, cap, opt.p_min,
                  [&](const std::vector<std::size_t>& idx, std::size_t flat, double here) {
                      const double other = w[flat];
                      if (!(other > 0.0)) {
                          ++rep.excluded;
                          return;
                      }
                      const double err = std::abs(std::log(here) - std::log(other));
                      tb.add(idx[static_cast<std::size_t>(k - 1)], digits_of(err));
                      ++rep.admitted;
                  });
    require_admitted(rep);
    tb.finish(rep);
    return rep;
}

}  // namespace priq
