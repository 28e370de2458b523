#include "priq/fpi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace priq {

namespace {

struct Lattice {
    int levels = 0;
    std::size_t box = 0;     // interior cells per axis, n_max + 1
    std::size_t extent = 0;  // box plus the two ghost cells
    std::size_t count = 0;   // padded cell total
    std::size_t interior = 0;
    std::size_t origin = 0;  // flat position of the all-zero lattice point
    std::vector<std::size_t> stride;
};

Lattice lattice_for(int levels, std::size_t box) {
    Lattice lat;
    lat.levels = levels;
    lat.box = box;
    lat.extent = box + 2;
    lat.stride.resize(static_cast<std::size_t>(levels));
    std::size_t s = 1;
    lat.interior = 1;
    for (int a = levels; a-- > 0;) {
        lat.stride[static_cast<std::size_t>(a)] = s;
        s *= lat.extent;
        lat.interior *= box;
    }
    lat.count = s;
    lat.origin = 0;
    for (auto st : lat.stride) lat.origin += st;
    return lat;
}

Lattice lattice_of(const NdArray<double>& padded, const ModelParams& m) {
    if (padded.rank() != static_cast<std::size_t>(m.levels()))
        throw ValidationError("DimensionMismatch",
                              "lattice rank does not match the level count");
    const std::size_t extent = padded.shape()[0];
    for (auto e : padded.shape())
        if (e != extent)
            throw ValidationError("DimensionMismatch",
                                  "lattice must have a common extent per axis");
    if (extent < 3)
        throw ValidationError("DimensionMismatch",
                              "padded lattice needs at least one interior cell");
    return lattice_for(m.levels(), extent - 2);
}

// One balance sweep over the interior; ghost cells of `out` must already be
// zero and are left untouched.  Returns the compensated interior sum of the
// written values.
double sweep(const Lattice& lat, const ModelParams& m, const double* in, double* out) {
    const int k = lat.levels;
    const double inv = 1.0 / (1.0 + m.total_load());
    const std::span<const double> load = m.loads();
    std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
    std::size_t flat = lat.origin;
    double sum = 0.0, carry = 0.0;
    for (std::size_t cell = 0; cell < lat.interior; ++cell) {
        int lead = 0;
        while (lead < k && idx[static_cast<std::size_t>(lead)] == 0) ++lead;

        // At the all-zero point the mapping keeps the value itself in place
        // of the (absent) upward neighbour of the first nonzero axis.
        double acc = lead == k ? in[flat] : 0.0;
        for (int a = 0; a < k; ++a)
            acc += load[static_cast<std::size_t>(a)] *
                   in[flat - lat.stride[static_cast<std::size_t>(a)]];
        const int upmax = std::min(lead + 1, k);
        for (int a = 0; a < upmax; ++a)
            acc += in[flat + lat.stride[static_cast<std::size_t>(a)]];
        const double v = acc * inv;
        out[flat] = v;

        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;

        std::size_t a = static_cast<std::size_t>(k);
        while (a-- > 0) {
            if (++idx[a] < lat.box) {
                flat += lat.stride[a];
                break;
            }
            flat -= lat.stride[a] * (lat.box - 1);
            idx[a] = 0;
        }
    }
    return sum;
}

}  // namespace

NdArray<double> balance_map(const NdArray<double>& padded, const ModelParams& m) {
    const Lattice lat = lattice_of(padded, m);
    NdArray<double> out(padded.shape());
    sweep(lat, m, padded.data(), out.data());
    return out;
}

JointPmf run_fpi(const ModelParams& m, int n_max, const FpiOptions& opt, FpiTrace* trace) {
    if (n_max < 1) throw ValidationError("BadTruncation", "n_max must be >= 1");
    if (!(opt.eps_tol > 0.0))
        throw ValidationError("BadTolerance", "stopping tolerance must be positive");
    if (opt.max_iters < 1)
        throw ValidationError("BadIterationCap", "need at least one iteration");

    const Lattice lat = lattice_for(m.levels(), static_cast<std::size_t>(n_max) + 1);
    const std::uint64_t need =
        2ull * lat.count * sizeof(double) + lat.interior * sizeof(double);
    if (need > opt.memory_limit_bytes)
        throw ResourceError("MemoryLimit",
                            "iteration needs about " + std::to_string(need >> 20) +
                                " MiB, above the configured limit");

    NdArray<double> cur(std::vector<std::size_t>(static_cast<std::size_t>(lat.levels),
                                                 lat.extent));
    NdArray<double> nxt(cur.shape());
    cur.data()[lat.origin] = 1.0;
    double norm_cur = 1.0;

    if (trace) {
        trace->deltas.clear();
        trace->non_monotone_steps = 0;
    }

    double delta = std::numeric_limits<double>::infinity();
    std::uint64_t iter = 0;
    while (delta > opt.eps_tol) {
        if (iter >= opt.max_iters)
            throw NumericError("NoConvergence",
                               "no fixed point within " + std::to_string(opt.max_iters) +
                                   " iterations; last step " + std::to_string(delta));
        ++iter;

        const double norm_raw = sweep(lat, m, cur.data(), nxt.data());
        const double add =
            (norm_cur - norm_raw) / static_cast<double>(lat.interior);
        const double p0 = nxt.data()[lat.origin] + add;

        // Amortize the leaked mass uniformly, rescale to a unit origin, and
        // measure the step, all in one interior pass.
        double* nd = nxt.data();
        const double* cd = cur.data();
        std::vector<std::size_t> idx(static_cast<std::size_t>(lat.levels), 0);
        std::size_t flat = lat.origin;
        double sum = 0.0, carry = 0.0, step = 0.0;
        for (std::size_t cell = 0; cell < lat.interior; ++cell) {
            const double v = (nd[flat] + add) / p0;
            nd[flat] = v;
            step = std::max(step, std::abs(v - cd[flat]));
            const double y = v - carry;
            const double t = sum + y;
            carry = (t - sum) - y;
            sum = t;
            std::size_t a = static_cast<std::size_t>(lat.levels);
            while (a-- > 0) {
                if (++idx[a] < lat.box) {
                    flat += lat.stride[a];
                    break;
                }
                flat -= lat.stride[a] * (lat.box - 1);
                idx[a] = 0;
            }
        }
        norm_cur = sum;
        delta = step;
        std::swap(cur, nxt);

        if (trace) {
            const auto& ds = trace->deltas;
            if (ds.size() >= 5 &&
                delta > std::max(ds[ds.size() - 1], ds[ds.size() - 2]) * (1.0 + 1e-9))
                ++trace->non_monotone_steps;
            trace->deltas.push_back(delta);
        }
        if (opt.progress_every && opt.on_progress && iter % opt.progress_every == 0)
            opt.on_progress(iter, delta);
    }

    JointPmf result{PmfKind::WaitConditional, m,
                    NdArray<double>::cube(static_cast<std::size_t>(lat.levels), lat.box),
                    GeneratorInfo{}};
    result.generator.method = "fpi";
    result.generator.iterations = iter;
    result.generator.final_delta = delta;

    const double scale = 1.0 - m.total_load();
    double* out = result.values.data();
    const double* cd = cur.data();
    std::vector<std::size_t> idx(static_cast<std::size_t>(lat.levels), 0);
    std::size_t flat = lat.origin;
    for (std::size_t cell = 0; cell < lat.interior; ++cell) {
        out[cell] = scale * cd[flat];
        std::size_t a = static_cast<std::size_t>(lat.levels);
        while (a-- > 0) {
            if (++idx[a] < lat.box) {
                flat += lat.stride[a];
                break;
            }
            flat -= lat.stride[a] * (lat.box - 1);
            idx[a] = 0;
        }
    }
    return result;
}

double interior_balance_residual(const JointPmf& p, std::span<const std::size_t> n) {
    if (p.kind != PmfKind::WaitConditional)
        throw ValidationError("WrongKind",
                              "balance residuals apply to the wait-conditional lattice");
    const std::size_t k = p.values.rank();
    if (n.size() != k)
        throw ValidationError("DimensionMismatch",
                              "index rank does not match the level count");
    const std::size_t top = p.values.shape()[0] - 1;
    for (std::size_t a = 0; a < k; ++a) {
        if (n[a] == 0)
            throw ValidationError("OnBoundary",
                                  "balance residual needs a strictly interior point");
        if (n[a] > top || (a == 0 && n[a] + 1 > top))
            throw ValidationError("IndexOutOfRange",
                                  "point or its upward neighbour leaves the lattice");
    }

    const ModelParams& m = p.model;
    const std::size_t flat = p.values.flat_index(n);
    const auto& stride = p.values.strides();
    const double* v = p.values.data();

    double acc = v[flat + stride[0]];
    for (std::size_t a = 0; a < k; ++a)
        acc += m.load(static_cast<int>(a)) * v[flat - stride[a]];
    const double reconstructed = acc / (1.0 + m.total_load());

    const double here = v[flat];
    if (!(here > 0.0) || !(reconstructed > 0.0))
        throw ValidationError("NonPositiveProbability",
                              "balance residual needs positive probabilities");
    return std::abs(std::log(here) - std::log(reconstructed));
}

}  // namespace priq
