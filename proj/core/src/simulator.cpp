#include "priq/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "priq/errors.hpp"
#include "splitmix.hpp"

namespace priq {
namespace {

constexpr int kBatches = 32;

// Per-batch weight totals keyed by bin, grown as deeper states appear.
struct BatchBins {
    std::array<std::vector<double>, kBatches> acc;

    void add(int batch, std::size_t bin, double w) {
        auto& row = acc[static_cast<std::size_t>(batch)];
        if (row.size() <= bin) row.resize(bin + 1, 0.0);
        row[bin] += w;
    }
    std::size_t bins() const {
        std::size_t n = 0;
        for (const auto& row : acc) n = std::max(n, row.size());
        return n;
    }
    double at(int batch, std::size_t bin) const {
        const auto& row = acc[static_cast<std::size_t>(batch)];
        return bin < row.size() ? row[bin] : 0.0;
    }
};

// One batch-means standard error from per-batch ratios.
double batch_se(const std::array<double, kBatches>& means) {
    double mean = 0.0;
    for (double m : means) mean += m;
    mean /= kBatches;
    double ss = 0.0;
    for (double m : means) {
        const double d = m - mean;
        ss += d * d;
    }
    return std::sqrt(ss / (static_cast<double>(kBatches) * (kBatches - 1.0)));
}

struct HistStats {
    std::vector<double> mass;
    std::vector<double> se;
};

// Masses are normalized by the histogram's own accumulated total, so each
// one sums to 1 up to a few ulps regardless of how long the run was.
HistStats finalize(const BatchBins& bb, const std::array<double, kBatches>& weight) {
    HistStats h;
    const std::size_t n = bb.bins();
    h.mass.assign(n, 0.0);
    h.se.assign(n, 0.0);
    double total = 0.0;
    for (std::size_t bin = 0; bin < n; ++bin) {
        double t = 0.0;
        for (int b = 0; b < kBatches; ++b) t += bb.at(b, bin);
        h.mass[bin] = t;
        total += t;
    }
    for (auto& x : h.mass) x /= total;
    std::array<double, kBatches> means{};
    for (std::size_t bin = 0; bin < n; ++bin) {
        for (int b = 0; b < kBatches; ++b)
            means[static_cast<std::size_t>(b)] =
                bb.at(b, bin) / weight[static_cast<std::size_t>(b)];
        h.se[bin] = batch_se(means);
    }
    return h;
}

}  // namespace

SimResult simulate(const SimConfig& cfg) {
    const auto& m = cfg.model;
    const int levels = m.levels();
    const int c = m.servers();
    const double mu = m.mu();
    std::vector<double> lam(static_cast<std::size_t>(levels));
    double lam_total = 0.0;
    for (int k = 0; k < levels; ++k) {
        lam[static_cast<std::size_t>(k)] = m.arrival_rate(k);
        lam_total += lam[static_cast<std::size_t>(k)];
    }
    if (!(lam_total > 0.0))
        throw ValidationError("ZeroRates", "every arrival rate is zero");
    if (cfg.sample_events < kBatches)
        throw ValidationError("TooFewEvents",
                              "need at least one sampled event per batch");

    detail::SplitMix64 rng{cfg.seed};

    // State: waiting count and in-service count per level. Service rates do
    // not depend on the class, so the in-service split only matters for the
    // preemptive variant and for picking which class a completion frees.
    std::vector<std::uint64_t> q(static_cast<std::size_t>(levels), 0);
    std::vector<int> in_service(static_cast<std::size_t>(levels), 0);
    int busy = 0;
    std::uint64_t waiting = 0;

    const bool preemptive = cfg.discipline == Discipline::Preemptive;
    const bool time_avg = cfg.sampling == SamplingMode::TimeAveraged;

    std::vector<BatchBins> level_bins(static_cast<std::size_t>(levels));
    BatchBins busy_bins;
    std::vector<double> agg_acc;
    std::vector<std::array<double, kBatches>> mean_acc(
        static_cast<std::size_t>(levels), std::array<double, kBatches>{});
    std::array<double, kBatches> batch_weight{};
    double span = 0.0;

    const std::uint64_t total_events = cfg.warmup_events + cfg.sample_events;
    for (std::uint64_t e = 0; e < total_events; ++e) {
        const bool sampling = e >= cfg.warmup_events;
        const double total_rate = lam_total + static_cast<double>(busy) * mu;
        const double dt = -std::log(rng.positive_uniform()) / total_rate;

        if (sampling) {
            const std::uint64_t se_idx = e - cfg.warmup_events;
            const int batch = static_cast<int>(se_idx * kBatches / cfg.sample_events);
            const double w = time_avg ? dt : 1.0;
            for (int k = 0; k < levels; ++k) {
                const auto kk = static_cast<std::size_t>(k);
                level_bins[kk].add(batch, q[kk], w);
                mean_acc[kk][static_cast<std::size_t>(batch)] +=
                    w * static_cast<double>(q[kk]);
            }
            busy_bins.add(batch, static_cast<std::size_t>(busy), w);
            if (agg_acc.size() <= waiting) agg_acc.resize(waiting + 1, 0.0);
            agg_acc[waiting] += w;
            batch_weight[static_cast<std::size_t>(batch)] += w;
            span += dt;
        }

        const std::uint64_t waiting_before = waiting;
        const bool arrival = rng.uniform() * total_rate < lam_total;
        if (arrival) {
            double x = rng.uniform() * lam_total;
            int k = 0;
            for (int j = 0; j < levels; ++j) {
                if (!(lam[static_cast<std::size_t>(j)] > 0.0)) continue;
                k = j;
                x -= lam[static_cast<std::size_t>(j)];
                if (x < 0.0) break;
            }
            if (busy < c) {
                ++in_service[static_cast<std::size_t>(k)];
                ++busy;
            } else if (preemptive) {
                int low = -1;
                for (int j = levels; j-- > 0;)
                    if (in_service[static_cast<std::size_t>(j)] > 0) {
                        low = j;
                        break;
                    }
                if (low > k) {
                    // Displace the lowest-priority client back to its queue.
                    --in_service[static_cast<std::size_t>(low)];
                    ++q[static_cast<std::size_t>(low)];
                    ++in_service[static_cast<std::size_t>(k)];
                    ++waiting;
                } else {
                    ++q[static_cast<std::size_t>(k)];
                    ++waiting;
                }
            } else {
                ++q[static_cast<std::size_t>(k)];
                ++waiting;
            }
            if (!preemptive && waiting < waiting_before)
                throw NumericError("NonPreemption",
                                   "an arrival displaced a waiting client");
        } else {
            // All in-service clients complete at the same rate, so the
            // finishing one is uniform over the busy servers.
            auto pick = static_cast<std::uint64_t>(rng.uniform() *
                                                   static_cast<double>(busy));
            if (pick >= static_cast<std::uint64_t>(busy))
                pick = static_cast<std::uint64_t>(busy) - 1;
            int j = 0;
            for (;; ++j) {
                const auto have =
                    static_cast<std::uint64_t>(in_service[static_cast<std::size_t>(j)]);
                if (pick < have) break;
                pick -= have;
            }
            --in_service[static_cast<std::size_t>(j)];
            --busy;
            for (int i = 0; i < levels; ++i)
                if (q[static_cast<std::size_t>(i)] > 0) {
                    --q[static_cast<std::size_t>(i)];
                    --waiting;
                    ++in_service[static_cast<std::size_t>(i)];
                    ++busy;
                    break;
                }
        }
        if (busy < c && waiting != 0)
            throw NumericError("WorkConservation",
                               "a server idled while clients were waiting");
    }

    SimResult res;
    res.level_hist.resize(static_cast<std::size_t>(levels));
    res.level_half_width.resize(static_cast<std::size_t>(levels));
    res.level_mean.resize(static_cast<std::size_t>(levels));
    res.level_mean_se.resize(static_cast<std::size_t>(levels));
    double weight_total = 0.0;
    for (double w : batch_weight) weight_total += w;
    std::array<double, kBatches> means{};
    for (int k = 0; k < levels; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        auto stats = finalize(level_bins[kk], batch_weight);
        res.level_hist[kk] = std::move(stats.mass);
        res.level_half_width[kk] = std::move(stats.se);
        double macc = 0.0;
        for (int b = 0; b < kBatches; ++b) {
            const auto bb = static_cast<std::size_t>(b);
            macc += mean_acc[kk][bb];
            means[bb] = mean_acc[kk][bb] / batch_weight[bb];
        }
        res.level_mean[kk] = macc / weight_total;
        res.level_mean_se[kk] = batch_se(means);
    }
    auto busy_stats = finalize(busy_bins, batch_weight);
    res.busy_hist = std::move(busy_stats.mass);
    res.busy_half_width = std::move(busy_stats.se);
    res.busy_hist.resize(static_cast<std::size_t>(c) + 1, 0.0);
    res.busy_half_width.resize(static_cast<std::size_t>(c) + 1, 0.0);
    double agg_total = 0.0;
    for (double x : agg_acc) agg_total += x;
    for (double& x : agg_acc) x /= agg_total;
    res.aggregate_hist = std::move(agg_acc);
    res.sim_time = span;
    res.empty_fraction = res.busy_hist[0];
    res.empty_fraction_se = res.busy_half_width[0];
    return res;
}

std::vector<MarginalComparison> compare_marginals(
    const SimResult& res, const std::vector<std::vector<double>>& analytic) {
    if (analytic.size() != res.level_hist.size())
        throw ValidationError("ShapeMismatch",
                              "need one analytic marginal per simulated level");
    std::vector<MarginalComparison> table;
    table.reserve(analytic.size());
    for (std::size_t k = 0; k < analytic.size(); ++k) {
        if (analytic[k].empty())
            throw ValidationError("ShapeMismatch", "analytic marginal is empty");
        const auto& sim = res.level_hist[k];
        const auto& hw = res.level_half_width[k];
        const std::size_t n = std::max(sim.size(), analytic[k].size());
        MarginalComparison row{static_cast<int>(k), 0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            const double s = i < sim.size() ? sim[i] : 0.0;
            const double a = i < analytic[k].size() ? analytic[k][i] : 0.0;
            const double diff = std::abs(s - a);
            row.tv += diff;
            if (i < hw.size() && hw[i] > 0.0)
                row.max_z = std::max(row.max_z, diff / hw[i]);
        }
        row.tv *= 0.5;
        table.push_back(row);
    }
    return table;
}

}  // namespace priq
