#pragma once

#include <span>
#include <vector>

#include "priq/errors.hpp"

namespace priq {

// Validated parameter set for the non-preemptive multi-server Markovian
// priority queue: c identical servers, common service rate mu, K arrival
// classes.  Level 0 is the highest priority; loads are per-server,
// load(k) = lambda_k / (c * mu), and ergodicity requires their sum < 1.
class ModelParams {
public:
    static ModelParams from_rates(std::span<const double> lambda, double mu, int servers);

    // Adopt already-computed per-server loads verbatim (no division), so
    // serialized models round-trip bit-exactly.
    static ModelParams from_loads(std::span<const double> loads, int servers, double mu);

    // Build from a total per-server load and level fractions; fractions are
    // normalized internally so only their ratios matter.  Arrival rates are
    // realized against the given service rate.
    static ModelParams from_fractions(double total_load, std::span<const double> fractions,
                                      int servers, double mu = 1.0);

    int levels() const noexcept { return static_cast<int>(load_.size()); }
    int servers() const noexcept { return servers_; }
    double mu() const noexcept { return mu_; }

    double load(int level) const { return load_.at(static_cast<std::size_t>(level)); }
    std::span<const double> loads() const noexcept { return load_; }
    double total_load() const noexcept { return sigma_.back(); }

    // Cumulative load of the `count` highest-priority levels, count in [0, K].
    double sigma(int count) const { return sigma_.at(static_cast<std::size_t>(count)); }

    // Offered load in server units, lambda_total / mu = c * total_load.
    double rho() const noexcept { return static_cast<double>(servers_) * total_load(); }

    double arrival_rate(int level) const { return load(level) * servers_ * mu_; }
    double arrival_rate_total() const noexcept { return rho() * mu_; }

private:
    ModelParams(std::vector<double> load, int servers, double mu);

    std::vector<double> load_;
    std::vector<double> sigma_;  // sigma_[p] = sum of the p highest-priority loads
    int servers_ = 1;
    double mu_ = 1.0;
};

// Birth-death quantities of the aggregate M/M/c system, computed with a
// running-term recurrence so large c stays finite.
struct ErlangQuantities {
    double p0;                    // probability of an empty system
    double no_wait;               // probability an arrival finds a free server
    double all_busy_queue_empty;  // probability all servers busy, no one queued
};

ErlangQuantities erlang_quantities(const ModelParams& m);

// Unconditional queue-length distribution of the highest-priority class:
// a point mass at zero plus a geometric tail in its own load.
double high_priority_marginal(const ModelParams& m, int n);

}  // namespace priq
