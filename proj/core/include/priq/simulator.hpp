#pragma once

#include <cstdint>
#include <vector>

#include "priq/model.hpp"

namespace priq {

// How state occupancy is weighted while sampling: by the sojourn time spent
// in each state (the stationary, PASTA-consistent choice and the default),
// or by one count per event transition (embedded-chain average, kept as a
// sensitivity knob).
enum class SamplingMode { TimeAveraged, EventAveraged };

// Service order. Preemptive displaces the lowest-priority client in service
// whenever a higher-priority client would otherwise have to wait; it exists
// so tests can measure how sensitive each marginal is to the discipline,
// not as a supported model.
enum class Discipline { NonPreemptive, Preemptive };

struct SimConfig {
    ModelParams model;
    std::uint64_t warmup_events = 100'000;
    std::uint64_t sample_events = 1'000'000;
    std::uint64_t seed = 1;
    SamplingMode sampling = SamplingMode::TimeAveraged;
    Discipline discipline = Discipline::NonPreemptive;
};

// Normalized occupancy histograms with batch-means error bars. Every
// half-width is one standard error of the matching bin computed from 32
// equal batches of the sampling phase; histogram masses sum to one per
// level. Queue lengths count waiting clients only, never those in service.
struct SimResult {
    // level_hist[k][n]: fraction of weight with n level-k clients waiting
    // (k = 0 is the highest priority).
    std::vector<std::vector<double>> level_hist;
    std::vector<std::vector<double>> level_half_width;
    std::vector<double> level_mean;     // mean waiting count per level
    std::vector<double> level_mean_se;  // batch-means error of that mean
    std::vector<double> aggregate_hist;  // waiting count summed over levels
    std::vector<double> busy_hist;       // busy-server count, size c + 1
    std::vector<double> busy_half_width;
    double sim_time = 0.0;  // simulated span of the sampling phase
    // The system is empty exactly when no server is busy, so this equals
    // busy_hist[0]; kept explicit with its error for direct checks.
    double empty_fraction = 0.0;
    double empty_fraction_se = 0.0;
};

// Discrete-event run: merged Poisson arrivals thinned over levels, one
// exponential service clock per busy server, and on each completion the
// head of the highest-priority non-empty queue enters service. The walk is
// deterministic for a fixed config. Throws ZeroRates when every arrival
// rate vanishes; work conservation and the discipline's no-displacement
// rule are asserted on every event.
SimResult simulate(const SimConfig& cfg);

struct MarginalComparison {
    int level;      // 0 = highest priority
    double tv;      // total-variation distance, simulated vs analytic
    // Worst |simulated - analytic| / half-width over bins with a positive
    // half-width; bins the simulation never reached show up in tv instead.
    double max_z;
};

// Compare simulated per-level histograms against analytic full (not
// wait-conditional) marginals, one vector per level, highest first.
// Throws ShapeMismatch when the level counts differ or a marginal is empty.
std::vector<MarginalComparison> compare_marginals(
    const SimResult& res, const std::vector<std::vector<double>>& analytic);

}  // namespace priq
