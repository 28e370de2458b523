#include "priq/model.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace priq {

namespace {

void check_servers_mu(int servers, double mu) {
    if (servers < 1)
        throw ValidationError("InvalidServers", "server count must be >= 1");
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw ValidationError("InvalidServiceRate", "service rate must be positive and finite");
}

}  // namespace

ModelParams::ModelParams(std::vector<double> load, int servers, double mu)
    : load_(std::move(load)), servers_(servers), mu_(mu) {
    if (load_.empty())
        throw ValidationError("NoLevels", "at least one priority level required");
    sigma_.resize(load_.size() + 1);
    sigma_[0] = 0.0;
    for (std::size_t k = 0; k < load_.size(); ++k) {
        if (!(load_[k] >= 0.0) || !std::isfinite(load_[k]))
            throw ValidationError("InvalidLoad", "per-level load must be finite and >= 0");
        sigma_[k + 1] = sigma_[k] + load_[k];
    }
    if (!(sigma_.back() > 0.0))
        throw ValidationError("ZeroLoad", "total load must be positive");
    if (!(sigma_.back() < 1.0))
        throw ValidationError("NonErgodic",
                              "total per-server load is " + std::to_string(sigma_.back()) +
                                  ", must be < 1");
}

ModelParams ModelParams::from_rates(std::span<const double> lambda, double mu, int servers) {
    check_servers_mu(servers, mu);
    std::vector<double> load(lambda.size());
    const double denom = static_cast<double>(servers) * mu;
    for (std::size_t k = 0; k < lambda.size(); ++k) {
        if (!(lambda[k] >= 0.0) || !std::isfinite(lambda[k]))
            throw ValidationError("InvalidRate", "arrival rates must be finite and >= 0");
        load[k] = lambda[k] / denom;
    }
    return ModelParams(std::move(load), servers, mu);
}

ModelParams ModelParams::from_loads(std::span<const double> loads, int servers, double mu) {
    check_servers_mu(servers, mu);
    return ModelParams(std::vector<double>(loads.begin(), loads.end()), servers, mu);
}

ModelParams ModelParams::from_fractions(double total_load, std::span<const double> fractions,
                                        int servers, double mu) {
    check_servers_mu(servers, mu);
    if (fractions.empty())
        throw ValidationError("NoLevels", "at least one priority level required");
    double sum = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0) || !std::isfinite(f))
            throw ValidationError("InvalidFractions", "fractions must be finite and >= 0");
        sum += f;
    }
    if (!(sum > 0.0))
        throw ValidationError("InvalidFractions", "fractions must not all be zero");
    if (!(total_load > 0.0 && total_load < 1.0))
        throw ValidationError("NonErgodic", "total load must lie in (0, 1)");
    std::vector<double> load(fractions.size());
    for (std::size_t k = 0; k < fractions.size(); ++k)
        load[k] = total_load * fractions[k] / sum;
    return ModelParams(std::move(load), servers, mu);
}

ErlangQuantities erlang_quantities(const ModelParams& m) {
    const int c = m.servers();
    const double rho = m.rho();
    // term = rho^k / k!, advanced multiplicatively; never materializes
    // factorials.  The peak term is ~e^rho, so for very large c everything
    // is rescaled by 2^-512 as needed; only ratios survive to the outputs,
    // except p0 itself which is reassembled through logs.
    double term = 1.0;
    double below = 1.0;  // sum over k = 0 .. c-1 of rho^k / k!
    int rescales = 0;
    constexpr double kRescale = 0x1p-512;
    for (int k = 1; k < c; ++k) {
        term *= rho / static_cast<double>(k);
        below += term;
        if (below > 1e260) {
            term *= kRescale;
            below *= kRescale;
            ++rescales;
        }
    }
    const double term_c = term * rho / static_cast<double>(c);  // rho^c / c!
    const double tail = term_c * rho / (static_cast<double>(c) - rho);
    const double inv_p0 = below + term_c + tail;
    ErlangQuantities q{};
    q.p0 = rescales == 0
               ? 1.0 / inv_p0
               : std::exp(-(std::log(inv_p0) + rescales * 512.0 * std::log(2.0)));
    q.no_wait = below / inv_p0;
    q.all_busy_queue_empty = term_c / inv_p0;

    // Same quantity through the queue-side identity; disagreement means a
    // bug.  The wait probability is taken in complement form, not 1 - no_wait,
    // which cancels to nothing under light load.
    const double alt = (1.0 - m.total_load()) * ((term_c + tail) / inv_p0);
    if (std::abs(alt - q.all_busy_queue_empty) >
        1e-13 * std::max(alt, q.all_busy_queue_empty))
        throw NumericError("ErlangCrossCheck",
                           "birth-death and queue-side forms of p_c disagree");
    return q;
}

double high_priority_marginal(const ModelParams& m, int n) {
    if (n < 0) throw ValidationError("NegativeIndex", "queue length must be >= 0");
    const ErlangQuantities q = erlang_quantities(m);
    const double r1 = m.load(0);
    const double tail = (1.0 - q.no_wait) * (1.0 - r1) * std::pow(r1, n);
    return n == 0 ? q.no_wait + tail : tail;
}

}  // namespace priq
