#include "priq/pmf.hpp"

namespace priq {

JointPmf full_pmf(const JointPmf& wait_conditional) {
    if (wait_conditional.kind != PmfKind::WaitConditional)
        throw ValidationError("WrongKind", "input distribution is not wait-conditional");
    const ErlangQuantities q = erlang_quantities(wait_conditional.model);
    JointPmf out = wait_conditional;
    out.kind = PmfKind::Full;
    const double wait = 1.0 - q.no_wait;
    auto& v = out.values.storage();
    for (auto& x : v) x *= wait;
    v[0] += q.no_wait;
    return out;
}

std::vector<double> shell_sums(const JointPmf& pmf) {
    const auto& shape = pmf.values.shape();
    const std::size_t rank = shape.size();
    std::size_t max_total = 0;
    for (auto e : shape) max_total += e - 1;
    std::vector<double> sums(max_total + 1, 0.0);
    std::vector<std::size_t> idx(rank, 0);
    std::size_t total = 0;
    std::size_t flat = 0;
    const double* v = pmf.values.data();
    const std::size_t count = pmf.values.size();
    while (flat < count) {
        sums[total] += v[flat];
        // Odometer with a running coordinate total.
        std::size_t a = rank;
        while (a-- > 0) {
            if (++idx[a] < shape[a]) {
                ++total;
                break;
            }
            total -= idx[a] - 1;
            idx[a] = 0;
        }
        ++flat;
    }
    return sums;
}

std::vector<double> level_marginal(const JointPmf& pmf, int level) {
    if (level < 0 || level >= pmf.levels())
        throw ValidationError("LevelOutOfRange", "no such priority level");
    const auto& shape = pmf.values.shape();
    const auto& stride = pmf.values.strides();
    const std::size_t extent = shape[static_cast<std::size_t>(level)];
    std::vector<double> out(extent, 0.0);
    const double* v = pmf.values.data();
    const std::size_t count = pmf.values.size();
    const std::size_t st = stride[static_cast<std::size_t>(level)];
    for (std::size_t flat = 0; flat < count; ++flat)
        out[(flat / st) % extent] += v[flat];
    return out;
}

}  // namespace priq
