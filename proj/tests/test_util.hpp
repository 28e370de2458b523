#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

// Deterministic input generation for tests; independent of the library's
// own RNG choices so seeds here never couple to seeds there.
namespace testutil {

struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    // splitmix64 step
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    std::complex<double> in_disc(double radius) {
        const double rad = radius * std::sqrt(uniform());
        const double ang = 2.0 * M_PI * uniform();
        return {rad * std::cos(ang), rad * std::sin(ang)};
    }

    // Strictly positive fractions that sum to one.
    std::vector<double> fractions(int k) {
        std::vector<double> f(static_cast<std::size_t>(k));
        double sum = 0.0;
        for (auto& v : f) {
            v = -std::log(1.0 - uniform());
            sum += v;
        }
        for (auto& v : f) v /= sum;
        return f;
    }
};

}  // namespace testutil
