#pragma once

#include <cstdint>

namespace priq::detail {

// Deterministic 64-bit stream (splitmix64). Private to the library;
// every module that promises seed-reproducible output draws from this
// one engine so the promise holds across module boundaries.
struct SplitMix64 {
    std::uint64_t s;
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    // Uniform on (0, 1]; safe under a logarithm.
    double positive_uniform() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }
};

}  // namespace priq::detail
