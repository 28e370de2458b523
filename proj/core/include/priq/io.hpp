#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "priq/pmf.hpp"

namespace priq {

enum class ArrayFormat { Csv, RawF64 };

// Incremental FNV-1a 64-bit hash over raw bytes. Exported artifacts carry
// it so a rerun can prove it reproduced the same file.
struct Fnv1a64 {
    std::uint64_t state = 0xcbf29ce484222325ull;

    void update(const void* data, std::size_t n) {
        auto b = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state ^= b[i];
            state *= 0x100000001b3ull;
        }
    }
    std::uint64_t value() const noexcept { return state; }
};

std::uint64_t fnv1a64_file(const std::string& path);

// Writes <prefix>.json metadata plus the dense array in row-major order
// (last axis fastest) as <prefix>.csv, one innermost row per line with 17
// significant digits per entry, or <prefix>.f64, little-endian float64.
// Both formats round-trip doubles exactly. Entries in [-1e-12, 0) are
// clamped to zero on the way out; anything lower throws
// NegativeProbability. Returns the metadata path.
std::string export_pmf(const JointPmf& p, const std::string& prefix, ArrayFormat format);

// Rebuilds a distribution written by export_pmf. The metadata names the
// data file relative to its own directory; the stored checksum and element
// count are verified before the result is returned.
JointPmf import_pmf(const std::string& meta_path);

}  // namespace priq
