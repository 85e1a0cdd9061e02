#pragma once

#include <cstdint>

namespace dpg {

/// Seeded 64-bit PRNG with a splitmix-style state advance. Small, fast, and
/// byte-reproducible across platforms, which std::mt19937 distributions are
/// not required to be.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw from [0, bound). bound must be nonzero.
    std::uint64_t next_below(std::uint64_t bound) {
        // Rejection-free multiply-shift; bias is negligible for bound << 2^64.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    /// 31-bit draw mirroring the POSIX random() range [0, 2^31).
    std::uint32_t next_random31() { return static_cast<std::uint32_t>(next() >> 33); }

    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

} // namespace dpg
