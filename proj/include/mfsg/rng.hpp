#pragma once

#include <cstdint>

namespace mfsg {

inline constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Murmur3 finalizer.
constexpr std::uint32_t fmix32(std::uint32_t h) {
    h ^= h >> 16;
    h *= 0x85EBCA6BU;
    h ^= h >> 13;
    h *= 0xC2B2AE35U;
    h ^= h >> 16;
    return h;
}

/// Key for an independent substream, derived from (seed, id) only.
constexpr std::uint64_t substream_key(std::uint64_t seed, std::uint64_t id) {
    return mix64(seed ^ mix64(id + kGolden64));
}

// Counter-based generator: the k-th draw is a pure function of (key, k), so
// streams split by substream_key are reproducible independent of scheduling.
class Rng {
public:
    constexpr explicit Rng(std::uint64_t key) : key_(key) {}
    static constexpr Rng substream(std::uint64_t seed, std::uint64_t id) { return Rng(substream_key(seed, id)); }

    constexpr std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden64); }
    /// Uniform in [0, 1) with 53 bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace mfsg
