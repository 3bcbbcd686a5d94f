#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fvqa {

/// FNV-1a 64-bit over arbitrary bytes. Used for content digests and RNG key
/// derivation; not cryptographic.
inline uint64_t fnv1a64(std::string_view bytes, uint64_t seed = 14695981039346656037ULL) {
    uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= static_cast<uint64_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

/// SplitMix64 counter generator. Every random decision in the engine is made
/// by a SplitMix64 stream whose state is derived from (master seed, key
/// string), so adding or removing one stream never perturbs the others and
/// output is identical across machines and worker counts.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t state) : state_(state) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, n). n must be > 0. Rejection-sampled so the
    /// distribution is exact and platform-independent.
    uint64_t bounded(uint64_t n) {
        const uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    uint64_t state_;
};

/// Derives the stream for a named random decision.
inline SplitMix64 rng_for(uint64_t master_seed, std::string_view key) {
    SplitMix64 mix(fnv1a64(key) ^ (master_seed * 0x9e3779b97f4a7c15ULL));
    mix.next(); // decouple first output from raw key hash
    return mix;
}

/// Picks k distinct indices out of [0, n) by partial Fisher-Yates shuffle.
/// Result order is the selection order.
inline std::vector<size_t> sample_indices(SplitMix64& rng, size_t n, size_t k) {
    if (k > n) k = n;
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    for (size_t i = 0; i < k; ++i) {
        size_t j = i + static_cast<size_t>(rng.bounded(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

} // namespace fvqa
