#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace arnet {

// All randomness in the project flows through explicitly seeded mt19937_64
// streams. The engine's output sequence is fixed by the standard, and the
// helpers below avoid std::*_distribution, whose results are
// implementation-defined; together this makes every run reproducible from
// its seed across compilers.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Order-sensitive combination of seed components (seed, epoch, index, ...).
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (std::uint64_t p : parts) h = splitmix64(h ^ p);
    return h;
}

inline Rng make_rng(std::initializer_list<std::uint64_t> parts) {
    return Rng(mix_seed(parts));
}

// Uniform integer in [0, n) without modulo bias (rejection sampling).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    std::uint64_t v = rng();
    while (v < threshold) v = rng();
    return v % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform_range(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

// Fisher-Yates permutation of 0..n-1.
inline std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace arnet
