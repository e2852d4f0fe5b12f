#pragma once

#include <cstdint>

#include "kpm/rational.hpp"

namespace kpm {

// splitmix64, the documented generator behind every seeded choice in this
// project (format version 1). 64-bit state; update rule:
//   state += 0x9E3779B97F4A7C15
//   z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   output = z ^ (z >> 31)
// Draws are consumed in a fixed documented order per call site, so outputs
// are bit-for-bit reproducible across platforms and worker counts.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // True with probability exactly p: draw u and test u * den < num * 2^64.
    bool bernoulli(const Rational& p) {
        std::uint64_t u = next();
        if (p.num() <= 0) return false;
        unsigned __int128 lhs = static_cast<unsigned __int128>(u) * static_cast<unsigned __int128>(p.den());
        unsigned __int128 rhs = static_cast<unsigned __int128>(p.num()) << 64;
        return lhs < rhs;
    }

    // Uniform-ish value in [0, bound) via modulo; the bias is irrelevant for
    // the sampling validators this feeds and keeps the stream portable.
    std::uint64_t below(std::uint64_t bound) { return bound == 0 ? 0 : next() % bound; }

private:
    std::uint64_t state_;
};

}  // namespace kpm
