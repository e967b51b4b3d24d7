#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace gcf {

/// The single random engine used throughout; seeded once per run.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits (platform independent).
inline double uniform01(Rng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n) by rejection (platform independent).
inline std::size_t uniform_index(Rng &rng, std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

/**
 * Draws an index with probability proportional to `weights`. Falls back to a
 * uniform draw when all weights are zero. `weights` must be non-empty and
 * non-negative.
 */
inline std::size_t weighted_index(Rng &rng, std::span<const double> weights) {
    double total = 0;
    for (double w : weights)
        total += w;
    if (!(total > 0))
        return uniform_index(rng, weights.size());
    const double target = uniform01(rng) * total;
    double acc = 0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0)
            continue;
        acc += weights[i];
        last_positive = i;
        if (target < acc)
            return i;
    }
    return last_positive;
}

std::string serialize_rng(const Rng &rng);
Rng deserialize_rng(const std::string &text);

} // namespace gcf
