#pragma once

#include <cstdint>
#include <random>

namespace dbr {

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform,
/// unlike the std distributions.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double a, double b) { return a + (b - a) * uniform01(rng); }

}  // namespace dbr
