#pragma once

#include <cstdint>
#include <random>

namespace veritas {

// std::uniform_real_distribution is implementation-defined; these helpers
// map raw mt19937_64 output so results are identical on every toolchain.

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

}  // namespace veritas
