#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pdmp {

using Rng = std::mt19937_64;

/// Independent stream for (master seed, stream index). The mapping is fixed,
/// so results computed per stream do not depend on how streams are scheduled.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// Uniform draw on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double exponential(Rng& rng, double rate) {
  return -std::log(uniform_open(rng)) / rate;
}

}  // namespace pdmp
