#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace divhash {

/// Counter-based random numbers: every draw is a pure function of
/// (seed, stream, index), so a hyperplane coordinate does not depend on how
/// many other coordinates were generated before it.
namespace counter_rng {

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t bits(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t index) noexcept {
  return mix64(mix64(mix64(seed) ^ stream) ^ index);
}

/// Uniform in the open interval (0, 1).
inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
  return (static_cast<double>(bits(seed, stream, index) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two consecutive counters.
inline double gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
  const double u1 = uniform(seed, stream, 2 * index);
  const double u2 = uniform(seed, stream, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace counter_rng
}  // namespace divhash
