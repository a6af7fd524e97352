#pragma once

#include <cmath>
#include <cstdint>

namespace eit {

/// SplitMix64 finalizer; used as a counter-based generator so every draw is
/// addressed by (seed, indices) and independent of evaluation order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline double uniform_from_bits(std::uint64_t bits) {
  // (0, 1]: 53 mantissa bits, shifted away from zero for the log below
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal draw addressed by (seed, stream, counter) via Box-Muller.
inline double counter_gaussian(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t counter) {
  const std::uint64_t base = splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ull));
  const double u1 = uniform_from_bits(splitmix64(base ^ (2 * counter)));
  const double u2 = uniform_from_bits(splitmix64(base ^ (2 * counter + 1)));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace eit
