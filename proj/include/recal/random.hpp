#pragma once

#include <cstdint>
#include <random>

namespace recal {

/// The seeded stream every stochastic routine draws from. Callers own it;
/// nothing in the library keeps a global generator.
using RandomStream = std::mt19937_64;

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Child seed for sub-stream `index` of `base`. Pure function of both
/// arguments, so replicate/fold k gets the same stream regardless of how
/// many siblings exist or in which order they run.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return detail::splitmix64(detail::splitmix64(base) ^ detail::splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline RandomStream make_stream(std::uint64_t base, std::uint64_t index) {
  return RandomStream{derive_seed(base, index)};
}

}  // namespace recal
