#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace skinf {

/// SplitMix64 finalizer. Used to turn structured keys into well-mixed seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a substream key from a parent key and a path of integers, e.g.
/// (master seed, iteration, time index, particle index). Order-sensitive.
std::uint64_t derive_key(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept;

/// xoshiro256** engine seeded through SplitMix64.
///
/// Satisfies UniformRandomBitGenerator so the <random> distributions can be
/// used with it. Seeding is O(1), which matters because the particle filter
/// opens one substream per (time step, particle).
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace skinf
