#pragma once

#include <cstdint>

namespace kffnn {

/// SplitMix64 generator. The integer stream is fixed by the constants below so
/// runs reproduce exactly in any language:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// uniform01() = (next_u64() >> 11) * 2^-53, which lies in [0, 1).
/// gaussian() is one Box-Muller draw consuming two uniforms u1, u2:
///   sqrt(-2 ln(1 - u1)) * cos(2 pi u2)
/// The sine branch is discarded so each call consumes exactly two integers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept;
  double uniform01() noexcept;

  /// Value in [lo, hi). Throws ContractError unless lo < hi.
  double uniform(double lo, double hi);

  /// floor(uniform01() * n), an index in [0, n). Throws on n == 0.
  std::uint64_t below(std::uint64_t n);

  double gaussian() noexcept;
  double gaussian(double mean, double sigma) noexcept { return mean + sigma * gaussian(); }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and a salt, using the
/// SplitMix64 finalizer. Used to give each experiment cell its own generator.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept;

}  // namespace kffnn
