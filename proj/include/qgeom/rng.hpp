#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace qgeom {

namespace detail {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z)
{
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/**
 * @brief Counter-based random stream keyed by (master seed, substream key).
 *
 * Draw i of a stream is a pure function of (seed, key, i), so samples can be generated on any
 * worker in any order. Distinct keys give decorrelated sequences.
 *
 * Satisfies UniformRandomBitGenerator. Gaussian and uniform deviates are produced by explicit
 * transforms so sequences are identical across standard libraries.
 */
class RngStream
{
public:
  using result_type = std::uint64_t;

  constexpr RngStream(std::uint64_t master_seed, std::uint64_t key)
      : seed_(master_seed), key_(key),
        base_(detail::mix64(detail::mix64(master_seed ^ 0x6a09e667f3bcc908ULL) + detail::kGolden * (detail::mix64(key) | 1u)))
  {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  /// Independent child stream; used to give each sample its own stream.
  RngStream substream(std::uint64_t child_key) const { return RngStream(seed_, detail::mix64(key_ + detail::kGolden) ^ child_key); }

  /// Draw at an explicit counter without advancing.
  std::uint64_t at(std::uint64_t i) const { return detail::mix64(base_ + detail::kGolden * (i + 1)); }

  result_type operator()() { return at(counter_++); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes two draws per call.
  double normal()
  {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t base_;
  std::uint64_t counter_{0};
};

}  // namespace qgeom
