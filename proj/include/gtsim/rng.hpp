#pragma once

#include <cstdint>
#include <vector>

namespace gtsim {

/// SplitMix64 stream (Steele, Lea & Flood 2014), used everywhere randomness
/// is needed. std::mt19937_64 with the standard distributions would not do:
/// uniform_int_distribution is implementation-defined, so identical seeds
/// could produce different designs on different standard libraries. This
/// generator plus the Lemire bounded sampler below are pinned bit-exactly.
///
/// Stream law: state' = state + 0x9E3779B97F4A7C15; output = mix13(state')
/// where mix13 is z ^= z>>30, z *= 0xBF58476D1CE4E5B9, z ^= z>>27,
/// z *= 0x94D049BB133111EB, z ^= z>>31.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [0, bound) via Lemire's multiply-shift with rejection.
  /// Exactly one draw in the common case; unbiased for every bound.
  std::uint64_t below(std::uint64_t bound) {
    using u128 = unsigned __int128;
    u128 product = static_cast<u128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = static_cast<u128>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

 private:
  std::uint64_t state_;
};

/// Uniform k-subset of [0, n), returned sorted. Floyd's algorithm: for
/// j = n-k .. n-1 draw t in [0, j+1); insert t unless taken, else insert j.
/// Exactly k bounded draws regardless of collisions, so the stream position
/// after a call depends only on k.
std::vector<std::uint32_t> sample_sorted_subset(std::uint64_t n, std::uint64_t k,
                                                SplitMix64& rng);

}  // namespace gtsim
