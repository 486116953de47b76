#pragma once

#include <cstdint>
#include <vector>

namespace rsim {

/// Seedable 64-bit generator used everywhere randomness is needed, so that
/// runs are reproducible bit-for-bit across platforms and across
/// implementations that follow the same constants.
///
/// Construction: the 64-bit seed is expanded into four state words with
/// splitmix64 (increment 0x9E3779B97F4A7C15, mixers 0xBF58476D1CE4E5B9 and
/// 0x94D049BB133111EB). Each draw is one xoshiro256** step:
///   result = rotl(s1 * 5, 7) * 9, then the xor/shift state update with
///   shift 17 and final rotl(s3, 45).
/// Bounded draws use Lemire's multiply-reject method (no modulo bias).
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) {
    uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  uint64_t next() {
    uint64_t const result = rotl(s_[1] * 5, 7) * 9;
    uint64_t const t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform integer in [0, n). n must be positive.
  uint64_t below(uint64_t n) {
    uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<uint64_t>(m);
    if (lo < n) {
      uint64_t const threshold = (0ULL - n) % n;
      while (lo < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  int below_int(int n) { return static_cast<int>(below(static_cast<uint64_t>(n))); }

  /// True with probability p. The threshold p * 2^64 is computed in double
  /// precision, which is exact for the p values this project uses (0.5 etc.)
  /// and deterministic for any fixed double.
  bool bernoulli(double p) {
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    auto const threshold = static_cast<uint64_t>(p * 18446744073709551616.0);
    return next() < threshold;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t const j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  uint64_t s_[4];
};

}  // namespace rsim
