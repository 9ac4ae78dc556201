#pragma once

#include <cmath>
#include <cstdint>

namespace gibbslab {

// splitmix64; used both as a seed mixer and as the stream-splitting hash.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Per-chain stream seed: chain index mixed into the master seed by a fixed
// 64-bit hash. Streams are independent for any master seed.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

// xoshiro256++, seeded via splitmix64. Self-contained so that draws are
// bit-reproducible across platforms, unlike std::normal_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    for (auto& w : s_) {
      seed = splitmix64(seed);
      w = seed;
    }
    have_spare_ = false;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in (0,1); never returns 0 or 1
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // standard normal via Marsaglia polar; deterministic for a fixed seed
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // Lemire rejection-free-ish; bias < 2^-64, rejected for exactness
    std::uint64_t x, r;
    do {
      x = next_u64();
      r = x % n;
    } while (x - r > std::uint64_t(0) - n);
    return r;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gibbslab
