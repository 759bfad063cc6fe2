#ifndef FPTEST_RNG_HPP
#define FPTEST_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fptest {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Reproducible random stream: mt19937_64 seeded from a mixed key, with
/// explicit draw formulas so results do not depend on library internals.
/// Streams for Monte-Carlo replicates are derived from (seed, n, replicate),
/// so parallel schedules cannot change the numbers.
class RngStream {
 public:
  explicit RngStream(uint64_t key) : gen_(key) {}

  static RngStream for_replicate(uint64_t seed, uint64_t n, uint64_t replicate) {
    uint64_t k = splitmix64(seed);
    k = splitmix64(k ^ (0x6a09e667f3bcc908ull + n));
    k = splitmix64(k ^ (0xbb67ae8584caa73bull + replicate));
    return RngStream(k);
  }

  uint64_t bits() { return gen_(); }

  /// Uniform in [0,1) with 53 random bits.
  double uniform01() { return double(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Marsaglia polar; one spare kept.
  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  /// Index draw by CDF inversion over the given weights (need not be
  /// perfectly normalized; the last index absorbs rounding).
  size_t categorical(const std::vector<double>& weights) {
    double u = uniform01();
    double acc = 0;
    for (size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

  size_t uniform_index(size_t n) { return size_t(uniform01() * double(n)) % n; }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0;
};

}  // namespace fptest

#endif  // FPTEST_RNG_HPP
