#pragma once

// Splittable counter-based RNG with explicit distribution transforms.
//
// Monte Carlo runs must be reproducible from (seed, stream) alone, with no
// dependence on thread count or call interleaving between streams.  Each
// logical object (a loop, a field sample) draws from its own child stream, so
// results are identical no matter how work is partitioned.  std::mt19937 plus
// std distributions would tie us to libstdc++'s unspecified transform
// algorithms; everything here is pinned.

#include <cmath>
#include <cstdint>

namespace loopsoup {

namespace detail {
// Finalizer from splitmix64 / MurmurHash3.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}
}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(detail::mix64(seed ^ 0x2545f4914f6cdd1dull)),
        stream_(detail::mix64(stream ^ 0x9e3779b97f4a7c15ull)) {}

  // Independent child stream; safe to derive one per work item.
  Rng child(std::uint64_t substream) const {
    Rng r = *this;
    r.stream_ = detail::mix64(stream_ + 0x6a09e667f3bcc909ull * (substream + 1));
    r.ctr_ = 0;
    return r;
  }

  std::uint64_t next_u64() {
    std::uint64_t v = key_ + 0x9e3779b97f4a7c15ull * ++ctr_;
    return detail::mix64(v ^ stream_) + detail::mix64(stream_ + v);
  }

  // Uniform on (0,1]; never 0 so log(u01()) is finite.
  double u01() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    // Multiply-shift; bias < 2^-64 * n, negligible for n << 2^32.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  double normal() {
    double u1 = u01(), u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double exponential() { return -std::log(u01()); }

  // Poisson: multiplication inversion for small mean, PTRS rejection above.
  std::uint64_t poisson(double mean) {
    if (mean <= 0) return 0;
    if (mean < 30.0) {
      double limit = std::exp(-mean), prod = 1.0;
      std::uint64_t k = 0;
      do {
        ++k;
        prod *= u01();
      } while (prod > limit);
      return k - 1;
    }
    // PTRS (Hormann 1993), transformed rejection with squeeze.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
      double u = u01() - 0.5;
      double v = u01();
      double us = 0.5 - std::fabs(u);
      double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
      if (kf < 0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          kf * log_mean - mean - std::lgamma(kf + 1.0))
        return static_cast<std::uint64_t>(kf);
    }
  }

  // Gamma(shape, 1) via Marsaglia-Tsang, with the power boost for shape < 1.
  double gamma(double shape) {
    if (shape <= 0) return 0.0;
    if (shape < 1.0) return gamma(shape + 1.0) * std::pow(u01(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0) continue;
      double v = t * t * t;
      double u = u01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t ctr_ = 0;
};

}  // namespace loopsoup
