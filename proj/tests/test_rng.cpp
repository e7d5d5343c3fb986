#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "loopsoup/rng.hpp"

using loopsoup::Rng;

namespace {
struct Moments {
  double mean = 0, var = 0;
};
template <typename F>
Moments sample_moments(F&& f, int n) {
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    double v = f();
    s += v;
    s2 += v * v;
  }
  Moments m;
  m.mean = s / n;
  m.var = s2 / n - m.mean * m.mean;
  return m;
}
}  // namespace

TEST_CASE("same seed and stream reproduce the sequence") {
  Rng a(123, 7), b(123, 7);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different streams and seeds decorrelate") {
  Rng a(123, 0), b(123, 1), c(124, 0);
  int eq_ab = 0, eq_ac = 0;
  for (int i = 0; i < 64; ++i) {
    std::uint64_t x = a.next_u64();
    if (x == b.next_u64()) ++eq_ab;
    if (x == c.next_u64()) ++eq_ac;
  }
  REQUIRE(eq_ab == 0);
  REQUIRE(eq_ac == 0);
}

TEST_CASE("child streams are independent of parent's call position") {
  Rng a(99);
  Rng a1 = a.child(5);
  a.next_u64();
  a.next_u64();
  Rng a2 = a.child(5);
  REQUIRE(a1.next_u64() == a2.next_u64());
  REQUIRE(a.child(5).next_u64() != a.child(6).next_u64());
}

TEST_CASE("u01 lies in (0,1] and is uniform") {
  Rng r(1);
  auto m = sample_moments([&] { return r.u01(); }, 200000);
  REQUIRE(std::abs(m.mean - 0.5) < 0.005);
  REQUIRE(std::abs(m.var - 1.0 / 12) < 0.005);
}

TEST_CASE("normal moments") {
  Rng r(2);
  auto m = sample_moments([&] { return r.normal(); }, 200000);
  REQUIRE(std::abs(m.mean) < 0.01);
  REQUIRE(std::abs(m.var - 1.0) < 0.02);
}

TEST_CASE("exponential moments") {
  Rng r(3);
  auto m = sample_moments([&] { return r.exponential(); }, 200000);
  REQUIRE(std::abs(m.mean - 1.0) < 0.01);
  REQUIRE(std::abs(m.var - 1.0) < 0.05);
}

TEST_CASE("poisson moments across both regimes") {
  Rng r(4);
  for (double mean : {0.3, 3.0, 29.5, 45.0, 300.0}) {
    auto m = sample_moments([&] { return static_cast<double>(r.poisson(mean)); },
                            100000);
    double se = std::sqrt(mean / 100000);
    INFO("mean " << mean);
    REQUIRE(std::abs(m.mean - mean) < 5 * se);
    REQUIRE(std::abs(m.var - mean) < 0.05 * mean + 5 * se);
  }
}

TEST_CASE("gamma matches shape/scale moments, including shape < 1") {
  Rng r(5);
  for (double shape : {0.5, 1.0, 2.5}) {
    auto m = sample_moments([&] { return r.gamma(shape); }, 200000);
    INFO("shape " << shape);
    REQUIRE(std::abs(m.mean - shape) < 0.02);
    REQUIRE(std::abs(m.var - shape) < 0.05);
  }
  // Gamma(1/2,1) = chi^2_1 / 2: P(T < 0.001) should be ~ 2.5%, never negative.
  int tiny = 0;
  for (int i = 0; i < 100000; ++i) {
    double v = r.gamma(0.5);
    REQUIRE(v >= 0);
    if (v < 0.001) ++tiny;
  }
  REQUIRE(tiny > 1500);
  REQUIRE(tiny < 4000);
}

TEST_CASE("uniform_int covers range without bias") {
  Rng r(6);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 140000; ++i) ++hist[r.uniform_int(7)];
  for (int c : hist) REQUIRE(std::abs(c - 20000) < 600);
}
