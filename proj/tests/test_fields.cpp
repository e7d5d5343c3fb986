#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "loopsoup/exact.hpp"
#include "loopsoup/fields.hpp"
#include "loopsoup/sampler.hpp"

using namespace loopsoup;

namespace {

// Independent winding oracle: total subtended angle of the closed polyline
// around the face center, divided by 2 pi.  Face centers sit at half-integer
// coordinates so no segment is ever collinear with the center.
long angle_winding(const LatticeLoop& loop, Cell f) {
  auto tr = loop.trace();
  double cx = f.first + 0.5, cy = f.second + 0.5, tot = 0;
  for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
    double a0 = std::atan2(tr[k].second - cy, tr[k].first - cx);
    double a1 = std::atan2(tr[k + 1].second - cy, tr[k + 1].first - cx);
    double step = a1 - a0;
    if (step > std::numbers::pi) step -= 2 * std::numbers::pi;
    if (step <= -std::numbers::pi) step += 2 * std::numbers::pi;
    tot += step;
  }
  return std::lround(tot / (2 * std::numbers::pi));
}

}  // namespace

TEST_CASE("winding numbers of elementary cycles") {
  LatticeLoop ccw{{0, 0}, "ENWS"};
  LatticeLoop cw{{0, 0}, "NESW"};
  REQUIRE(winding_number(ccw, {0, 0}) == 1);
  REQUIRE(winding_number(cw, {0, 0}) == -1);
  REQUIRE(winding_number(ccw, {5, 5}) == 0);
  REQUIRE(winding_number(ccw, {-1, 0}) == 0);
  REQUIRE(winding_number(ccw, {0, 3}) == 0);

  // Figure eight: two plaquettes traversed with opposite orientation.
  LatticeLoop fig8{{1, 0}, "NWSENESW"};
  REQUIRE(fig8.closed());
  REQUIRE(winding_number(fig8, {0, 0}) == 1);
  REQUIRE(winding_number(fig8, {1, 0}) == -1);

  // Doubly wound cycle has even parity class.
  LatticeLoop twice{{0, 0}, "ENWSENWS"};
  REQUIRE(winding_number(twice, {0, 0}) == 2);
  auto cls = winding_parity_class(twice, {{0, 0}});
  REQUIRE_FALSE(cls[0]);
  auto cls8 = winding_parity_class(fig8, {{0, 0}, {1, 0}});
  REQUIRE((cls8[0] && cls8[1]));
}

TEST_CASE("ray crossing agrees with the angle-summation oracle") {
  Domain d = Domain::square(3, 1.0);
  SoupSampler s(d);
  Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    Rng lr = rng.child(i);
    LatticeLoop loop = s.sample_loop(lr);
    for (Cell f : d.faces())
      REQUIRE(winding_number(loop, f) == angle_winding(loop, f));
  }
}

TEST_CASE("winding grid matches per-face winding and spins") {
  Domain d = Domain::square(3, 1.0);
  SoupSampler s(d);
  Rng rng(99);
  auto soup = s.sample_soup(2.0, rng);
  WindingGrid g = winding_field(d, soup);
  for (Cell f : d.faces()) {
    long w = 0;
    for (const auto& loop : soup) w += winding_number(loop, f);
    REQUIRE(g.winding(f) == w);
    REQUIRE(g.spin(f) == ((w % 2) ? -1 : 1));
  }
}

TEST_CASE("spin field of simple soups") {
  Domain d = Domain::square(2, 1.0);
  WindingGrid empty = winding_field(d, {});
  for (Cell f : d.faces()) REQUIRE(empty.spin(f) == 1);
  WindingGrid one = winding_field(d, {LatticeLoop{{0, 0}, "ENWS"}});
  REQUIRE(one.spin({0, 0}) == -1);
  REQUIRE(one.spin({1, 0}) == 1);
  REQUIRE(one.spin({0, 1}) == 1);
  REQUIRE(one.spin({1, 1}) == 1);
}

TEST_CASE("edge-parity reconstruction equals winding spins") {
  Domain d = Domain::square(3, 1.0);
  SoupSampler s(d);
  REQUIRE(edge_parities(d, {}).empty());
  auto single = edge_parities(d, {LatticeLoop{{0, 0}, "ENWS"}});
  REQUIRE(single.size() == 4);
  REQUIRE(spin_from_parities(d, single, {0, 0}) == -1);
  REQUIRE(spin_from_parities(d, single, {1, 0}) == 1);
  for (int i = 0; i < 10000; ++i) {
    auto soup = s.sample_soup(0.5, Rng(4242, i));
    if (soup.empty()) continue;
    WindingGrid g = winding_field(d, soup);
    auto par = edge_parities(d, soup);
    for (Cell f : d.faces())
      REQUIRE(spin_from_parities(d, par, f) == g.spin(f));
  }
}

TEST_CASE("Gaussian field covariance matches the Green matrix") {
  Domain d = Domain::square(4, 1.0);
  DgffSampler gs(d);
  Eigen::MatrixXd g = green_matrix(d);
  int nv = static_cast<int>(d.vertices().size());
  REQUIRE(nv == 25);
  int n = 100000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(nv);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(nv, nv);
  Rng rng(2);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd phi = gs.sample(rng);
    mean += phi;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(phi);
  }
  mean /= n;
  cov /= n;
  for (int a = 0; a < nv; ++a) {
    REQUIRE(std::abs(mean[a]) < 3 * std::sqrt(g(a, a) / n));
    for (int b = 0; b <= a; ++b) {
      double se = std::sqrt((g(a, a) * g(b, b) + g(a, b) * g(a, b)) / n);
      REQUIRE(std::abs(cov(a, b) - g(a, b)) < 3 * se);
    }
  }
}

TEST_CASE("single-face one-point function via both Gaussian routes") {
  // <sigma> = (48/49)^(1/2) at intensity 1/2 on the unit face.
  Domain d({{0, 0}});
  DgffSampler gs(d);
  double target = std::sqrt(48.0 / 49.0);
  int n = 200000;
  long sc = 0, si = 0;
  Rng rng(777);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd phi = gs.sample(rng);
    sc += coin_spins(d, phi, rng)[0];
    si += ising_spins_exact(d, phi, rng)[0];
  }
  double se = std::sqrt((1 - target * target) / n);
  REQUIRE(std::abs(static_cast<double>(sc) / n - target) < 3 * se);
  REQUIRE(std::abs(static_cast<double>(si) / n - target) < 3 * se);
}

TEST_CASE("coupled spin routes reproduce exact one-point functions on 2x2") {
  Domain d = Domain::square(2, 1.0);
  DgffSampler gs(d);
  double target = std::exp(-odd_mass(d, {Cell{0, 0}}));  // lambda = 1/2
  int n = 30000;
  long sc = 0, si = 0;
  Rng rng(888);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd phi = gs.sample(rng);
    sc += coin_spins(d, phi, rng)[0];
    si += ising_spins_exact(d, phi, rng)[0];
  }
  double se = std::sqrt((1 - target * target) / n);
  REQUIRE(std::abs(static_cast<double>(sc) / n - target) < 3 * se);
  REQUIRE(std::abs(static_cast<double>(si) / n - target) < 3 * se);
}

TEST_CASE("spin routes at coupling extremes") {
  Domain d({{0, 0}});
  Eigen::VectorXd tiny = Eigen::VectorXd::Constant(4, 1e-8);
  Rng rng(5150);
  // |phi phi| -> 0: dual couplings diverge (coin sides certainly open), so
  // every face locks to the outer +1 region.
  for (int i = 0; i < 50; ++i) {
    REQUIRE(coin_spins(d, tiny, rng)[0] == 1);
    REQUIRE(ising_spins_exact(d, tiny, rng)[0] == 1);
  }
  // |phi phi| large: couplings vanish (sides closed), spins become fair coins.
  Eigen::VectorXd big = Eigen::VectorXd::Constant(4, 10.0);
  int n = 20000;
  long sc = 0, si = 0;
  for (int i = 0; i < n; ++i) {
    sc += coin_spins(d, big, rng)[0];
    si += ising_spins_exact(d, big, rng)[0];
  }
  REQUIRE(std::abs(static_cast<double>(sc) / n) < 3 / std::sqrt(n));
  REQUIRE(std::abs(static_cast<double>(si) / n) < 3 / std::sqrt(n));
}

TEST_CASE("Wolff dynamics agrees with exact conditional enumeration") {
  Domain d = Domain::square(2, 1.0);
  DgffSampler gs(d);
  Rng prng(32);
  Eigen::VectorXd phi = gs.sample(prng);
  // Conditional exact means per face by direct enumeration over 16 states.
  int nf = 4;
  std::vector<double> exact_mean(nf, 0.0);
  {
    std::vector<double> logw(16, 0.0);
    for (const Edge& e : d.edges()) {
      auto [va, vb] = side_vertices(d, e);
      double js = -0.5 * std::log(std::tanh(0.25 * std::abs(phi[va] * phi[vb])));
      auto [fa, fb] = side_faces(d, e);
      for (int s = 0; s < 16; ++s) {
        int sa = fa < 0 ? 1 : ((s >> fa) & 1 ? -1 : 1);
        int sb = fb < 0 ? 1 : ((s >> fb) & 1 ? -1 : 1);
        logw[s] += js * sa * sb;
      }
    }
    double mx = *std::max_element(logw.begin(), logw.end()), z = 0;
    for (int s = 0; s < 16; ++s) z += std::exp(logw[s] - mx);
    for (int s = 0; s < 16; ++s) {
      double p = std::exp(logw[s] - mx) / z;
      for (int f = 0; f < nf; ++f)
        exact_mean[f] += p * ((s >> f) & 1 ? -1 : 1);
    }
  }
  int n = 1000;
  std::vector<long> sum(nf, 0);
  Rng rng(616);
  for (int i = 0; i < n; ++i) {
    auto s = ising_spins_wolff(d, phi, rng);
    for (int f = 0; f < nf; ++f) sum[f] += s[f];
  }
  for (int f = 0; f < nf; ++f) {
    double se = std::sqrt((1 - exact_mean[f] * exact_mean[f]) / n) + 1e-9;
    REQUIRE(std::abs(static_cast<double>(sum[f]) / n - exact_mean[f]) <
            3 * se);
  }
}

TEST_CASE("occupation field marginals") {
  Domain d({{0, 0}});
  double lambda = 0.5;
  auto [m1, m2] = occupation_moments(7.0 / 6.0, lambda);
  REQUIRE(m1 == Catch::Approx(0.5 * 7.0 / 6.0).epsilon(1e-12));
  REQUIRE(m2 == Catch::Approx(0.75 * 49.0 / 36.0).epsilon(1e-12));

  // Zero-visit vertices carry the standalone Gamma(lambda) term, mean 1/2.
  Rng rng(1001);
  double zsum = 0;
  int nz = 20000;
  for (int i = 0; i < nz; ++i) zsum += occupation_field(d, {}, lambda, rng)[0];
  REQUIRE(std::abs(zsum / nz - 0.5) < 3 * std::sqrt(0.5 / nz));

  // With real soups the one-site marginal is Gamma(lambda, G(x,x)).
  SoupSampler s(d);
  int n = 20000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    Rng r(909, i);
    auto soup = s.sample_soup(lambda, r);
    double t = occupation_field(d, soup, lambda, r)[0];
    s1 += t;
    s2 += t * t;
  }
  s1 /= n;
  s2 /= n;
  double g = 7.0 / 6.0;
  double var1 = lambda * g * g;  // Gamma(lambda, G) variance
  REQUIRE(std::abs(s1 - m1) < 3 * std::sqrt(var1 / n));
  double m4 = g * g * g * g * (105.0 / 16.0);  // E T^4 at lambda = 1/2
  double var2 = m4 - m2 * m2;
  REQUIRE(std::abs(s2 - m2) < 3 * std::sqrt(var2 / n));
}

TEST_CASE("massive box spin field") {
  SoupSampler flat(Domain::square(2, 1.0));
  REQUIRE_THROWS_AS(sample_massive_box_field(flat, 0.5, Rng(1)),
                    std::invalid_argument);

  // Huge killing rate: no loops survive, all spins +1.
  SoupSampler dead(Domain::square(6, 1.0), 1e9);
  auto spins = sample_massive_box_field(dead, 0.5, Rng(2));
  for (int v : spins) REQUIRE(v == 1);

  // Frozen regression anchor for the 24-box mass at kappa = 1.
  SoupSampler box24(Domain::square(24, 1.0), 1.0);
  REQUIRE(box24.total_mass() == Catch::Approx(60.21747573910872).epsilon(1e-10));

  // Horizontal translation invariance deep in the bulk (paired, mirror pair).
  SoupSampler box16(Domain::square(16, 1.0), 1.0);
  const Domain& d16 = box16.domain();
  int fa = d16.face_index({5, 8}), fb = d16.face_index({10, 8});
  int n = 3000;
  double dsum = 0, dsq = 0;
  for (int i = 0; i < n; ++i) {
    auto soup = box16.sample_soup(0.5, Rng(606, i));
    WindingGrid g = winding_field(d16, soup);
    double diff = g.spin(d16.faces()[fa]) - g.spin(d16.faces()[fb]);
    dsum += diff;
    dsq += diff * diff;
  }
  double mean_d = dsum / n;
  double se_d = std::sqrt((dsq / n - mean_d * mean_d) / n);
  REQUIRE(std::abs(mean_d) < 3 * se_d);

  // Doubling the box leaves near-boundary statistics stable at kappa = 1.
  auto one_point = [](SoupSampler& s, Cell f, int seed, int m) {
    double acc = 0;
    for (int i = 0; i < m; ++i) {
      WindingGrid g = winding_field(s.domain(), s.sample_soup(0.5, Rng(seed, i)));
      acc += g.spin(f);
    }
    return acc / m;
  };
  SoupSampler box12(Domain::square(12, 1.0), 1.0);
  int m = 1500;
  double p12 = one_point(box12, {6, 2}, 11, m);
  double p24 = one_point(box24, {12, 2}, 12, m);
  double se = std::sqrt((1 - p12 * p12) / m + (1 - p24 * p24) / m);
  REQUIRE(std::abs(p12 - p24) < 3 * se);
}
