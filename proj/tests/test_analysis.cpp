#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

#include "loopsoup/analysis.hpp"
#include "loopsoup/lattice.hpp"
#include "loopsoup/rng.hpp"

using namespace loopsoup;

TEST_CASE("interior vertices are those with four incident faces") {
  Domain d = Domain::square(3, 1.0);
  auto idx = interior_vertex_indices(d);
  REQUIRE(idx.size() == 4);
  for (int q : idx) {
    auto [i, j] = d.vertices()[q];
    CHECK(i >= 1);
    CHECK(i <= 2);
    CHECK(j >= 1);
    CHECK(j <= 2);
  }
  CHECK(interior_vertex_indices(Domain::square(1, 1.0)).empty());
}

TEST_CASE("rectangle closed form matches dense eigensolver") {
  Domain d = Domain::rectangle(5, 4, 0.5);
  SpectralBasis rect = spectral_basis(d, 1000);
  SpectralBasis dense = detail::dense_basis(d, 1000);
  REQUIRE(rect.size() == 12);
  REQUIRE(dense.size() == 12);
  for (int m = 0; m < 12; ++m)
    CHECK(rect.eigenvalues[m] == Catch::Approx(dense.eigenvalues[m]).epsilon(1e-10));

  // Distances only involve |coefficients|^2 per mode, so with the full basis
  // the two constructions must agree on any pair of fields.
  Rng rng(171);
  Eigen::VectorXd f(static_cast<int>(d.vertices().size()));
  Eigen::VectorXd g(static_cast<int>(d.vertices().size()));
  for (int v = 0; v < f.size(); ++v) {
    f[v] = rng.normal();
    g[v] = rng.normal();
  }
  for (double alpha : {0.0, 1.0, 2.0}) {
    double dr = sobolev_distance_sq(rect, rect.coefficients(f), rect.coefficients(g), alpha);
    double dd = sobolev_distance_sq(dense, dense.coefficients(f), dense.coefficients(g), alpha);
    CHECK(dr == Catch::Approx(dd).epsilon(1e-9));
    CHECK(dr > 0);
  }
}

TEST_CASE("modes are orthonormal in the mesh-weighted inner product") {
  Domain d = Domain::square(8, 0.125);
  SpectralBasis b = spectral_basis(d, 10);
  double h2 = b.mesh * b.mesh;
  for (int m = 0; m < b.size(); ++m)
    for (int l = 0; l <= m; ++l) {
      double ip = h2 * b.modes.col(m).dot(b.modes.col(l));
      CHECK(ip == Catch::Approx(m == l ? 1.0 : 0.0).margin(1e-10));
    }

  // Coefficient extraction inverts the expansion: a field equal to mode 0
  // has coefficient vector e_0.
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<int>(d.vertices().size()));
  for (std::size_t q = 0; q < b.vidx.size(); ++q)
    f[b.vidx[q]] = b.modes(static_cast<int>(q), 0);
  Eigen::VectorXd a = b.coefficients(f);
  CHECK(a[0] == Catch::Approx(1.0).epsilon(1e-10));
  for (int m = 1; m < b.size(); ++m) CHECK(std::abs(a[m]) < 1e-10);
}

TEST_CASE("lowest eigenvalue approaches 2 pi^2 on the unit square") {
  Domain d = Domain::square(16, 1.0 / 16);
  SpectralBasis b = spectral_basis(d, 1);
  CHECK(b.eigenvalues[0] == Catch::Approx(19.675872867092).epsilon(1e-10));
  CHECK(std::abs(b.eigenvalues[0] - 2 * std::numbers::pi * std::numbers::pi) < 0.07);
}

TEST_CASE("dense path handles non-rectangular domains") {
  Domain d = Domain::disk(0.25, 1.0 / 16);
  SpectralBasis b = spectral_basis(d, 5);
  REQUIRE(b.size() == 5);
  for (int m = 0; m < b.size(); ++m) {
    CHECK(b.eigenvalues[m] > 0);
    if (m) CHECK(b.eigenvalues[m] >= b.eigenvalues[m - 1]);
  }
  double h2 = b.mesh * b.mesh;
  CHECK(h2 * b.modes.col(0).squaredNorm() == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("Weyl ratio tends to one from above under refinement") {
  Domain d32 = Domain::square(32, 1.0 / 32);
  Domain d64 = Domain::square(64, 1.0 / 64);
  double r32 = weyl_ratio(spectral_basis(d32, 240), 1.0, 240);
  double r64 = weyl_ratio(spectral_basis(d64, 400), 1.0, 400);
  CHECK(r32 == Catch::Approx(1.139012514678).epsilon(1e-10));
  CHECK(r64 == Catch::Approx(1.035430619479).epsilon(1e-10));
  CHECK(std::abs(r64 - 1.0) <= 0.15);
  CHECK(std::abs(r64 - 1.0) < std::abs(r32 - 1.0));
}

TEST_CASE("default mode count caps at 400 and a quarter of the interior") {
  CHECK(default_mode_count(Domain::square(64, 1.0 / 64)) == 400);
  CHECK(default_mode_count(Domain::square(3, 1.0)) == 1);
  CHECK(default_mode_count(Domain::square(9, 1.0)) == 16);
}

TEST_CASE("face fields inject into vertices by averaging incident faces") {
  Domain d = Domain::square(2, 1.0);
  Eigen::VectorXd fv(4);
  for (int q = 0; q < 4; ++q) fv[q] = 1.0;
  Eigen::VectorXd vv = face_field_to_vertices(d, fv);
  for (int v = 0; v < vv.size(); ++v) CHECK(vv[v] == Catch::Approx(1.0));

  for (int q = 0; q < 4; ++q) fv[q] = d.face_index({0, 0}) == q ? 8.0 : 0.0;
  vv = face_field_to_vertices(d, fv);
  CHECK(vv[d.vertex_index({1, 1})] == Catch::Approx(2.0));  // 4 faces meet
  CHECK(vv[d.vertex_index({0, 0})] == Catch::Approx(8.0));  // corner, 1 face
  CHECK(vv[d.vertex_index({1, 0})] == Catch::Approx(4.0));  // edge, 2 faces
  CHECK(vv[d.vertex_index({2, 2})] == Catch::Approx(0.0));
}

TEST_CASE("Sobolev distance scales quadratically and vanishes on equality") {
  Domain d = Domain::square(6, 1.0 / 6);
  SpectralBasis b = spectral_basis(d, 12);
  Rng rng(88);
  Eigen::VectorXd f(static_cast<int>(d.vertices().size()));
  for (int v = 0; v < f.size(); ++v) f[v] = rng.normal();
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(f.size());
  Eigen::VectorXd af = b.coefficients(f);
  Eigen::VectorXd a0 = b.coefficients(zero);
  CHECK(sobolev_distance_sq(b, af, af, 2.0) == 0.0);
  double d1 = sobolev_distance_sq(b, af, a0, 2.0);
  double d2 = sobolev_distance_sq(b, b.coefficients(2.0 * f), a0, 2.0);
  CHECK(d2 == Catch::Approx(4.0 * d1).epsilon(1e-12));
  // Higher alpha damps high modes, shrinking distances (eigenvalues > 1 here).
  CHECK(sobolev_distance_sq(b, af, a0, 2.0) < sobolev_distance_sq(b, af, a0, 1.0));
}

TEST_CASE("least squares line with t confidence interval") {
  OlsFit exact = ols_fit({1, 2, 3, 4}, {0.5, 1.0, 1.5, 2.0});
  CHECK(exact.slope == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(exact.intercept == Catch::Approx(0.0).margin(1e-12));
  CHECK(exact.slope_se == Catch::Approx(0.0).margin(1e-9));

  OlsFit f = ols_fit({0, 1, 2}, {0, 1, 1});
  CHECK(f.slope == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(f.intercept == Catch::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(f.slope_se == Catch::Approx(0.288675134595).epsilon(1e-10));
  CHECK(f.slope_ci95 == Catch::Approx(3.667906260162).epsilon(1e-10));

  CHECK_THROWS_AS(ols_fit({0, 1}, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(ols_fit({1, 1, 1}, {0, 1, 2}), std::invalid_argument);
}

TEST_CASE("t quantiles") {
  CHECK(student_t95(1) == Catch::Approx(12.706));
  CHECK(student_t95(2) == Catch::Approx(4.303));
  CHECK(student_t95(30) == Catch::Approx(2.042));
  CHECK(student_t95(45) == Catch::Approx(2.0));
  CHECK(student_t95(1000) == Catch::Approx(1.96));
  CHECK_THROWS_AS(student_t95(0), std::invalid_argument);
}

TEST_CASE("mean, standard error, jackknife") {
  MeanSe ms = mean_se({1.0, 2.0, 3.0, 4.0});
  CHECK(ms.mean == Catch::Approx(2.5));
  // sample sd = sqrt(5/3), se = sd/2
  CHECK(ms.se == Catch::Approx(std::sqrt(5.0 / 3.0) / 2).epsilon(1e-12));

  CHECK(jackknife_se({3.0, 3.0, 3.0}) == Catch::Approx(0.0).margin(1e-15));
  // n=2, loo stats {0,2}: se = sqrt((1/2)*2*((0-1)^2+(2-1)^2)/2) = 1
  CHECK(jackknife_se({0.0, 2.0}) == Catch::Approx(1.0).epsilon(1e-12));
}
