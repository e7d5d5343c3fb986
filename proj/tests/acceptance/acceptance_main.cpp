// Acceptance gate: one test case per criterion, each printing a single
// PASS/FAIL line with the measured numbers and the tolerance it was judged
// against. Tolerances live next to the experiment implementations.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "loopsoup/experiments.hpp"

using namespace loopsoup;
namespace ex = loopsoup::experiments;

namespace {

void report(const std::string& tag, bool ok, const std::string& detail) {
  std::cout << tag << (ok ? " PASS " : " FAIL ") << detail << '\n'
            << std::flush;
}

std::string num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

}  // namespace

TEST_CASE("exact vs MC spin correlations", "[A1]") {
  auto res = ex::run_exact_vs_mc();
  report("A1", res.ok,
         "exact-vs-mc-correlations: " + std::to_string(res.rows.size()) +
             " spin correlations on random domains (<=16 faces, lambda in "
             "{0.25,0.5,1}, n=" + std::to_string(res.n) + "), max |z| = " +
             num(res.max_z) + " (tol " + num(ex::kZTol) + ")");
  REQUIRE(res.ok);
}

TEST_CASE("one-point scaling exponent", "[A2]") {
  auto half = ex::run_scaling_exponent(0.5);
  auto one = ex::run_scaling_exponent(1.0);
  bool ok = half.ok && one.ok;
  report("A2", ok,
         "scaling-exponent: meshes 1/16..1/128, slope(lambda=0.5) = " +
             num(half.fit.slope) + " vs " + num(half.target) + " (err " +
             num(half.error) + "), slope(lambda=1) = " + num(one.fit.slope) +
             " vs " + num(one.target) + " (err " + num(one.error) + ", tol " +
             num(ex::kSlopeTol) + ")");
  CHECK(half.ok);
  CHECK(one.ok);
  REQUIRE(ok);
}

TEST_CASE("boundary perturbation constant", "[A3]") {
  auto res = ex::run_boundary_constant();
  report("A3", res.ok,
         "boundary-constant: mesh 1/" + std::to_string(res.denom) +
             ", r in {0.5,0.7,0.9}, max |rel err| = " + num(res.max_rel_err) +
             " (tol " + num(ex::kRelTol) + ")");
  REQUIRE(res.ok);
}

TEST_CASE("three-route duality on the 2x2 box", "[A4]") {
  auto res = ex::run_duality();
  report("A4", res.ok,
         "duality: 16-outcome laws, soup vs dgff-ising vs dgff-coins, n=" +
             std::to_string(res.n) + ", max pairwise |z| = " + num(res.max_z) +
             " (tol " + num(ex::kZTol) + ")");
  REQUIRE(res.ok);
}

TEST_CASE("occupation field moment identity", "[A5]") {
  auto res = ex::run_occupation_identity();
  report("A5", res.ok,
         "occupation-identity: 3x3 box, lambda=0.5, both moments at " +
             std::to_string(res.rows.size()) + " vertices, n=" +
             std::to_string(res.n) + ", max |z| = " + num(res.max_z) +
             " (tol " + num(ex::kZTol) + ")");
  REQUIRE(res.ok);
}

TEST_CASE("Griffiths inequalities in the determinant engine", "[A6]") {
  auto res = ex::run_griffiths();
  report("A6", res.ok,
         "griffiths-inequalities: " + std::to_string(res.rows.size()) +
             " random instances, min slack = " + num(res.min_slack) +
             " (floor " + num(ex::kSlackFloor) + ")");
  REQUIRE(res.ok);
}

TEST_CASE("Wick residual of the three-point function", "[A7]") {
  auto res = ex::run_nongaussianity();
  report("A7", res.ok,
         "nongaussianity: residual(rho=" + num(res.main.rho) + ") = " +
             num(res.main.residual) + " (|.| must exceed " +
             num(ex::kResidualBar) + "), residual(rho=" + num(res.shrunk.rho) +
             ") = " + num(res.shrunk.residual) +
             (res.growth_ok ? ", grows toward the center"
                            : ", does NOT grow toward the center"));
  CHECK(res.threshold_ok);
  CHECK(res.growth_ok);
  REQUIRE(res.ok);
}

TEST_CASE("Sobolev distances shrink with the cutoff", "[A8]") {
  auto res = ex::run_sobolev_trend();
  std::string drops;
  for (const auto& p : res.pairs)
    if (p.drop_se > 0)
      drops += (drops.empty() ? "" : ", ") + num(p.drop_mean) + " (" +
               num(p.drop_z) + " se)";
  report("A8", res.ok,
         "sobolev-cauchy-trend: deltas {0.4,0.2,0.1,0.05}, n=" +
             std::to_string(res.n) + ", consecutive drops " + drops +
             " (monotone within 1 se)");
  REQUIRE(res.ok);
}

TEST_CASE("reflection positivity of the massive box field", "[A9]") {
  auto res = ex::run_reflection_positivity();
  report("A9", res.ok,
         "reflection-positivity: " + std::to_string(res.nfuncs) +
             " monomials, n=" + std::to_string(res.n) + ", min eig = " +
             num(res.min_eig) + " (floor -3 x " + num(res.jack_se) +
             "), symmetry max |z| = " + num(res.sym_max_z) + " (tol " +
             num(ex::kZTol) + ")");
  REQUIRE(res.ok);
}

TEST_CASE("determinant masses equal enumerated masses", "[A10]") {
  auto res = ex::run_oracle_equivalence();
  report("A10", res.ok,
         "oracle-equivalence: " + std::to_string(res.count) +
             " domains with <=6 faces, max (|det - enum| - tail bound) = " +
             num(res.max_excess) + " (tol " + num(ex::kEnumSlop) + ")");
  REQUIRE(res.ok);
}
