#include <catch2/catch_amalgamated.hpp>

#include "loopsoup/lattice.hpp"

using namespace loopsoup;

TEST_CASE("single face counts") {
  Domain d({{0, 0}});
  REQUIRE(d.faces().size() == 1);
  REQUIRE(d.vertices().size() == 4);
  REQUIRE(d.edges().size() == 4);
  for (Cell v : d.vertices()) REQUIRE(d.neighbors(v).size() == 2);
  REQUIRE_FALSE(d.is_interior_vertex({0, 0}));
}

TEST_CASE("square domain counts and interior") {
  Domain d = Domain::square(2, 0.5);
  REQUIRE(d.faces().size() == 4);
  REQUIRE(d.vertices().size() == 9);
  REQUIRE(d.edges().size() == 12);
  REQUIRE(d.is_interior_vertex({1, 1}));
  REQUIRE_FALSE(d.is_interior_vertex({0, 1}));
  REQUIRE(d.neighbors({1, 1}).size() == 4);
  REQUIRE(d.neighbors({0, 0}).size() == 2);
  REQUIRE(d.neighbors({1, 0}).size() == 3);
}

TEST_CASE("disk face and vertex counts at two meshes") {
  Domain d4 = Domain::disk(1.0, 0.25);
  REQUIRE(d4.faces().size() == 32);
  REQUIRE(d4.vertices().size() == 45);
  REQUIRE(d4.edges().size() == 76);
  Domain d8 = Domain::disk(1.0, 0.125);
  REQUIRE(d8.faces().size() == 164);
  REQUIRE(d8.vertices().size() == 193);
  REQUIRE(d8.center_face() == Cell{-1, -1});
  REQUIRE(d8.is_connected());
}

TEST_CASE("duplicate faces collapse and inputs validate") {
  Domain d({{0, 0}, {0, 0}, {1, 0}});
  REQUIRE(d.faces().size() == 2);
  REQUIRE_THROWS_AS(Domain({}), std::invalid_argument);
  REQUIRE_THROWS_AS(Domain({{0, 0}}, -1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(d.vertex_index({5, 5}), std::out_of_range);
  REQUIRE_THROWS_AS(d.face_index({5, 5}), std::out_of_range);
  REQUIRE_THROWS_AS(d.defect_line(Cell{5, 5}), std::out_of_range);
}

TEST_CASE("transition matrix rows are substochastic with weight 1/(4+kappa)") {
  Domain d = Domain::square(2, 1.0);
  auto P = d.transition_matrix(0.0);
  REQUIRE(P.rows() == 9);
  Eigen::VectorXd rowsum = P * Eigen::VectorXd::Ones(9);
  int ctr = d.vertex_index({1, 1});
  for (int i = 0; i < 9; ++i) {
    REQUIRE(rowsum[i] <= 1.0 + 1e-15);
    if (i == ctr) REQUIRE(rowsum[i] == Catch::Approx(1.0));
  }
  auto Pk = d.transition_matrix(1.0);
  REQUIRE(Eigen::MatrixXd(Pk).cwiseAbs().maxCoeff() == Catch::Approx(0.2));
  REQUIRE_THROWS_AS(d.transition_matrix(-0.5), std::invalid_argument);
}

TEST_CASE("defect line collects vertical sides east of the face") {
  Domain d = Domain::square(3, 1.0);
  auto line = d.defect_line(Cell{0, 1});
  REQUIRE(line.size() == 3);
  REQUIRE(line.count(Edge{true, 1, 1}) == 1);
  REQUIRE(line.count(Edge{true, 2, 1}) == 1);
  REQUIRE(line.count(Edge{true, 3, 1}) == 1);
  // Twisting flips exactly those entries.
  auto P = Eigen::MatrixXd(d.transition_matrix(0.0));
  auto Pt = Eigen::MatrixXd(d.transition_matrix(0.0, line));
  int flipped = 0;
  for (int i = 0; i < P.rows(); ++i)
    for (int j = 0; j < P.cols(); ++j) {
      if (P(i, j) != Pt(i, j)) {
        REQUIRE(Pt(i, j) == Catch::Approx(-P(i, j)));
        ++flipped;
      }
    }
  REQUIRE(flipped == 6);  // 3 edges, symmetric entries
}

TEST_CASE("defect of a face set XORs individual lines") {
  Domain d = Domain::square(3, 1.0);
  // Same-row faces: shared east edges cancel pairwise.
  auto both = d.defect_line(std::vector<Cell>{{0, 1}, {1, 1}});
  REQUIRE(both.size() == 1);
  REQUIRE(both.count(Edge{true, 1, 1}) == 1);
  // Twice the same face cancels entirely.
  REQUIRE(d.defect_line(std::vector<Cell>{{0, 1}, {0, 1}}).empty());
}

TEST_CASE("center face of symmetric domains") {
  REQUIRE(Domain::square(3, 1.0).center_face() == Cell{1, 1});
  // 2x2: four-way tie resolved lexicographically.
  REQUIRE(Domain::square(2, 1.0).center_face() == Cell{0, 0});
}

TEST_CASE("loop trace, closure, validity, diameter") {
  LatticeLoop plaq{{0, 0}, "ENWS"};
  REQUIRE(plaq.closed());
  REQUIRE(plaq.length() == 4);
  REQUIRE(plaq.linf_diameter() == 1);
  Domain d({{0, 0}});
  REQUIRE(plaq.valid_in(d));
  REQUIRE(LatticeLoop{{0, 0}, "EW"}.valid_in(d));
  REQUIRE_FALSE(LatticeLoop{{0, 0}, "EN"}.valid_in(d));       // open
  REQUIRE_FALSE(LatticeLoop{{0, 0}, "EEWW"}.valid_in(d));     // leaves domain
  REQUIRE_FALSE(LatticeLoop{{0, 0}, ""}.valid_in(d));         // too short
  LatticeLoop big{{0, 0}, "EENNWWSS"};
  REQUIRE(big.linf_diameter() == 2);
  REQUIRE_FALSE(big.valid_in(d));
  REQUIRE(big.valid_in(Domain::square(2, 1.0)));
}
