#pragma once

// Face-built lattice domains and the killed random-walk transition matrix.
//
// A domain is a finite union of closed unit faces of Z^2, scaled by a mesh
// size.  The walk lives on the corner vertices of those faces and moves along
// face sides with weight 1/(4+kappa); stepping along a missing side (or out of
// the domain) kills it, so I - P is invertible.  Odd/even winding sectors are
// reached by flipping the sign of P across a defect line: the set of vertical
// sides strictly east of a marked face, at that face's row.  A walk crossing
// the eastward ray from the face center an odd number of times picks up a
// minus sign, which is exactly odd winding number around the face.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace loopsoup {

using Cell = std::pair<int, int>;  // face with corners (i,j)..(i+1,j+1)

// Edge key: horizontal side {(x,y),(x+1,y)} or vertical side {(x,y),(x,y+1)}.
struct Edge {
  bool vertical;
  int x, y;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class Domain {
 public:
  Domain(std::vector<Cell> faces, double mesh = 1.0) : mesh_(mesh) {
    if (faces.empty()) throw std::invalid_argument("domain needs >= 1 face");
    if (!(mesh > 0)) throw std::invalid_argument("mesh must be positive");
    std::sort(faces.begin(), faces.end());
    faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
    faces_ = std::move(faces);
    face_set_.insert(faces_.begin(), faces_.end());

    std::set<Cell> vset;
    std::set<Edge> eset;
    for (auto [i, j] : faces_) {
      vset.insert({i, j});
      vset.insert({i + 1, j});
      vset.insert({i, j + 1});
      vset.insert({i + 1, j + 1});
      eset.insert({false, i, j});
      eset.insert({false, i, j + 1});
      eset.insert({true, i, j});
      eset.insert({true, i + 1, j});
    }
    verts_.assign(vset.begin(), vset.end());
    edges_.assign(eset.begin(), eset.end());
    for (int k = 0; k < static_cast<int>(verts_.size()); ++k)
      vindex_[verts_[k]] = k;
  }

  static Domain square(int n, double mesh) { return rectangle(n, n, mesh); }

  static Domain rectangle(int nx, int ny, double mesh) {
    std::vector<Cell> f;
    f.reserve(static_cast<std::size_t>(nx) * ny);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) f.push_back({i, j});
    return Domain(std::move(f), mesh);
  }

  // Faces lying entirely within `radius` of the origin (all corners inside).
  static Domain disk(double radius, double mesh) {
    int n = static_cast<int>(std::ceil(radius / mesh)) + 1;
    std::vector<Cell> f;
    for (int i = -n; i < n; ++i)
      for (int j = -n; j < n; ++j) {
        double cx = std::max(std::abs(i), std::abs(i + 1)) * mesh;
        double cy = std::max(std::abs(j), std::abs(j + 1)) * mesh;
        if (cx * cx + cy * cy <= radius * radius) f.push_back({i, j});
      }
    return Domain(std::move(f), mesh);
  }

  const std::vector<Cell>& faces() const { return faces_; }
  const std::vector<Cell>& vertices() const { return verts_; }
  const std::vector<Edge>& edges() const { return edges_; }
  double mesh() const { return mesh_; }

  bool has_face(Cell f) const { return face_set_.count(f) != 0; }
  bool has_vertex(Cell v) const { return vindex_.count(v) != 0; }
  bool has_edge(const Edge& e) const {
    return std::binary_search(edges_.begin(), edges_.end(), e);
  }
  int vertex_index(Cell v) const {
    auto it = vindex_.find(v);
    if (it == vindex_.end()) throw std::out_of_range("vertex not in domain");
    return it->second;
  }
  int face_index(Cell f) const {
    auto it = std::lower_bound(faces_.begin(), faces_.end(), f);
    if (it == faces_.end() || *it != f) throw std::out_of_range("face not in domain");
    return static_cast<int>(it - faces_.begin());
  }

  // Vertex strictly inside the face union (all four incident faces present).
  bool is_interior_vertex(Cell v) const {
    auto [x, y] = v;
    return has_face({x - 1, y - 1}) && has_face({x, y - 1}) &&
           has_face({x - 1, y}) && has_face({x, y});
  }

  // Face whose center is closest to the face-center centroid; lexicographic
  // tie-break keeps the choice deterministic.
  Cell center_face() const {
    double cx = 0, cy = 0;
    for (auto [i, j] : faces_) {
      cx += i + 0.5;
      cy += j + 0.5;
    }
    cx /= static_cast<double>(faces_.size());
    cy /= static_cast<double>(faces_.size());
    Cell best = faces_[0];
    double bd = 1e300;
    for (auto [i, j] : faces_) {
      double d = (i + 0.5 - cx) * (i + 0.5 - cx) + (j + 0.5 - cy) * (j + 0.5 - cy);
      if (d < bd - 1e-12) {
        bd = d;
        best = {i, j};
      }
    }
    return best;
  }

  // Defect line of a face: vertical sides strictly east of it, at its row.
  std::set<Edge> defect_line(Cell face) const {
    if (!has_face(face)) throw std::out_of_range("face not in domain");
    auto [fi, fj] = face;
    std::set<Edge> out;
    int max_x = verts_.back().first;
    for (int x = fi + 1; x <= max_x; ++x) {
      Edge e{true, x, fj};
      if (has_edge(e)) out.insert(e);
    }
    return out;
  }

  // Defect of a face set: symmetric difference of the individual lines, since
  // a sign flip applied twice cancels.
  std::set<Edge> defect_line(const std::vector<Cell>& faces) const {
    std::set<Edge> acc;
    for (const Cell& f : faces) {
      for (const Edge& e : defect_line(f)) {
        auto [it, inserted] = acc.insert(e);
        if (!inserted) acc.erase(it);
      }
    }
    return acc;
  }

  // Killed-walk transition matrix, optionally sign-flipped across a defect.
  Eigen::SparseMatrix<double> transition_matrix(
      double kappa = 0.0, const std::set<Edge>& twist = {}) const {
    if (kappa < 0) throw std::invalid_argument("kappa must be >= 0");
    double w = 1.0 / (4.0 + kappa);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(edges_.size() * 2);
    for (const Edge& e : edges_) {
      Cell a{e.x, e.y};
      Cell b = e.vertical ? Cell{e.x, e.y + 1} : Cell{e.x + 1, e.y};
      double v = twist.count(e) ? -w : w;
      int ia = vertex_index(a), ib = vertex_index(b);
      trip.push_back({ia, ib, v});
      trip.push_back({ib, ia, v});
    }
    Eigen::SparseMatrix<double> P(static_cast<int>(verts_.size()),
                                  static_cast<int>(verts_.size()));
    P.setFromTriplets(trip.begin(), trip.end());
    return P;
  }

  std::vector<Cell> neighbors(Cell v) const {
    std::vector<Cell> out;
    auto [x, y] = v;
    if (has_edge({false, x, y})) out.push_back({x + 1, y});
    if (has_edge({false, x - 1, y})) out.push_back({x - 1, y});
    if (has_edge({true, x, y})) out.push_back({x, y + 1});
    if (has_edge({true, x, y - 1})) out.push_back({x, y - 1});
    return out;
  }

  bool is_connected() const {
    if (faces_.empty()) return true;
    std::set<Cell> seen{faces_[0]};
    std::vector<Cell> stack{faces_[0]};
    while (!stack.empty()) {
      auto [i, j] = stack.back();
      stack.pop_back();
      for (Cell nb : {Cell{i + 1, j}, Cell{i - 1, j}, Cell{i, j + 1}, Cell{i, j - 1}})
        if (has_face(nb) && seen.insert(nb).second) stack.push_back(nb);
    }
    return seen.size() == faces_.size();
  }

 private:
  std::vector<Cell> faces_;
  std::set<Cell> face_set_;
  std::vector<Cell> verts_;
  std::vector<Edge> edges_;
  std::map<Cell, int> vindex_;
  double mesh_;
};

// A rooted nearest-neighbor loop: closed walk on domain vertices.
struct LatticeLoop {
  Cell root;
  std::string steps;  // over {'N','E','S','W'}

  int length() const { return static_cast<int>(steps.size()); }

  std::vector<Cell> trace() const {
    std::vector<Cell> t;
    t.reserve(steps.size() + 1);
    Cell p = root;
    t.push_back(p);
    for (char c : steps) {
      switch (c) {
        case 'N': ++p.second; break;
        case 'S': --p.second; break;
        case 'E': ++p.first; break;
        case 'W': --p.first; break;
        default: throw std::invalid_argument("bad step char");
      }
      t.push_back(p);
    }
    return t;
  }

  bool closed() const {
    auto t = trace();
    return t.front() == t.back();
  }

  // Valid in a domain: even length >= 2, closed, every step along a side.
  bool valid_in(const Domain& d) const {
    if (length() < 2 || length() % 2 != 0 || !closed()) return false;
    auto t = trace();
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
      auto [x0, y0] = t[k];
      auto [x1, y1] = t[k + 1];
      Edge e = (x0 == x1) ? Edge{true, x0, std::min(y0, y1)}
                          : Edge{false, std::min(x0, x1), y0};
      if (!d.has_edge(e)) return false;
    }
    return true;
  }

  // L-infinity diameter of the trace, in lattice units.
  int linf_diameter() const {
    int xmin = root.first, xmax = root.first, ymin = root.second, ymax = root.second;
    Cell p = root;
    for (char c : steps) {
      switch (c) {
        case 'N': ++p.second; break;
        case 'S': --p.second; break;
        case 'E': ++p.first; break;
        case 'W': --p.first; break;
      }
      xmin = std::min(xmin, p.first);
      xmax = std::max(xmax, p.first);
      ymin = std::min(ymin, p.second);
      ymax = std::max(ymax, p.second);
    }
    return std::max(xmax - xmin, ymax - ymin);
  }
};

}  // namespace loopsoup
