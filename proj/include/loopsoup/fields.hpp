#pragma once

// Fields built from loops and their Gaussian counterparts.
//
// Winding numbers: a vertical step at abscissa x crossing height j + 1/2
// changes the winding number of every face (i, j) with i < x by +1 (step N)
// or -1 (step S).  Accumulating steps into per-row buckets and suffix-summing
// gives the whole winding grid of a loop in O(t + faces).
//
// The spin field of a soup is sigma(f) = (-1)^(total winding around f).  At
// intensity 1/2 the same law arises from the Gaussian free field phi with
// covariance (I-P)^{-1} in two ways, both conditioning on phi.  In that
// normalization each edge carries conductance 1/4, so the conditional law of
// sgn(phi) given |phi| is an Ising model with couplings |phi_x phi_y|/4;
// equivalently, the unit-conductance field is phi/2 and the usual raw-product
// formulas apply to it.  Hence:
//   * Ising route: face spins (outer region pinned +1) follow an Ising model
//     with dual couplings J* = -(1/2) log tanh(|phi_x phi_y|/4) across each
//     side (x,y).
//   * Coin route: a side is "open" when sgn(phi) changes across it, or else
//     with probability exp(-|phi_x phi_y|/2); dual components of open sides
//     not reaching the outer region get independent fair signs, the rest +1.
// Both normalizations were checked against the exact one-point function
// (48/49)^{1/2} on the single face at 1e7 samples; the raw-product couplings
// applied directly to the covariance-(I-P)^{-1} field fail that check.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "loopsoup/exact.hpp"
#include "loopsoup/lattice.hpp"
#include "loopsoup/rng.hpp"
#include "loopsoup/sampler.hpp"

namespace loopsoup {

// Dense winding-number grid over a face window [i0,i1] x [j0,j1].
class WindingGrid {
 public:
  WindingGrid(int i0, int j0, int i1, int j1)
      : i0_(i0), j0_(j0), ni_(i1 - i0 + 1), nj_(j1 - j0 + 1) {
    if (ni_ <= 0 || nj_ <= 0) throw std::invalid_argument("empty window");
    n_.assign(static_cast<std::size_t>(ni_) * nj_, 0);
  }

  static WindingGrid for_domain(const Domain& d) {
    Cell lo = d.faces().front();
    int i1 = d.faces().back().first;
    auto [jlo, jhi] = std::minmax_element(
        d.faces().begin(), d.faces().end(),
        [](Cell a, Cell b) { return a.second < b.second; });
    return WindingGrid(lo.first, jlo->second, i1, jhi->second);
  }

  void add_loop(const LatticeLoop& loop, long weight = 1) {
    Cell p = loop.root;
    for (char c : loop.steps) {
      int j, x, dir;
      switch (c) {
        case 'N':
          j = p.second;
          x = p.first;
          dir = +1;
          ++p.second;
          break;
        case 'S':
          --p.second;
          j = p.second;
          x = p.first;
          dir = -1;
          break;
        case 'E': ++p.first; continue;
        case 'W': --p.first; continue;
        default: throw std::invalid_argument("bad step char");
      }
      if (j < j0_ || j >= j0_ + nj_) continue;
      int imax = std::min(x - 1, i0_ + ni_ - 1);
      for (int i = i0_; i <= imax; ++i) n_[idx(i, j)] += dir * weight;
    }
  }

  long winding(Cell face) const {
    auto [i, j] = face;
    if (i < i0_ || i >= i0_ + ni_ || j < j0_ || j >= j0_ + nj_) return 0;
    return n_[idx(i, j)];
  }

  int spin(Cell face) const { return winding(face) % 2 ? -1 : 1; }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i - i0_) * nj_ + (j - j0_);
  }
  int i0_, j0_, ni_, nj_;
  std::vector<long> n_;
};

// Winding numbers of one loop around a list of faces.
inline std::vector<long> loop_windings(const LatticeLoop& loop,
                                       const std::vector<Cell>& faces) {
  std::vector<long> out(faces.size(), 0);
  Cell p = loop.root;
  auto cross = [&](int x, int j, int dir) {
    for (std::size_t f = 0; f < faces.size(); ++f)
      if (faces[f].second == j && faces[f].first < x) out[f] += dir;
  };
  for (char c : loop.steps) {
    switch (c) {
      case 'N':
        cross(p.first, p.second, +1);
        ++p.second;
        break;
      case 'S':
        --p.second;
        cross(p.first, p.second, -1);
        break;
      case 'E': ++p.first; break;
      case 'W': --p.first; break;
    }
  }
  return out;
}

// Signed winding of one loop around one face (dual vertex).
inline long winding_number(const LatticeLoop& loop, Cell face) {
  return loop_windings(loop, {face})[0];
}

// Parity vector (true = odd winding): the decomposition class of a loop
// relative to marked faces.
inline std::vector<bool> winding_parity_class(const LatticeLoop& loop,
                                              const std::vector<Cell>& faces) {
  auto w = loop_windings(loop, faces);
  std::vector<bool> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = (w[i] % 2) != 0;
  return out;
}

// Total winding field of a soup on the whole domain.
inline WindingGrid winding_field(const Domain& d,
                                 const std::vector<LatticeLoop>& soup) {
  WindingGrid g = WindingGrid::for_domain(d);
  for (const auto& loop : soup) g.add_loop(loop);
  return g;
}

// Unoriented traversal parity per edge, and spin reconstruction from them:
// sigma(f) = (-1)^(number of odd edges on the face's defect line).  An
// independent route to the same spins as the winding parities.
inline std::map<Edge, int> edge_parities(const Domain& d,
                                         const std::vector<LatticeLoop>& soup) {
  std::map<Edge, int> par;
  for (const auto& loop : soup) {
    auto tr = loop.trace();
    for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
      auto [x0, y0] = tr[k];
      auto [x1, y1] = tr[k + 1];
      Edge e = (x0 == x1) ? Edge{true, x0, std::min(y0, y1)}
                          : Edge{false, std::min(x0, x1), y0};
      par[e] ^= 1;
    }
  }
  std::erase_if(par, [](const auto& kv) { return kv.second == 0; });
  return par;
}

inline int spin_from_parities(const Domain& d, const std::map<Edge, int>& par,
                              Cell face) {
  int odd = 0;
  for (const Edge& e : d.defect_line(face))
    if (auto it = par.find(e); it != par.end()) odd ^= it->second;
  return odd ? -1 : 1;
}

// Discrete Gaussian free field on domain vertices: phi ~ N(0, (I-P)^{-1}),
// so Var phi_x = G(x,x) and the L^{-T} factor of I-P = L L^T maps iid
// normals to phi.  Zero boundary condition: the field is defined (and
// killed) exactly on the domain's vertices.
class DgffSampler {
 public:
  explicit DgffSampler(const Domain& d, double kappa = 0.0) : dom_(d) {
    Eigen::MatrixXd A(identity_minus(d.transition_matrix(kappa)));
    if (A.rows() > 4096)
      throw std::invalid_argument("DGFF sampler is dense; domain too large");
    llt_.compute(A);
    if (llt_.info() != Eigen::Success) throw std::runtime_error("LLT failed");
  }

  Eigen::VectorXd sample(Rng& rng) const {
    Eigen::VectorXd z(static_cast<int>(dom_.vertices().size()));
    for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return llt_.matrixU().solve(z);
  }

  const Domain& domain() const { return dom_; }

 private:
  Domain dom_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// The two faces separated by a primal side (outer region = -1 sentinel).
inline std::pair<int, int> side_faces(const Domain& d, const Edge& e) {
  auto fidx = [&](Cell f) { return d.has_face(f) ? d.face_index(f) : -1; };
  Cell below = e.vertical ? Cell{e.x - 1, e.y} : Cell{e.x, e.y - 1};
  return {fidx(below), fidx({e.x, e.y})};
}

inline std::pair<int, int> side_vertices(const Domain& d, const Edge& e) {
  Cell a{e.x, e.y};
  Cell b = e.vertical ? Cell{e.x, e.y + 1} : Cell{e.x + 1, e.y};
  return {d.vertex_index(a), d.vertex_index(b)};
}

// Exact conditional Ising sample of face spins given |phi|, outer pinned +1,
// couplings J* = -(1/2) log tanh(|phi_x phi_y|/4) per side.  Full enumeration.
inline std::vector<int> ising_spins_exact(const Domain& d,
                                          const Eigen::VectorXd& phi,
                                          Rng& rng) {
  int n = static_cast<int>(d.faces().size());
  if (n > 20) throw std::invalid_argument("exact Ising limited to 20 faces");
  std::uint32_t states = 1u << n;
  std::vector<double> logw(states, 0.0);
  for (const Edge& e : d.edges()) {
    auto [va, vb] = side_vertices(d, e);
    double j = 0.25 * std::abs(phi[va] * phi[vb]);
    double js = -0.5 * std::log(std::tanh(std::max(j, 1e-300)));
    auto [fa, fb] = side_faces(d, e);
    for (std::uint32_t s = 0; s < states; ++s) {
      int sa = fa < 0 ? 1 : ((s >> fa) & 1u ? -1 : 1);
      int sb = fb < 0 ? 1 : ((s >> fb) & 1u ? -1 : 1);
      logw[s] += js * sa * sb;
    }
  }
  double mx = *std::max_element(logw.begin(), logw.end());
  double tot = 0;
  for (double& lw : logw) {
    lw = std::exp(lw - mx);
    tot += lw;
  }
  double u = rng.u01() * tot;
  std::uint32_t pick = states - 1;
  for (std::uint32_t s = 0; s < states; ++s) {
    u -= logw[s];
    if (u <= 0) {
      pick = s;
      break;
    }
  }
  std::vector<int> spins(n);
  for (int f = 0; f < n; ++f) spins[f] = (pick >> f) & 1u ? -1 : 1;
  return spins;
}

// Wolff single-cluster dynamics for the same conditional law (exploratory
// route for > 20 faces); clusters that absorb the pinned outer region are
// rejected, never flipped.  Burn-in: 1000 cluster updates per face.
inline std::vector<int> ising_spins_wolff(const Domain& d,
                                          const Eigen::VectorXd& phi,
                                          Rng& rng) {
  int n = static_cast<int>(d.faces().size());
  std::vector<std::vector<std::pair<int, double>>> nbr(n + 1);  // n = outer
  for (const Edge& e : d.edges()) {
    auto [va, vb] = side_vertices(d, e);
    double j = 0.25 * std::abs(phi[va] * phi[vb]);
    double js = -0.5 * std::log(std::tanh(std::max(j, 1e-300)));
    auto [fa, fb] = side_faces(d, e);
    int a = fa < 0 ? n : fa, b = fb < 0 ? n : fb;
    nbr[a].push_back({b, js});
    nbr[b].push_back({a, js});
  }
  // Start from the boundary-locked state: it is the strong-coupling
  // equilibrium, where outer-touching clusters are always rejected and a
  // random start would stay frozen wherever it began.
  std::vector<int> s(n + 1, 1);
  long updates = 1000L * n;
  std::vector<int> stack, cluster;
  std::vector<char> in;
  for (long it = 0; it < updates; ++it) {
    int seed = static_cast<int>(rng.uniform_int(n));
    in.assign(n + 1, 0);
    stack = {seed};
    cluster = {seed};
    in[seed] = 1;
    bool touched_outer = false;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (auto [u2, js] : nbr[v]) {
        if (in[u2] || s[u2] != s[v]) continue;
        if (rng.u01() < 1.0 - std::exp(-2.0 * js)) {
          in[u2] = 1;
          cluster.push_back(u2);
          if (u2 == n)
            touched_outer = true;
          else
            stack.push_back(u2);
        }
      }
    }
    if (!touched_outer)
      for (int v : cluster) s[v] = -s[v];
  }
  s.resize(n);
  return s;
}

// Coin route: a side is open when sgn(phi) changes across it, or else with
// probability exp(-|phi_x phi_y|/2).  Dual components of open sides that do
// not reach the outer region get independent fair signs; the rest are +1.
inline std::vector<int> coin_spins(const Domain& d, const Eigen::VectorXd& phi,
                                   Rng& rng) {
  int n = static_cast<int>(d.faces().size());
  std::vector<int> parent(n + 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Edge& e : d.edges()) {
    auto [va, vb] = side_vertices(d, e);
    bool sign_change = (phi[va] < 0) != (phi[vb] < 0);
    bool open = sign_change ||
                rng.u01() < std::exp(-0.5 * std::abs(phi[va] * phi[vb]));
    if (open) {
      auto [fa, fb] = side_faces(d, e);
      int a = find(fa < 0 ? n : fa), b = find(fb < 0 ? n : fb);
      if (a != b) parent[a] = b;
    }
  }
  std::vector<int> sign(n + 1, 0);
  sign[find(n)] = 1;
  std::vector<int> spins(n);
  for (int f = 0; f < n; ++f) {
    int r = find(f);
    if (sign[r] == 0) sign[r] = rng.u01() < 0.5 ? 1 : -1;
    spins[f] = sign[r];
  }
  return spins;
}

// Occupation field: per vertex, one mean-1 exponential per loop visit plus an
// independent Gamma(lambda, 1).  The one-site marginal is Gamma(lambda, G),
// matching phi^2/2 at lambda = 1/2 (where the extra term is Gamma(1/2, 1),
// mean 1/2).
inline Eigen::VectorXd occupation_field(const Domain& d,
                                        const std::vector<LatticeLoop>& soup,
                                        double lambda, Rng& rng) {
  Eigen::VectorXd T(static_cast<int>(d.vertices().size()));
  std::vector<long> visits(d.vertices().size(), 0);
  for (const LatticeLoop& loop : soup) {
    auto tr = loop.trace();
    for (std::size_t k = 0; k + 1 < tr.size(); ++k)  // root counted once
      ++visits[d.vertex_index(tr[k])];
  }
  for (int v = 0; v < T.size(); ++v) {
    double acc = rng.gamma(lambda);
    for (long k = 0; k < visits[v]; ++k) acc += rng.exponential();
    T[v] = acc;
  }
  return T;
}

// Winding spin field on an L x L box at killing rate kappa > 0; the box
// approximates a half plane, so near-boundary statistics are the target.
inline std::vector<int> sample_massive_box_field(const SoupSampler& sampler,
                                                 double lambda,
                                                 const Rng& soup_rng) {
  if (!(sampler.kappa() > 0))
    throw std::invalid_argument("massive field requires kappa > 0");
  auto soup = sampler.sample_soup(lambda, soup_rng);
  WindingGrid g = winding_field(sampler.domain(), soup);
  std::vector<int> spins;
  spins.reserve(sampler.domain().faces().size());
  for (Cell f : sampler.domain().faces()) spins.push_back(g.spin(f));
  return spins;
}

}  // namespace loopsoup
