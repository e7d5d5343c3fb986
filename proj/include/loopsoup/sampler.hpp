#pragma once

// Exact sampling of the random-walk loop soup.
//
// A soup at intensity lambda is a Poisson process: the loop count is
// Poisson(lambda * total_mass) and each loop is drawn independently from the
// normalized rooted measure.  Sampling a loop factorizes exactly:
//   length   t  ~ q_t = tr(P^t)/t      (even t >= 2, truncated when the
//                                       spectral tail drops below 1e-12 of
//                                       the total mass),
//   root     x  ~ (P^t)_{xx},
//   path        ~ random-walk bridge: from y with r steps left, the next
//                 vertex y' has weight P_{y,y'} (P^{r-1})_{y',x}.
// Everything is spectral.  Rectangles use the closed-form product
// eigensystem (path-graph sines), other domains a dense symmetric
// eigensolve, so this stays exact at every mesh used here.
//
// Determinism: the caller owns one Rng per soup; loop i draws from
// rng.child(i + 1), so results do not depend on how loops are partitioned
// across workers.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "loopsoup/exact.hpp"
#include "loopsoup/lattice.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

class SoupSampler {
 public:
  explicit SoupSampler(const Domain& d, double kappa = 0.0)
      : dom_(d), kappa_(kappa), w_(1.0 / (4.0 + kappa)) {
    build_adjacency();
    build_spectrum();
    build_length_table();
  }

  const Domain& domain() const { return dom_; }
  double kappa() const { return kappa_; }
  double total_mass() const { return mass_; }
  double truncated_mass() const { return q_total_; }
  int max_length() const { return lengths_.empty() ? 0 : lengths_.back(); }

  LatticeLoop sample_loop(Rng& rng) const {
    int t = sample_length(rng);
    int root = sample_root(t, rng);
    return bridge(root, t, rng);
  }

  std::vector<LatticeLoop> sample_soup(double lambda, const Rng& soup_rng) const {
    if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
    Rng count_rng = soup_rng.child(0);
    std::uint64_t n = count_rng.poisson(lambda * mass_);
    std::vector<LatticeLoop> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      Rng lr = soup_rng.child(i + 1);
      out.push_back(sample_loop(lr));
    }
    return out;
  }

 private:
  void build_adjacency() {
    const auto& verts = dom_.vertices();
    nv_ = static_cast<int>(verts.size());
    adj_.assign(nv_, {});
    step_char_.assign(nv_, {});
    for (int i = 0; i < nv_; ++i) {
      Cell v = verts[i];
      for (Cell nb : dom_.neighbors(v)) {
        adj_[i].push_back(dom_.vertex_index(nb));
        char c = nb.first > v.first   ? 'E'
                 : nb.first < v.first ? 'W'
                 : nb.second > v.second ? 'N'
                                        : 'S';
        step_char_[i].push_back(c);
      }
    }
  }

  // True iff the face set fills its bounding box (vertices form a grid).
  bool is_full_rectangle() const {
    const auto& f = dom_.faces();
    int i0 = f.front().first, i1 = f.back().first;
    auto [jmin, jmax] = std::minmax_element(
        f.begin(), f.end(),
        [](Cell a, Cell b) { return a.second < b.second; });
    long nx = i1 - i0 + 1, ny = jmax->second - jmin->second + 1;
    return nx * ny == static_cast<long>(f.size());
  }

  void build_spectrum() {
    if (is_full_rectangle()) {
      Cell lo = dom_.vertices().front();
      Cell hi = dom_.vertices().back();
      m1_ = hi.first - lo.first + 1;
      m2_ = hi.second - lo.second + 1;
      auto path_system = [&](int m, Eigen::VectorXd& mu, Eigen::MatrixXd& V) {
        mu.resize(m);
        V.resize(m, m);
        for (int k = 1; k <= m; ++k) {
          mu[k - 1] = 2.0 * std::cos(k * M_PI / (m + 1));
          for (int x = 0; x < m; ++x)
            V(x, k - 1) =
                std::sqrt(2.0 / (m + 1)) * std::sin(k * M_PI * (x + 1) / (m + 1));
        }
      };
      Eigen::VectorXd mu1, mu2;
      Eigen::MatrixXd V1, V2;
      path_system(m1_, mu1, V1);
      path_system(m2_, mu2, V2);
      W1_ = V1.cwiseProduct(V1);
      W2_ = V2.cwiseProduct(V2);
      rect_p_.resize(m1_, m2_);
      for (int k = 0; k < m1_; ++k)
        for (int l = 0; l < m2_; ++l) rect_p_(k, l) = (mu1[k] + mu2[l]) * w_;
      eigs_.resize(static_cast<std::size_t>(m1_) * m2_);
      Eigen::Map<Eigen::MatrixXd>(eigs_.data(), m1_, m2_) = rect_p_;
      separable_ = true;
    } else {
      Eigen::MatrixXd P(dom_.transition_matrix(kappa_));
      if (P.rows() > 6000)
        throw std::invalid_argument(
            "domain too large for a dense eigensolve; use a rectangle");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
      if (es.info() != Eigen::Success)
        throw std::runtime_error("eigensolver failed");
      dense_p_ = es.eigenvalues();
      dense_W_ = es.eigenvectors().cwiseProduct(es.eigenvectors());
      eigs_.assign(dense_p_.data(), dense_p_.data() + dense_p_.size());
      separable_ = false;
    }
    mass_ = 0;
    for (double p : eigs_) {
      if (std::abs(p) >= 1.0) throw std::runtime_error("spectral radius >= 1");
      mass_ -= std::log1p(-p);
    }
  }

  double tail_bound(int T) const {
    double b = 0;
    for (double p : eigs_) {
      double a = std::abs(p);
      b += std::pow(a, T + 2) / ((T + 2) * (1.0 - p * p));
    }
    return b;
  }

  void build_length_table() {
    int T = 64;
    while (tail_bound(T) > 1e-12 * mass_) {
      T *= 2;
      if (T > (1 << 26)) throw std::runtime_error("length table too long");
    }
    std::vector<double> sq(eigs_.size()), pw(eigs_.size());
    for (std::size_t i = 0; i < eigs_.size(); ++i) {
      sq[i] = eigs_[i] * eigs_[i];
      pw[i] = 1.0;
    }
    lengths_.clear();
    cum_q_.clear();
    double acc = 0;
    for (int t = 2; t <= T; t += 2) {
      double tr = 0;
      for (std::size_t i = 0; i < eigs_.size(); ++i) {
        pw[i] *= sq[i];
        tr += pw[i];
      }
      acc += tr / t;
      lengths_.push_back(t);
      cum_q_.push_back(acc);
    }
    q_total_ = acc;
    if (std::abs(q_total_ + tail_bound(T) / 2 - mass_) > 1e-9 * std::max(1.0, mass_) &&
        std::abs(q_total_ - mass_) > 1e-9 * std::max(1.0, mass_))
      throw std::runtime_error("length table does not reproduce the mass");
  }

  int sample_length(Rng& rng) const {
    double u = rng.u01() * q_total_;
    auto it = std::lower_bound(cum_q_.begin(), cum_q_.end(), u);
    if (it == cum_q_.end()) --it;
    return lengths_[it - cum_q_.begin()];
  }

  // Cumulative diag(P^t) for root sampling, cached per length.
  const Eigen::VectorXd& cum_diag(int t) const {
    auto it = diag_cache_.find(t);
    if (it != diag_cache_.end()) return it->second;
    Eigen::VectorXd d(nv_);
    if (separable_) {
      Eigen::MatrixXd M(m1_, m2_);
      for (int k = 0; k < m1_; ++k)
        for (int l = 0; l < m2_; ++l) M(k, l) = std::pow(std::abs(rect_p_(k, l)), t);
      Eigen::MatrixXd D = W1_ * M * W2_.transpose();  // (a,b) -> diag at vertex
      // Vertex order is lexicographic (column-major in (a,b) with a outer).
      d = Eigen::Map<Eigen::VectorXd>(
          Eigen::MatrixXd(D.transpose()).data(), nv_);
    } else {
      Eigen::VectorXd pw(dense_p_.size());
      for (int i = 0; i < dense_p_.size(); ++i)
        pw[i] = std::pow(std::abs(dense_p_[i]), t);
      d = dense_W_ * pw;
    }
    for (int i = 1; i < nv_; ++i) d[i] += d[i - 1];
    if (diag_cache_.size() > 8192) diag_cache_.clear();
    return diag_cache_.emplace(t, std::move(d)).first->second;
  }

  int sample_root(int t, Rng& rng) const {
    const Eigen::VectorXd& cd = cum_diag(t);
    double u = rng.u01() * cd[nv_ - 1];
    return static_cast<int>(
        std::lower_bound(cd.data(), cd.data() + nv_, u) - cd.data());
  }

  // One sparse matvec: (P v), using the uniform step weight w.
  void apply_P(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
    out.setZero(nv_);
    for (int i = 0; i < nv_; ++i) {
      double acc = 0;
      for (int nb : adj_[i]) acc += v[nb];
      out[i] = w_ * acc;
    }
  }

  // Exact bridge from root back to root in t steps, with sqrt(t) column
  // checkpointing so memory stays O(sqrt(t) * n).
  LatticeLoop bridge(int root, int t, Rng& rng) const {
    int K = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(t))));
    int nck = (t - 1) / K + 1;  // checkpoints at r = 0, K, 2K, ...
    std::vector<Eigen::VectorXd> ck(nck);
    Eigen::VectorXd cur = Eigen::VectorXd::Zero(nv_), nxt(nv_);
    cur[root] = 1.0;
    ck[0] = cur;
    for (int r = 1; r < t; ++r) {
      apply_P(cur, nxt);
      cur.swap(nxt);
      if (r % K == 0) ck[r / K] = cur;
    }
    // Block buffer of columns c_{bK}..c_{bK+K-1}, rebuilt from checkpoints.
    std::vector<Eigen::VectorXd> block;
    int block_lo = -1;
    auto column = [&](int r) -> const Eigen::VectorXd& {
      int b = r / K;
      if (b * K != block_lo) {
        block_lo = b * K;
        int len = std::min(K, t - block_lo);
        block.assign(len, Eigen::VectorXd());
        block[0] = ck[b];
        for (int i = 1; i < len; ++i) {
          block[i].resize(nv_);
          apply_P(block[i - 1], block[i]);
        }
      }
      return block[r - block_lo];
    };

    LatticeLoop loop;
    loop.root = dom_.vertices()[root];
    loop.steps.reserve(t);
    int pos = root;
    for (int r = t; r >= 1; --r) {
      const Eigen::VectorXd& c = column(r - 1);
      double s = 0;
      for (int nb : adj_[pos]) s += c[nb];
      double u = rng.u01() * s;
      int k = 0, last = static_cast<int>(adj_[pos].size()) - 1;
      for (; k < last; ++k) {
        u -= c[adj_[pos][k]];
        if (u <= 0) break;
      }
      loop.steps.push_back(step_char_[pos][k]);
      pos = adj_[pos][k];
    }
    return loop;
  }

  Domain dom_;
  double kappa_, w_;
  int nv_ = 0;
  std::vector<std::vector<int>> adj_;
  std::vector<std::vector<char>> step_char_;

  bool separable_ = false;
  int m1_ = 0, m2_ = 0;
  Eigen::MatrixXd W1_, W2_, rect_p_;
  Eigen::VectorXd dense_p_;
  Eigen::MatrixXd dense_W_;
  std::vector<double> eigs_;

  double mass_ = 0, q_total_ = 0;
  std::vector<int> lengths_;
  std::vector<double> cum_q_;
  mutable std::map<int, Eigen::VectorXd> diag_cache_;
};

}  // namespace loopsoup
