#pragma once

// Statistical and spectral analysis helpers.
//
// The negative-Sobolev machinery: fields are expanded in eigenmodes of the
// discrete Dirichlet Laplacian on interior vertices (vertices whose four
// incident faces all belong to the domain).  With the discrete inner product
// <f,g> = mesh^2 sum f g, the squared H^{-alpha} distance between two fields
// is sum_m |a_m(f) - a_m(g)|^2 / lambda_m^alpha over the retained modes.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "loopsoup/lattice.hpp"

namespace loopsoup {

// Vertices with all four incident faces inside the domain.
inline std::vector<int> interior_vertex_indices(const Domain& d) {
  std::vector<int> out;
  for (std::size_t v = 0; v < d.vertices().size(); ++v) {
    auto [i, j] = d.vertices()[v];
    if (d.has_face({i, j}) && d.has_face({i - 1, j}) && d.has_face({i, j - 1}) &&
        d.has_face({i - 1, j - 1}))
      out.push_back(static_cast<int>(v));
  }
  return out;
}

// Eigenmodes of the five-point Dirichlet Laplacian, ascending; columns are
// normalized so that mesh^2 * sum_x u(x)^2 = 1.
struct SpectralBasis {
  std::vector<int> vidx;        // interior vertices, indices into d.vertices()
  Eigen::MatrixXd modes;        // |vidx| x k
  Eigen::VectorXd eigenvalues;  // k, ascending
  double mesh = 1.0;

  int size() const { return static_cast<int>(eigenvalues.size()); }

  // Coefficients a_m = mesh^2 sum_x f(x) u_m(x) of a full vertex field.
  Eigen::VectorXd coefficients(const Eigen::VectorXd& vertex_field) const {
    Eigen::VectorXd restricted(static_cast<int>(vidx.size()));
    for (std::size_t i = 0; i < vidx.size(); ++i)
      restricted[static_cast<int>(i)] = vertex_field[vidx[i]];
    return mesh * mesh * (modes.transpose() * restricted);
  }
};

namespace detail {

// Closed-form sine basis for a full w x h rectangle of faces.
inline SpectralBasis rectangle_basis(const Domain& d, int w, int h, int kmax) {
  SpectralBasis b;
  b.mesh = d.mesh();
  b.vidx = interior_vertex_indices(d);
  auto [i0, j0] = d.faces().front();
  int ni = w - 1, nj = h - 1;
  if (static_cast<int>(b.vidx.size()) != ni * nj)
    throw std::logic_error("rectangle interior count mismatch");
  struct Mode {
    double lambda;
    int k, l;
  };
  std::vector<Mode> all;
  all.reserve(static_cast<std::size_t>(ni) * nj);
  double inv2 = 1.0 / (b.mesh * b.mesh);
  for (int k = 1; k <= ni; ++k)
    for (int l = 1; l <= nj; ++l) {
      double sk = std::sin(0.5 * std::numbers::pi * k / w);
      double sl = std::sin(0.5 * std::numbers::pi * l / h);
      all.push_back({4.0 * inv2 * (sk * sk + sl * sl), k, l});
    }
  std::sort(all.begin(), all.end(),
            [](const Mode& a, const Mode& c) { return a.lambda < c.lambda; });
  int kk = std::min<int>(kmax, static_cast<int>(all.size()));
  b.modes.resize(ni * nj, kk);
  b.eigenvalues.resize(kk);
  // Normalization: sum_i sin^2(k pi i / w) = w/2 exactly, so the discrete
  // norm of 2/sqrt(W H) sin sin is 1 under mesh^2 sum.
  double amp = 2.0 / std::sqrt(w * b.mesh * h * b.mesh);
  for (int m = 0; m < kk; ++m) {
    b.eigenvalues[m] = all[m].lambda;
    for (std::size_t q = 0; q < b.vidx.size(); ++q) {
      auto [vi, vj] = d.vertices()[b.vidx[q]];
      double x = static_cast<double>(vi - i0) / w;
      double y = static_cast<double>(vj - j0) / h;
      b.modes(static_cast<int>(q), m) =
          amp * std::sin(all[m].k * std::numbers::pi * x) *
          std::sin(all[m].l * std::numbers::pi * y);
    }
  }
  return b;
}

inline SpectralBasis dense_basis(const Domain& d, int kmax) {
  SpectralBasis b;
  b.mesh = d.mesh();
  b.vidx = interior_vertex_indices(d);
  int n = static_cast<int>(b.vidx.size());
  if (n == 0) throw std::invalid_argument("domain has no interior vertices");
  if (n > 2500)
    throw std::invalid_argument("dense spectral basis limited to 2500 interior vertices");
  std::vector<int> pos(d.vertices().size(), -1);
  for (int q = 0; q < n; ++q) pos[b.vidx[q]] = q;
  double inv2 = 1.0 / (b.mesh * b.mesh);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int q = 0; q < n; ++q) {
    auto [i, j] = d.vertices()[b.vidx[q]];
    A(q, q) = 4.0 * inv2;
    for (Cell nb : {Cell{i + 1, j}, Cell{i - 1, j}, Cell{i, j + 1}, Cell{i, j - 1}}) {
      int vi = d.vertex_index(nb);
      if (vi >= 0 && pos[vi] >= 0) A(q, pos[vi]) = -inv2;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  int kk = std::min(kmax, n);
  b.eigenvalues = es.eigenvalues().head(kk);
  b.modes = es.eigenvectors().leftCols(kk) / b.mesh;
  return b;
}

}  // namespace detail

// Build the basis: closed form on full rectangles, dense eigensolver else.
inline SpectralBasis spectral_basis(const Domain& d, int kmax) {
  auto [i0, j0] = d.faces().front();
  int i1 = i0, j1 = j0;
  for (Cell f : d.faces()) {
    i1 = std::max(i1, f.first);
    j1 = std::max(j1, f.second);
    i0 = std::min(i0, f.first);
    j0 = std::min(j0, f.second);
  }
  int w = i1 - i0 + 1, h = j1 - j0 + 1;
  if (static_cast<long>(w) * h == static_cast<long>(d.faces().size()))
    return detail::rectangle_basis(d, w, h, kmax);
  return detail::dense_basis(d, kmax);
}

// Default truncation used by convergence experiments.
inline int default_mode_count(const Domain& d) {
  int n = static_cast<int>(interior_vertex_indices(d).size());
  return std::max(1, std::min(400, n / 4));
}

// Squared H^{-alpha} distance from coefficient vectors.
inline double sobolev_distance_sq(const SpectralBasis& b,
                                  const Eigen::VectorXd& af,
                                  const Eigen::VectorXd& ag, double alpha) {
  if (af.size() != b.size() || ag.size() != b.size())
    throw std::invalid_argument("coefficient size mismatch");
  double tot = 0;
  for (int m = 0; m < b.size(); ++m) {
    double diff = af[m] - ag[m];
    tot += diff * diff / std::pow(b.eigenvalues[m], alpha);
  }
  return tot;
}

// Inject a face field into vertices: mean over the incident domain faces.
inline Eigen::VectorXd face_field_to_vertices(const Domain& d,
                                              const Eigen::VectorXd& face_vals) {
  Eigen::VectorXd out(static_cast<int>(d.vertices().size()));
  for (std::size_t v = 0; v < d.vertices().size(); ++v) {
    auto [i, j] = d.vertices()[v];
    double acc = 0;
    int cnt = 0;
    for (Cell f : {Cell{i, j}, Cell{i - 1, j}, Cell{i, j - 1}, Cell{i - 1, j - 1}})
      if (d.has_face(f)) {
        acc += face_vals[d.face_index(f)];
        ++cnt;
      }
    out[static_cast<int>(v)] = cnt ? acc / cnt : 0.0;
  }
  return out;
}

// Ratio of the Weyl prediction 4 pi k / area to the k-th smallest Dirichlet
// eigenvalue (1-based k); tends to 1 from above as the mesh refines.
inline double weyl_ratio(const SpectralBasis& b, double area, int k) {
  if (k < 1 || k > b.size()) throw std::invalid_argument("mode index out of range");
  return 4.0 * std::numbers::pi * k / (area * b.eigenvalues[k - 1]);
}

// Two-sided 95% Student t quantile.
inline double student_t95(int dof) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447,
                                 2.365,  2.306, 2.262, 2.228, 2.201, 2.179,
                                 2.160,  2.145, 2.131, 2.120, 2.110, 2.101,
                                 2.093,  2.086, 2.080, 2.074, 2.069, 2.064,
                                 2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof < 1) throw std::invalid_argument("dof must be positive");
  if (dof <= 30) return table[dof - 1];
  if (dof <= 60) return 2.0;
  return 1.96;
}

struct OlsFit {
  double slope, intercept, slope_se, slope_ci95;
};

// Least-squares line with a 95% t confidence interval on the slope.
inline OlsFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
  int n = static_cast<int>(x.size());
  if (n != static_cast<int>(y.size()) || n < 3)
    throw std::invalid_argument("need at least 3 points");
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("degenerate abscissae");
  OlsFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0;
  for (int i = 0; i < n; ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    ssr += r * r;
  }
  f.slope_se = std::sqrt(ssr / (n - 2) / sxx);
  f.slope_ci95 = student_t95(n - 2) * f.slope_se;
  return f;
}

struct MeanSe {
  double mean, se;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  int n = static_cast<int>(v.size());
  if (n < 2) throw std::invalid_argument("need at least 2 samples");
  double m = 0;
  for (double x : v) m += x;
  m /= n;
  double s2 = 0;
  for (double x : v) s2 += (x - m) * (x - m);
  return {m, std::sqrt(s2 / (n - 1) / n)};
}

// Jackknife standard error from leave-one-out statistics.
inline double jackknife_se(const std::vector<double>& loo) {
  int n = static_cast<int>(loo.size());
  if (n < 2) throw std::invalid_argument("need at least 2 replicates");
  double m = 0;
  for (double x : loo) m += x;
  m /= n;
  double s = 0;
  for (double x : loo) s += (x - m) * (x - m);
  return std::sqrt(s * (n - 1) / n);
}

}  // namespace loopsoup
