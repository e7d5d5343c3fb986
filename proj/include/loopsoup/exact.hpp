#pragma once

// Exact loop-measure computations via determinants.
//
// The rooted loop measure assigns a walk of length t weight (4+kappa)^-t / t.
// Summing over all loops gives total mass -log det(I-P); flipping P's sign
// across the defect line of a face set S weights each loop by (-1)^(winding
// parity around S), so the odd-parity mass is
//     mass_odd(S) = (log det(I - P^S) - log det(I - P)) / 2
// and spin correlations are <prod_{f in S} sigma_f> = exp(-2 lambda mass_odd).
// Per-face parity patterns over n marked faces follow by a character sum over
// all 2^n twisted determinants.
//
// I - P and every twisted I - P^S are symmetric positive definite (P is
// symmetric with spectral radius < 1, and twisting preserves symmetry), so
// Cholesky-type factorizations apply: dense LDLT for small matrices, sparse
// simplicial LDLT above a crossover.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "loopsoup/lattice.hpp"

namespace loopsoup {

// log det of a symmetric positive definite sparse matrix.
inline double logdet_spd(const Eigen::SparseMatrix<double>& A) {
  constexpr int kDenseCutoff = 512;
  if (A.rows() <= kDenseCutoff) {
    Eigen::MatrixXd M(A);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("dense LDLT failed: matrix not SPD?");
    return ldlt.vectorD().array().log().sum();
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("sparse LDLT failed: matrix not SPD?");
  return ldlt.vectorD().array().log().sum();
}

inline Eigen::SparseMatrix<double> identity_minus(
    const Eigen::SparseMatrix<double>& P) {
  Eigen::SparseMatrix<double> I(P.rows(), P.cols());
  I.setIdentity();
  return I - P;
}

// Total loop mass of the domain: -log det(I - P).
inline double total_mass(const Domain& d, double kappa = 0.0) {
  return -logdet_spd(identity_minus(d.transition_matrix(kappa)));
}

// Mass of loops whose total winding around the faces of S is odd.
inline double odd_mass(const Domain& d, const std::vector<Cell>& S,
                       double kappa = 0.0) {
  double plain = logdet_spd(identity_minus(d.transition_matrix(kappa)));
  double twisted =
      logdet_spd(identity_minus(d.transition_matrix(kappa, d.defect_line(S))));
  return 0.5 * (twisted - plain);
}

// <prod_{f in S} sigma_f> for the winding-parity spin field at intensity
// lambda; always in (0, 1].
inline double npoint(const Domain& d, const std::vector<Cell>& S, double lambda,
                     double kappa = 0.0) {
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  return std::exp(-2.0 * lambda * odd_mass(d, S, kappa));
}

// Masses of all 2^n per-face parity patterns over marked faces.  Entry eps
// (bit f set = face `faces[f]` has odd winding) holds the mass of loops
// realizing exactly that parity vector.  Character sum over subset twists.
inline std::vector<double> pattern_masses(const Domain& d,
                                          const std::vector<Cell>& faces,
                                          double kappa = 0.0) {
  int n = static_cast<int>(faces.size());
  if (n < 1 || n > 8)
    throw std::invalid_argument("pattern_masses supports 1..8 faces");
  std::uint32_t full = 1u << n;
  // Signed mass per twist subset T: sum_loops (-1)^{sum_{f in T} N_f} mu.
  std::vector<double> signed_mass(full);
  for (std::uint32_t T = 0; T < full; ++T) {
    std::vector<Cell> sub;
    for (int f = 0; f < n; ++f)
      if (T & (1u << f)) sub.push_back(faces[f]);
    signed_mass[T] =
        -logdet_spd(identity_minus(d.transition_matrix(kappa, d.defect_line(sub))));
  }
  std::vector<double> out(full);
  for (std::uint32_t eps = 0; eps < full; ++eps) {
    double acc = 0;
    for (std::uint32_t T = 0; T < full; ++T) {
      int k = std::popcount(T & eps);
      acc += (k % 2 ? -1.0 : 1.0) * signed_mass[T];
    }
    out[eps] = acc / static_cast<double>(full);
  }
  return out;
}

// Green matrix G = (I-P)^{-1}: G(x,y) = expected visits to y started at x,
// counting the start.  Dense; intended for small domains.
inline Eigen::MatrixXd green_matrix(const Domain& d, double kappa = 0.0) {
  Eigen::MatrixXd M = Eigen::MatrixXd(identity_minus(d.transition_matrix(kappa)));
  return M.ldlt().solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
}

// Occupation-field moments at a single vertex.  The one-site marginal has
// Laplace transform det(I + s G e_x e_x')^{-lambda} = (1 + s G(x,x))^{-lambda},
// i.e. Gamma(lambda, scale G(x,x)); at lambda = 1/2 this is phi^2/2 for
// phi ~ N(0, G(x,x)), with moments G/2 and 3 G^2/4.
struct OccupationMoments {
  double mean, second;
};
inline OccupationMoments occupation_moments(double gxx, double lambda) {
  return {lambda * gxx, lambda * (lambda + 1.0) * gxx * gxx};
}

// Single diagonal Green entry by a sparse solve; usable on large domains
// where the dense inverse would not fit.
inline double green_diagonal(const Domain& d, Cell vertex, double kappa = 0.0) {
  auto A = identity_minus(d.transition_matrix(kappa));
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("LDLT failed");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(A.rows());
  int idx = d.vertex_index(vertex);
  e[idx] = 1.0;
  return ldlt.solve(e)[idx];
}

// Lattice estimate of the conformal radius at a vertex from the diagonal
// Green function: r ~ mesh * exp((pi/2) G(x,x) - gamma_E - (3/2) log 2),
// from G(x,x) = (2/pi) log(r/mesh) + (2 gamma_E + log 8)/pi + o(1).
inline double conformal_radius_estimate(const Domain& d, Cell vertex,
                                        double kappa = 0.0) {
  constexpr double gamma_e = 0.5772156649015328606;
  double g = green_diagonal(d, vertex, kappa);
  return d.mesh() *
         std::exp(1.5707963267948966 * g - gamma_e - 1.5 * std::log(2.0));
}

// Ferromagnetic correlation inequalities, evaluated exactly.  Slacks are
// nonnegative up to determinant round-off:
//   (i)   <prod_A sigma>_D > 0
//   (ii)  <prod_A sigma>_{D'} >= <prod_A sigma>_D for a subdomain D' (fewer
//         loops can wind; A must lie in D')
//   (iii) <prod_{A xor B} sigma>_D >= <prod_A sigma>_D <prod_B sigma>_D
// (sigma^2 = 1 turns the product over A and B into the symmetric difference).
struct GriffithsReport {
  double positivity;    // <A>_D itself
  double monotonicity;  // <A>_{D'} - <A>_D
  double second;        // <A xor B>_D - <A>_D <B>_D
};
inline GriffithsReport griffiths_check(const Domain& d, const Domain& sub,
                                       const std::vector<Cell>& A,
                                       const std::vector<Cell>& B, double lambda,
                                       double kappa = 0.0) {
  for (Cell f : A)
    if (!sub.has_face(f)) throw std::invalid_argument("A must lie in the subdomain");
  for (Cell f : sub.faces())
    if (!d.has_face(f)) throw std::invalid_argument("subdomain not contained");
  std::vector<Cell> sym;
  {
    std::set<Cell> acc;
    for (Cell f : A)
      if (!acc.insert(f).second) acc.erase(f);
    for (Cell f : B)
      if (!acc.insert(f).second) acc.erase(f);
    sym.assign(acc.begin(), acc.end());
  }
  double ea_d = npoint(d, A, lambda, kappa);
  double ea_sub = npoint(sub, A, lambda, kappa);
  double eb_d = npoint(d, B, lambda, kappa);
  double eab = sym.empty() ? 1.0 : npoint(d, sym, lambda, kappa);
  return {ea_d, ea_sub - ea_d, eab - ea_d * eb_d};
}

// ---------------------------------------------------------------------------
// Truncated direct enumeration, used as an independent oracle.
//
// Sums the loop measure over all rooted loops up to length T by a transfer
// matrix over (vertex, parity-vector) states.  Crossing parities come from
// ray-crossing geometry (a vertical step at x > fi crossing height fj + 1/2),
// not from the defect-line construction, so the two routes share no code.
// ---------------------------------------------------------------------------

struct EnumeratedMasses {
  std::vector<double> pattern;  // per parity vector, 2^n entries
  double total = 0;             // sum over patterns
};

inline EnumeratedMasses enumerate_pattern_masses(const Domain& d,
                                                 const std::vector<Cell>& faces,
                                                 int max_len, double kappa = 0.0) {
  int n = static_cast<int>(faces.size());
  if (n < 0 || n > 8) throw std::invalid_argument("supports up to 8 faces");
  int nv = static_cast<int>(d.vertices().size());
  std::uint32_t np = 1u << n;
  double w = 1.0 / (4.0 + kappa);

  // Per-vertex neighbor lists with the parity flips of each step.
  struct Step {
    int to;
    std::uint32_t flip;
  };
  std::vector<std::vector<Step>> adj(nv);
  for (int vi = 0; vi < nv; ++vi) {
    Cell v = d.vertices()[vi];
    for (Cell nb : d.neighbors(v)) {
      std::uint32_t flip = 0;
      if (nb.first == v.first) {  // vertical step between heights y, y+1
        int x = v.first, ylo = std::min(nb.second, v.second);
        for (int f = 0; f < n; ++f) {
          auto [fi, fj] = faces[f];
          if (x > fi && ylo == fj) flip |= 1u << f;
        }
      }
      adj[vi].push_back({d.vertex_index(nb), flip});
    }
  }

  EnumeratedMasses out;
  out.pattern.assign(np, 0.0);
  std::vector<long double> cur(static_cast<std::size_t>(nv) * np);
  std::vector<long double> nxt(cur.size());
  for (int root = 0; root < nv; ++root) {
    std::fill(cur.begin(), cur.end(), 0.0L);
    cur[static_cast<std::size_t>(root) * np] = 1.0L;
    for (int t = 1; t <= max_len; ++t) {
      std::fill(nxt.begin(), nxt.end(), 0.0L);
      for (int vi = 0; vi < nv; ++vi) {
        const auto base = static_cast<std::size_t>(vi) * np;
        for (std::uint32_t p = 0; p < np; ++p) {
          long double amp = cur[base + p];
          if (amp == 0.0L) continue;
          amp *= w;
          for (const Step& s : adj[vi])
            nxt[static_cast<std::size_t>(s.to) * np + (p ^ s.flip)] += amp;
        }
      }
      cur.swap(nxt);
      if (t >= 2 && t % 2 == 0) {
        const auto base = static_cast<std::size_t>(root) * np;
        for (std::uint32_t p = 0; p < np; ++p)
          out.pattern[p] += static_cast<double>(cur[base + p] / t);
      }
    }
  }
  for (double m : out.pattern) out.total += m;
  return out;
}

// Upper bound on the loop mass missed by truncating at even length T:
// sum_{t > T, even} tr(P^t)/t <= sum_i |p_i|^{T+2} / ((T+2)(1 - p_i^2)).
inline double truncation_tail_bound(const Domain& d, int max_len,
                                    double kappa = 0.0) {
  Eigen::MatrixXd P(d.transition_matrix(kappa));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P,
                                                    Eigen::EigenvaluesOnly);
  double bound = 0;
  for (double p : es.eigenvalues()) {
    double a = std::abs(p);
    if (a >= 1.0) throw std::runtime_error("spectral radius >= 1");
    bound += std::pow(a, max_len + 2) / ((max_len + 2) * (1.0 - p * p));
  }
  return bound;
}

}  // namespace loopsoup
