#pragma once

// Continuum conformal radii for the reference domains.
//
// The conformal radius of a simply connected domain D at z is
// (1 - |w|^2) |f'(w)| for any Riemann map f of the unit disk onto D with
// f(w) = z.  For the disk it is closed form; for the square we use the
// polynomial map of the disk onto the side-1 diamond,
//     f(w) = C sum_k binom(2k,k) 4^{-k} w^{4k+1} / (4k+1),
// whose prevertices are the 4th roots of unity, composed with a rotation by
// pi/4 onto the axis-aligned unit square.  C = 1/(sqrt(2) K) with
// K = int_0^1 dt/sqrt(1-t^4), so that f(1) = 1/sqrt(2) is a vertex.

#include <cmath>
#include <complex>
#include <stdexcept>

namespace loopsoup {

// int_0^1 dt / sqrt(1 - t^4) = 1.3110287771462925...
inline constexpr double kLemniscaticK = 1.3110287771462925;

inline double conformal_radius_disk(double R, std::complex<double> z) {
  double r2 = std::norm(z);
  if (r2 >= R * R) throw std::invalid_argument("point outside the disk");
  return R - r2 / R;
}

namespace detail {

// f and f' of the disk-to-diamond map, C excluded.
inline void diamond_series(std::complex<double> w, std::complex<double>& f,
                           std::complex<double>& fp) {
  std::complex<double> w4 = w * w * w * w;
  std::complex<double> pw = w;   // w^{4k+1}
  std::complex<double> dpw = 1;  // w^{4k}
  double b = 1.0;                // binom(2k,k) 4^{-k}
  f = 0;
  fp = 0;
  for (int k = 0; k < 20000; ++k) {
    f += b * pw / (4.0 * k + 1.0);
    fp += b * dpw;
    if (b * std::abs(dpw) < 1e-17 && k > 4) break;
    b *= (2.0 * k + 1.0) / (2.0 * k + 2.0);
    pw *= w4;
    dpw *= w4;
  }
}

}  // namespace detail

// Conformal radius of the unit square [0,1]^2 at an interior point.
inline double conformal_radius_unit_square(std::complex<double> z) {
  if (z.real() <= 0 || z.real() >= 1 || z.imag() <= 0 || z.imag() >= 1)
    throw std::invalid_argument("point outside the unit square");
  const double C = 1.0 / (std::sqrt(2.0) * kLemniscaticK);
  const std::complex<double> rot = std::polar(1.0, std::atan(1.0));  // e^{i pi/4}
  const std::complex<double> center{0.5, 0.5};
  // Diamond-frame target; the map there is w -> C * series(w).
  std::complex<double> target = (z - center) / rot;
  std::complex<double> w = target / C;
  if (std::abs(w) > 0.8) w *= 0.8 / std::abs(w);
  for (int it = 0; it < 200; ++it) {
    std::complex<double> f, fp;
    detail::diamond_series(w, f, fp);
    std::complex<double> delta = (C * f - target) / (C * fp);
    w -= delta;
    double aw = std::abs(w);
    if (aw > 1.0 - 1e-13) w *= (1.0 - 1e-13) / aw;
    if (std::abs(delta) < 1e-15) break;
  }
  std::complex<double> f, fp;
  detail::diamond_series(w, f, fp);
  return (1.0 - std::norm(w)) * C * std::abs(fp);
}

// Square of side s with lower-left corner at `corner`.
inline double conformal_radius_square(double s, std::complex<double> corner,
                                      std::complex<double> z) {
  return s * conformal_radius_unit_square((z - corner) / s);
}

}  // namespace loopsoup
