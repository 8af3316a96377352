#pragma once

// Reference computations used by the tests.  Everything here is written
// directly from the defining formulas and shares no code with the library
// beyond the types it is handed.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "breather/discrete_data.hpp"
#include "breather/grid.hpp"

namespace oracle {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

inline std::vector<cplx> sample(const breather::SpatialGrid& g, const std::function<cplx(double)>& f) {
  std::vector<cplx> v(g.n_points);
  for (std::size_t j = 0; j < g.n_points; ++j) v[j] = f(g.x(j));
  return v;
}

inline cplx dot(const breather::SpatialGrid& g, const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::conj(a[j]) * b[j];
  return s * g.dx();
}

inline double norm(const breather::SpatialGrid& g, const std::vector<cplx>& a) { return std::sqrt(dot(g, a, a).real()); }

inline double rel_l2(const std::vector<cplx>& a, const std::vector<cplx>& ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num += std::norm(a[j] - ref[j]);
    den += std::norm(ref[j]);
  }
  return std::sqrt(num / den);
}

/// Composite Simpson on [a, b] with n (even) intervals.
template <class F>
auto simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  auto s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * (h / 3.0);
}

/// exp(-x^2/(4a)) evolved under i f_t = -kappa/2 f_xx.
inline cplx free_gaussian(double x, double t, double a, double kappa = 1.0) {
  const cplx at = a + cplx(0.0, 0.5 * kappa * t);
  return std::sqrt(a / at) * std::exp(-x * x / (4.0 * at));
}

/// Second moment of |f|^2 for the same packet: a + kappa^2 t^2 / (4a).
inline double free_gaussian_variance(double t, double a, double kappa = 1.0) {
  return a + kappa * kappa * t * t / (4.0 * a);
}

/// Sum of a few modulated Gaussians with random centres, widths and phases.
inline std::function<cplx(double)> random_packet(std::mt19937& rng, double spread = 10.0) {
  std::uniform_real_distribution<double> centre(-spread, spread), width(1.0, 3.0), k(-1.5, 1.5), ph(0.0, 2.0 * kPi),
      amp(0.3, 1.0);
  struct Bump {
    double c, w, k, a, phase;
  };
  std::vector<Bump> bumps;
  for (int i = 0; i < 3; ++i) bumps.push_back({centre(rng), width(rng), k(rng), amp(rng), ph(rng)});
  return [bumps](double x) {
    cplx v = 0.0;
    for (const auto& b : bumps)
      v += b.a * std::exp(-(x - b.c) * (x - b.c) / (2.0 * b.w * b.w)) * std::polar(1.0, b.k * x + b.phase);
    return v;
  };
}

/// Least squares y = a t^2 + b t^4; returns a.
inline double quadratic_quartic_fit(const std::vector<double>& t, const std::vector<double>& y) {
  double s44 = 0.0, s46 = 0.0, s88 = 0.0, r4 = 0.0, r8 = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double p2 = t[i] * t[i], p4 = p2 * p2;
    s44 += p2 * p2;
    s46 += p2 * p4;
    s88 += p4 * p4;
    r4 += p2 * y[i];
    r8 += p4 * y[i];
  }
  return (r4 * s88 - r8 * s46) / (s44 * s88 - s46 * s46);
}

/// Minimizer of a unimodal function on [a, b] by golden section.
template <class F>
double golden_min(F&& f, double a, double b, double tol = 1e-12) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Residual of i psi_t + psi_xx / 2 + |psi|^2 psi at (x, t), fourth-order
/// central differences with step h, relative to max(|psi|, 1) scale.
template <class F>
double nls_residual(F&& psi, double x, double t, double h) {
  const auto d1 = [&](double s) {
    return (-psi(x, s + 2 * h) + 8.0 * psi(x, s + h) - 8.0 * psi(x, s - h) + psi(x, s - 2 * h)) / (12.0 * h);
  };
  const cplx pt = d1(t);
  const cplx pxx = (-psi(x + 2 * h, t) + 16.0 * psi(x + h, t) - 30.0 * psi(x, t) + 16.0 * psi(x - h, t) -
                    psi(x - 2 * h, t)) /
                   (12.0 * h * h);
  const cplx p = psi(x, t);
  return std::abs(cplx(0.0, 1.0) * pt + 0.5 * pxx + std::norm(p) * p);
}

}  // namespace oracle
