#include "breather/dressing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "breather/error.hpp"

namespace breather {
namespace {

constexpr cplx kI{0.0, 1.0};

// Exponent of the plane wave e^{-2i(lambda x + lambda^2 t)}.
cplx wave_exponent(cplx lambda, double x, double t) {
  return -2.0 * kI * (lambda * x + lambda * lambda * t);
}

cplx ipow(cplx z, std::size_t p) {
  cplx r = 1.0;
  for (std::size_t i = 0; i < p; ++i) r *= z;
  return r;
}

}  // namespace

cplx plane_wave(cplx lambda, double x, double t) { return std::exp(wave_exponent(lambda, x, t)); }

CoefficientSolution solve_dressing(const DiscreteData& data, double x, double t,
                                   const DressingOptions& opts) {
  data.validate();
  if (!std::isfinite(x) || !std::isfinite(t))
    throw InvalidArgument("dressing evaluation point must be finite");

  const std::size_t M = data.M();
  const std::size_t N = data.N();
  const std::size_t dim = M * (N + 1);
  // Unknown layout: a^(0..M-1), then b^(p)_n at M + p*N + n.
  auto b_index = [M, N](std::size_t p, std::size_t n) { return M + p * N + n; };

  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));

  Eigen::Index row = 0;
  for (std::size_t k = 0; k < M; ++k) {
    const cplx lam = data.lambdas[k];
    const cplx phi = wave_exponent(lam, x, t);
    // a(lambda_k) - g^H b(lambda_k) = 0, divided through by the larger of
    // E and 1 so no entry exceeds O(|lambda|^M).
    const bool divide = phi.real() > 0.0;
    const cplx a_scale = divide ? cplx(1.0) : std::exp(phi);
    const cplx b_scale = divide ? std::exp(-phi) : cplx(1.0);
    for (std::size_t p = 0; p < M; ++p) {
      const cplx lp = ipow(lam, p);
      A(row, static_cast<Eigen::Index>(p)) = lp * a_scale;
      for (std::size_t n = 0; n < N; ++n)
        A(row, static_cast<Eigen::Index>(b_index(p, n))) = -lp * std::conj(data.g[k][n]) * b_scale;
    }
    rhs(row) = -ipow(lam, M) * a_scale;
    ++row;
  }
  for (std::size_t k = 0; k < M; ++k) {
    const cplx lam = std::conj(data.lambdas[k]);
    const cplx phi = wave_exponent(lam, x, t);
    const bool divide = phi.real() > 0.0;
    const cplx a_scale = divide ? cplx(1.0) : std::exp(phi);
    const cplx b_scale = divide ? std::exp(-phi) : cplx(1.0);
    for (std::size_t n = 0; n < N; ++n) {
      const cplx gn = data.g[k][n];
      for (std::size_t p = 0; p < M; ++p) {
        const cplx lp = ipow(lam, p);
        A(row, static_cast<Eigen::Index>(b_index(p, n))) = lp * b_scale;
        A(row, static_cast<Eigen::Index>(p)) = gn * lp * a_scale;
      }
      rhs(row) = -gn * ipow(lam, M) * a_scale;
      ++row;
    }
  }

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  const double rcond = lu.rcond();
  const double condition = rcond > 0.0 ? 1.0 / rcond : INFINITY;
  if (!(condition <= opts.condition_ceiling)) {
    std::ostringstream msg;
    msg << "dressing system at x=" << x << ", t=" << t << " has condition estimate " << condition
        << " above ceiling " << opts.condition_ceiling;
    throw SingularSystem(msg.str());
  }
  const Eigen::VectorXcd z = lu.solve(rhs);

  const Eigen::VectorXcd r = A * z - rhs;
  double residual = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    double scale = std::abs(rhs(i));
    for (Eigen::Index j = 0; j < z.size(); ++j) scale += std::abs(A(i, j) * z(j));
    if (scale > 0.0) residual = std::max(residual, std::abs(r(i)) / scale);
  }

  CoefficientSolution sol;
  sol.x = x;
  sol.t = t;
  sol.residual = residual;
  sol.condition = condition;
  sol.a.resize(M);
  sol.b.assign(M, std::vector<cplx>(N));
  for (std::size_t p = 0; p < M; ++p) {
    sol.a[p] = z(static_cast<Eigen::Index>(p));
    for (std::size_t n = 0; n < N; ++n) sol.b[p][n] = z(static_cast<Eigen::Index>(b_index(p, n)));
  }
  return sol;
}

cplx eval_b(const CoefficientSolution& sol, std::size_t n, cplx lambda) {
  cplx acc = 0.0;
  for (std::size_t p = sol.b.size(); p-- > 0;) acc = acc * lambda + sol.b[p][n];
  return acc;
}

cplx eval_a(const DiscreteData& data, const CoefficientSolution& sol, cplx lambda) {
  const std::size_t M = sol.a.size();
  for (std::size_t k = 0; k < data.M(); ++k) {
    if (lambda == std::conj(data.lambdas[k])) {
      // a(lambda_k^*) = -g_k^H b(lambda_k^*) / |g_k|^2
      cplx num = 0.0;
      double norm2 = 0.0;
      for (std::size_t n = 0; n < data.N(); ++n) {
        num += std::conj(data.g[k][n]) * eval_b(sol, n, lambda);
        norm2 += std::norm(data.g[k][n]);
      }
      return -num / norm2;
    }
  }
  cplx poly = 1.0;
  for (std::size_t p = M; p-- > 0;) poly = poly * lambda + sol.a[p];
  return poly * plane_wave(lambda, sol.x, sol.t);
}

cplx eval_a(const DiscreteData& data, double x, double t, cplx lambda, const DressingOptions& opts) {
  return eval_a(data, solve_dressing(data, x, t, opts), lambda);
}

double potential_from(const CoefficientSolution& sol) {
  double acc = 0.0;
  for (const cplx& c : sol.b.back()) acc += std::norm(c);
  return -4.0 * acc;
}

double eval_potential(const DiscreteData& data, double x, double t, const DressingOptions& opts) {
  return potential_from(solve_dressing(data, x, t, opts));
}

double dressing_relation_residual(const DiscreteData& data, const CoefficientSolution& sol) {
  // Each relation is rescaled like its row in the solve, then compared with
  // the sum of the magnitudes of the terms in that row.
  const std::size_t M = sol.a.size();
  double worst = 0.0;
  auto poly_a = [&](cplx lam, double& mag) {
    cplx poly = 1.0;
    mag = std::pow(std::abs(lam), static_cast<double>(M));
    for (std::size_t p = M; p-- > 0;) {
      poly = poly * lam + sol.a[p];
      mag += std::pow(std::abs(lam), static_cast<double>(p)) * std::abs(sol.a[p]);
    }
    return poly;
  };
  auto poly_b = [&](cplx lam, std::size_t n, double& mag) {
    mag = 0.0;
    for (std::size_t p = 0; p < M; ++p) mag += std::pow(std::abs(lam), static_cast<double>(p)) * std::abs(sol.b[p][n]);
    return eval_b(sol, n, lam);
  };
  for (std::size_t k = 0; k < data.M(); ++k) {
    {
      const cplx lam = data.lambdas[k];
      const cplx phi = wave_exponent(lam, sol.x, sol.t);
      const bool divide = phi.real() > 0.0;
      const double sa = divide ? 1.0 : std::exp(phi.real());
      const double sb = divide ? std::exp(-phi.real()) : 1.0;
      double ma = 0.0, mb = 0.0, mag = 0.0;
      const cplx lhs = poly_a(lam, ma) * (divide ? cplx(1.0) : std::exp(phi));
      cplx gb = 0.0;
      for (std::size_t n = 0; n < data.N(); ++n) {
        gb += std::conj(data.g[k][n]) * poly_b(lam, n, mb);
        mag += std::abs(data.g[k][n]) * mb * sb;
      }
      const cplx r = gb * (divide ? std::exp(-phi) : cplx(1.0));
      mag += ma * sa;
      worst = std::max(worst, std::abs(lhs - r) / std::max(mag, 1e-300));
    }
    {
      const cplx lam = std::conj(data.lambdas[k]);
      const cplx phi = wave_exponent(lam, sol.x, sol.t);
      const bool divide = phi.real() > 0.0;
      const double sa = divide ? 1.0 : std::exp(phi.real());
      const double sb = divide ? std::exp(-phi.real()) : 1.0;
      double ma = 0.0, mb = 0.0;
      const cplx pa = poly_a(lam, ma);
      for (std::size_t n = 0; n < data.N(); ++n) {
        const cplx lhs = poly_b(lam, n, mb) * (divide ? std::exp(-phi) : cplx(1.0));
        const cplx r = -data.g[k][n] * pa * (divide ? cplx(1.0) : std::exp(phi));
        const double mag = mb * sb + std::abs(data.g[k][n]) * ma * sa;
        worst = std::max(worst, std::abs(lhs - r) / std::max(mag, 1e-300));
      }
    }
  }
  return worst;
}

}  // namespace breather
