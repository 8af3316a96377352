#pragma once

// Closed forms for the even two-soliton family (N = 1, M = 2, lambda_k = i rho_k,
// g_k = exp(i theta_k)).  All hyperbolic functions are evaluated pre-divided by
// exp(2 s |x|), so the expressions are finite at every x.

#include <vector>

#include "breather/discrete_data.hpp"

namespace breather {

struct TwoSolitonFields {
  cplx b1;  // b^(1)(x,t)
  cplx a0;  // a^(0)(x,t), even in x
  cplx a1;  // a^(1)(x,t), odd in x
};

TwoSolitonFields two_soliton_fields(const TwoSolitonParams& p, double x, double t);

/// V0 = -4 |b^(1)|^2.
double two_soliton_potential(const TwoSolitonParams& p, double x, double t);

/// dV0/dt from the closed form (used for step-size control).
double two_soliton_potential_dt(const TwoSolitonParams& p, double x, double t);

/// a(x,t,lambda) = (lambda^2 + a1 lambda + a0) e^{-2i(lambda x + lambda^2 t)}.
cplx two_soliton_a(const TwoSolitonFields& f, double x, double t, cplx lambda);

/// V0 on a fixed set of points, for repeated evaluation in time.  The x
/// dependence is folded into four coefficients per point so that
/// V0 = -16 s^2 d^2 (P - Q c) / (R - S c)^2 with c = cos(omega t + theta2 - theta1).
class TwoSolitonPotentialTable {
 public:
  TwoSolitonPotentialTable(const TwoSolitonParams& p, const std::vector<double>& xs);

  std::size_t size() const { return P_.size(); }
  /// out[i] = V0(xs[i], t)
  void sample(double t, double* out) const;
  /// out[i] = dV0/dt(xs[i], t)
  void sample_dt(double t, double* out) const;

 private:
  TwoSolitonParams params_;
  double scale_;
  std::vector<double> P_, Q_, R_, S_;
};

}  // namespace breather
