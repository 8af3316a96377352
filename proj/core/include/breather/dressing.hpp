#pragma once

// Dressing construction of separable potentials: the coefficient functions of
// a(x,t,lambda) and b(x,t,lambda) are fixed by requiring, for every spectral
// point lambda_k,
//
//   a(x,t,lambda_k)   =  g_k^H b(x,t,lambda_k)
//   b(x,t,lambda_k^*) = -a(x,t,lambda_k^*) g_k
//
// which is a square linear system of size M(N+1).  Rows are rescaled by the
// dominant exponential so the system stays representable at any |x|.

#include <complex>
#include <vector>

#include "breather/discrete_data.hpp"

namespace breather {

struct DressingOptions {
  /// Reciprocal-condition ceiling; beyond it the solve reports SingularSystem.
  double condition_ceiling = 1e12;
};

struct CoefficientSolution {
  std::vector<cplx> a;               // a^(p), p = 0..M-1
  std::vector<std::vector<cplx>> b;  // b^(p)_n, p = 0..M-1, n = 0..N-1
  double x = 0.0;
  double t = 0.0;
  /// Max row residual, relative to sum_j |A_ij z_j| + |rhs_i|.
  double residual = 0.0;
  /// Estimated 1-norm condition number of the scaled system.
  double condition = 1.0;
};

CoefficientSolution solve_dressing(const DiscreteData& data, double x, double t,
                                   const DressingOptions& opts = {});

/// e^{-2i(lambda x + lambda^2 t)}.
cplx plane_wave(cplx lambda, double x, double t);

/// b(x,t,lambda) component n.
cplx eval_b(const CoefficientSolution& sol, std::size_t n, cplx lambda);

/// a(x,t,lambda) from an existing solution.  At lambda = lambda_k^* the value
/// is taken from the second dressing relation, which avoids the cancellation
/// the polynomial form suffers on the growing side.
cplx eval_a(const DiscreteData& data, const CoefficientSolution& sol, cplx lambda);
cplx eval_a(const DiscreteData& data, double x, double t, cplx lambda,
            const DressingOptions& opts = {});

double potential_from(const CoefficientSolution& sol);
double eval_potential(const DiscreteData& data, double x, double t,
                      const DressingOptions& opts = {});

/// Residuals of the two dressing relations at every lambda_k and lambda_k^*,
/// each relative to the magnitude of the terms in its (rescaled) row.
double dressing_relation_residual(const DiscreteData& data, const CoefficientSolution& sol);

}  // namespace breather
