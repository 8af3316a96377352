#include "breather/two_soliton.hpp"

#include <cmath>

#include "breather/dressing.hpp"

namespace breather {
namespace {

constexpr cplx kI{0.0, 1.0};

// Hyperbolic building blocks, each multiplied by exp(-2 s |x|).
struct ScaledHyperbolics {
  double C;     // cosh(2 s x)
  double Cd;    // cosh(2 d x)
  double ch1;   // cosh(2 rho1 x)
  double ch2;   // cosh(2 rho2 x)
  double S1S2;  // sinh(2 rho1 x) sinh(2 rho2 x)
  double C2S1;  // cosh(2 rho2 x) sinh(2 rho1 x)
  double C1S2;  // cosh(2 rho1 x) sinh(2 rho2 x)
  double E0;    // exp(-2 s |x|)
};

ScaledHyperbolics scaled_hyperbolics(const TwoSolitonParams& p, double x) {
  const double u = std::abs(x);
  const double sgn = x < 0.0 ? -1.0 : 1.0;
  const double e1 = std::exp(-4.0 * p.rho1 * u);
  const double e2 = std::exp(-4.0 * p.rho2 * u);
  const double es = e1 * e2;
  ScaledHyperbolics h{};
  h.C = 0.5 * (1.0 + es);
  h.Cd = 0.5 * (e1 + e2);
  h.ch1 = 0.5 * (std::exp(-2.0 * p.rho2 * u) + std::exp(-2.0 * (2.0 * p.rho1 + p.rho2) * u));
  h.ch2 = 0.5 * (std::exp(-2.0 * p.rho1 * u) + std::exp(-2.0 * (p.rho1 + 2.0 * p.rho2) * u));
  h.S1S2 = 0.25 * (1.0 - e1) * (1.0 - e2);
  h.C2S1 = sgn * 0.25 * (1.0 + e2) * (1.0 - e1);
  h.C1S2 = sgn * 0.25 * (1.0 + e1) * (1.0 - e2);
  h.E0 = std::exp(-2.0 * p.s() * u);
  return h;
}

}  // namespace

TwoSolitonFields two_soliton_fields(const TwoSolitonParams& p, double x, double t) {
  const double r1 = p.rho1, r2 = p.rho2, s = p.s(), d = p.d();
  const double w = p.frequency();
  const double phase = w * t + (p.theta2 - p.theta1);
  const ScaledHyperbolics h = scaled_hyperbolics(p, x);

  const double den_b = d * d * h.C + s * s * h.Cd - 4.0 * r1 * r2 * std::cos(phase) * h.E0;
  const cplx e1 = std::exp(kI * (2.0 * r1 * r1 * t + p.theta1));
  const cplx e2 = std::exp(kI * (2.0 * r2 * r2 * t + p.theta2));

  TwoSolitonFields f;
  // The -i matches the phase convention of the linear dressing system.
  f.b1 = -kI * 2.0 * s * d * (r1 * h.ch2 * e1 - r2 * h.ch1 * e2) / den_b;

  const double den_a = 2.0 * r1 * r2 * std::cos(phase) * h.E0 - (r1 * r1 + r2 * r2) * h.C + s * s * h.S1S2;
  const cplx num_a0 = s * s * h.S1S2 +
                      (r1 * r1 * std::exp(-kI * phase) + r2 * r2 * std::exp(kI * phase)) * h.E0 -
                      2.0 * r1 * r2 * h.C;
  f.a0 = r1 * r2 * num_a0 / den_a;
  f.a1 = kI * ((r1 * r1 - r2 * r2) * r1 * h.C2S1 + (r2 * r2 - r1 * r1) * r2 * h.C1S2) / den_a;
  return f;
}

double two_soliton_potential(const TwoSolitonParams& p, double x, double t) {
  return -4.0 * std::norm(two_soliton_fields(p, x, t).b1);
}

double two_soliton_potential_dt(const TwoSolitonParams& p, double x, double t) {
  // |b1|^2 = 4 s^2 d^2 |n|^2 / D^2 with |n|^2 and D affine in cos(phase).
  const double r1 = p.rho1, r2 = p.rho2, s = p.s(), d = p.d();
  const double w = p.frequency();
  const double phase = w * t + (p.theta2 - p.theta1);
  const ScaledHyperbolics h = scaled_hyperbolics(p, x);
  const double c = std::cos(phase), sn = std::sin(phase);
  const double D = d * d * h.C + s * s * h.Cd - 4.0 * r1 * r2 * c * h.E0;
  const double A = r1 * h.ch2, B = r2 * h.ch1;
  // |A e1 - B e2|^2 = A^2 + B^2 - 2AB cos(phase)
  const double n2 = A * A + B * B - 2.0 * A * B * c;
  const double dn2 = 2.0 * A * B * sn * w;
  const double dD = 4.0 * r1 * r2 * sn * w * h.E0;
  const double k = 4.0 * s * s * d * d;
  const double db2 = k * (dn2 * D - 2.0 * n2 * dD) / (D * D * D);
  return -4.0 * db2;
}

cplx two_soliton_a(const TwoSolitonFields& f, double x, double t, cplx lambda) {
  return (lambda * lambda + f.a1 * lambda + f.a0) * plane_wave(lambda, x, t);
}

TwoSolitonPotentialTable::TwoSolitonPotentialTable(const TwoSolitonParams& p, const std::vector<double>& xs)
    : params_(p) {
  const double r1 = p.rho1, r2 = p.rho2, s = p.s(), d = p.d();
  scale_ = -16.0 * s * s * d * d;
  P_.resize(xs.size());
  Q_.resize(xs.size());
  R_.resize(xs.size());
  S_.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const ScaledHyperbolics h = scaled_hyperbolics(p, xs[i]);
    const double A = r1 * h.ch2, B = r2 * h.ch1;
    P_[i] = A * A + B * B;
    Q_[i] = 2.0 * A * B;
    R_[i] = d * d * h.C + s * s * h.Cd;
    S_[i] = 4.0 * r1 * r2 * h.E0;
  }
}

void TwoSolitonPotentialTable::sample(double t, double* out) const {
  const double c = std::cos(params_.frequency() * t + (params_.theta2 - params_.theta1));
  for (std::size_t i = 0; i < P_.size(); ++i) {
    const double D = R_[i] - S_[i] * c;
    out[i] = scale_ * (P_[i] - Q_[i] * c) / (D * D);
  }
}

void TwoSolitonPotentialTable::sample_dt(double t, double* out) const {
  const double w = params_.frequency();
  const double phase = w * t + (params_.theta2 - params_.theta1);
  const double c = std::cos(phase), dc = -w * std::sin(phase);
  for (std::size_t i = 0; i < P_.size(); ++i) {
    const double D = R_[i] - S_[i] * c;
    const double n = P_[i] - Q_[i] * c;
    out[i] = scale_ * (-Q_[i] * dc * D + 2.0 * n * S_[i] * dc) / (D * D * D);
  }
}

}  // namespace breather
