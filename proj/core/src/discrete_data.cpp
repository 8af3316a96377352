#include "breather/discrete_data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "breather/error.hpp"

namespace breather {

double TwoSolitonParams::period() const { return std::numbers::pi / (s() * d()); }

void TwoSolitonParams::validate() const {
  if (!std::isfinite(rho1) || !std::isfinite(rho2) || !std::isfinite(theta1) ||
      !std::isfinite(theta2))
    throw InvalidArgument("two-soliton parameters must be finite");
  if (!(rho1 > 0.0 && rho1 < rho2))
    throw InvalidArgument("two-soliton parameters need 0 < rho1 < rho2 (got rho1=" +
                          std::to_string(rho1) + ", rho2=" + std::to_string(rho2) + ")");
}

void DiscreteData::validate() const {
  if (lambdas.empty()) throw InvalidArgument("discrete data needs at least one spectral point");
  if (g.size() != lambdas.size())
    throw InvalidArgument("discrete data has " + std::to_string(lambdas.size()) +
                          " spectral points but " + std::to_string(g.size()) + " g-vectors");
  const std::size_t n = g.front().size();
  if (n == 0) throw InvalidArgument("g-vectors must have at least one component");
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (g[k].size() != n) throw InvalidArgument("g-vectors must all have the same length");
    if (!(lambdas[k].imag() > 0.0))
      throw InvalidArgument("spectral point " + std::to_string(k) + " is not in the upper half-plane");
    for (std::size_t j = 0; j < k; ++j)
      if (std::abs(lambdas[k] - lambdas[j]) == 0.0)
        throw InvalidArgument("spectral points must be pairwise distinct");
  }
}

DiscreteData DiscreteData::from_two_soliton(const TwoSolitonParams& p) {
  p.validate();
  DiscreteData data;
  data.lambdas = {cplx(0.0, p.rho1), cplx(0.0, p.rho2)};
  data.g = {{std::polar(1.0, p.theta1)}, {std::polar(1.0, p.theta2)}};
  return data;
}

DiscreteData DiscreteData::single_well(double rho, double theta) {
  DiscreteData data;
  data.lambdas = {cplx(0.0, rho)};
  data.g = {{std::polar(1.0, theta)}};
  data.validate();
  return data;
}

PeriodReport check_commensurate(const DiscreteData& data, double tol) {
  data.validate();
  for (const cplx& l : data.lambdas)
    if (l.real() != 0.0)
      throw NotImaginarySpectrum("spectral points with nonzero real part give a moving, non-periodic frame");

  PeriodReport rep;
  rep.harmonics.assign(data.M(), 0);
  if (data.M() == 1) return rep;

  const double base = data.lambdas[0].imag() * data.lambdas[0].imag();
  std::vector<double> gaps(data.M());
  double smallest = 0.0;
  for (std::size_t k = 0; k < data.M(); ++k) {
    const double r = data.lambdas[k].imag();
    gaps[k] = r * r - base;
    if (gaps[k] != 0.0 && (smallest == 0.0 || std::abs(gaps[k]) < smallest)) smallest = std::abs(gaps[k]);
  }
  if (smallest == 0.0) return rep;  // all |lambda_k| equal: no beating

  // Look for a common frequency smallest/q with every gap an integer multiple.
  constexpr long kMaxDenominator = 1000;
  for (long q = 1; q <= kMaxDenominator; ++q) {
    const double unit = smallest / static_cast<double>(q);
    bool ok = true;
    for (std::size_t k = 0; k < data.M() && ok; ++k) {
      const double m = gaps[k] / unit;
      ok = std::abs(m - std::round(m)) <= tol * std::max(1.0, std::abs(m));
    }
    if (!ok) continue;
    rep.kind = TimeDependence::Periodic;
    rep.period = std::numbers::pi / unit;
    for (std::size_t k = 0; k < data.M(); ++k) rep.harmonics[k] = std::lround(gaps[k] / unit);
    return rep;
  }
  rep.kind = TimeDependence::Quasiperiodic;
  return rep;
}

}  // namespace breather
