#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace breather {

using cplx = std::complex<double>;

/// Parameters of the even two-soliton family: spectral points i*rho1, i*rho2
/// with unit-modulus normalization data exp(i*theta_k).
struct TwoSolitonParams {
  double rho1 = 0.25;
  double rho2 = 0.75;
  double theta1 = 0.0;
  double theta2 = 0.0;

  double s() const { return rho2 + rho1; }
  double d() const { return rho2 - rho1; }
  /// Temporal period pi/(s d) of the potential.
  double period() const;
  /// Angular frequency 2 s d.
  double frequency() const { return 2.0 * s() * d(); }
  /// Floquet exponent of both bound states; branch fixed at rho1^2.
  double floquet_exponent() const { return rho1 * rho1; }

  /// Throws InvalidArgument unless 0 < rho1 < rho2 and everything is finite.
  void validate() const;

  friend bool operator==(const TwoSolitonParams&, const TwoSolitonParams&) = default;
};

/// Generators of a separable potential: M distinct upper-half-plane points and
/// M normalization vectors in C^N.
struct DiscreteData {
  std::vector<cplx> lambdas;
  std::vector<std::vector<cplx>> g;

  std::size_t M() const { return lambdas.size(); }
  std::size_t N() const { return g.empty() ? 0 : g.front().size(); }

  /// Throws InvalidArgument if any invariant fails.
  void validate() const;

  static DiscreteData from_two_soliton(const TwoSolitonParams& p);
  /// One stationary well, lambda = i*rho, g = exp(i*theta).
  static DiscreteData single_well(double rho, double theta = 0.0);

  friend bool operator==(const DiscreteData&, const DiscreteData&) = default;
};

enum class TimeDependence { Stationary, Periodic, Quasiperiodic };

struct PeriodReport {
  TimeDependence kind = TimeDependence::Stationary;
  /// Fundamental period (0 unless periodic).
  double period = 0.0;
  /// rho_k^2 - rho_1^2 = harmonics[k] * pi / period.
  std::vector<long> harmonics;
};

/// Decides whether V0 built from purely imaginary spectral points is periodic
/// in t.  Throws NotImaginarySpectrum if some lambda_k has a real part.
PeriodReport check_commensurate(const DiscreteData& data, double tol = 1e-10);

}  // namespace breather
