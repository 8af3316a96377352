#pragma once

// Coupling of a breather mode to the continuum under a periodic perturbation
// W(x,t): matrix elements, their Fourier series over one period, and the
// resulting decay rate, Lamb shift and mean frequency shift.

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "breather/discrete_data.hpp"
#include "breather/grid.hpp"
#include "breather/spectral_basis.hpp"

namespace breather {

/// (1+eps) V0(x/sqrt(1+eps), t) - V0(x, t): the potential seen in the
/// stretched coordinate when the kinetic term is detuned by 1/(1+eps).
double detuning_W(const TwoSolitonParams& p, double epsilon, double x, double t);

struct PerturbationSpec {
  enum class Kind { Detuning, Custom };

  Kind kind = Kind::Detuning;
  TwoSolitonParams potential;
  double epsilon = 0.0;
  std::function<double(double, double)> sampler;  // custom W(x, t)
  double period = 0.0;

  static PerturbationSpec detuning(const TwoSolitonParams& p, double epsilon);
  static PerturbationSpec custom(const TwoSolitonParams& p, std::function<double(double, double)> w);

  double operator()(double x, double t) const;
  bool is_zero() const { return kind == Kind::Detuning && epsilon == 0.0; }
  /// Checks the period matches the potential and spot-checks evenness in x.
  void validate() const;
};

/// Fourier series sum_{k=-K}^{K} c_k e^{2 pi i k t / L}.
struct FourierSeries {
  long K = 0;
  std::vector<cplx> coeffs;  // index k + K

  cplx operator[](long k) const { return (k < -K || k > K) ? cplx(0.0) : coeffs[static_cast<std::size_t>(k + K)]; }
  cplx evaluate(double t, double period) const;
};

struct FourierOptions {
  double aliasing_threshold = 1e-10;
  bool real_valued = false;
};

/// Coefficients from `samples` taken at t_j = j L / n, n >= 4 K_max.
/// Throws AliasingSuspected if the top octave of the discrete spectrum holds
/// more than `aliasing_threshold` of the energy.
FourierSeries fourier_coeffs(const std::vector<cplx>& samples, long k_max, const FourierOptions& opts = {});
/// Fraction of spectral energy with n/4 < |k| <= n/2.
double top_octave_fraction(const std::vector<cplx>& samples);

struct CouplingOptions {
  long k_max = 32;
  std::size_t time_samples = 0;  // 0: smallest power of two >= 4 k_max that passes the aliasing check
  double lambda_max = 0.0;       // 0: max(4 rho2, 1.5 sqrt(sigma_nmax))
  std::size_t panels = 24;
  std::size_t nodes_per_panel = 16;
  double dx = 0.1;
  double x_extent = 0.0;  // 0: 7 / rho1
  double sigma_floor = 1e-3;
  bool drop_zero_resonance = false;
  double aliasing_threshold = 1e-10;
  double tail_tolerance = 1e-8;
  double oracle_tolerance = 1e-6;
  bool run_oracle = true;
  bool compute_kernel = false;
  /// Resonances are kept while their share of Gamma is at least this.
  double truncation = 1e-14;
  /// k_max grows until the last retained resonance is below this share.
  double harmonic_cutoff = 1e-12;
  /// Worker threads for sampling (0: hardware concurrency).
  unsigned threads = 0;
};

/// Matrix elements at one time, with the periodic phase factors applied.
struct MatrixElements {
  double M = 0.0;
  std::vector<cplx> N;             // N^(p)(t, lambda_j)
  std::optional<Eigen::MatrixXcd> K;  // K^(p)(t, eta_i, lambda_j)
  double tail_fraction = 0.0;
};

/// Evaluates the inner products on a symmetric trapezoid grid in x.
class MatrixElementIntegrator {
 public:
  MatrixElementIntegrator(PerturbationSpec W, Parity parity, const CouplingOptions& opts = {});

  MatrixElements at(double t, const std::vector<double>& lambdas, bool kernel = false) const;
  /// N^(p)(t, lambda) for a single lambda.
  cplx N(double t, double lambda) const;
  /// ||W Psi_b||^2 - M^2 at time t, i.e. the continuum share of W Psi_b.
  double continuum_coupling_norm(double t) const;

  const TwoSolitonBasis& basis() const { return basis_; }
  const PerturbationSpec& perturbation() const { return W_; }
  unsigned threads() const { return threads_; }

 private:
  PerturbationSpec W_;
  TwoSolitonBasis basis_;
  double beta_;
  std::vector<double> xs_;
  std::vector<double> weights_;
  unsigned threads_ = 0;
};

MatrixElements matrix_elements(const PerturbationSpec& W, Parity parity, double t, const SpectralGrid& spectral,
                               bool kernel = false, const CouplingOptions& opts = {});

struct Resonance {
  long n = 0;
  double sigma = 0.0;
  double lambda = 0.0;          // sqrt(sigma)
  cplx coefficient;             // N_n(sqrt(sigma_n)) from the sampled series
  cplx oracle;                  // adaptive time quadrature of the same coefficient
  double oracle_error = 0.0;    // relative difference
  bool oracle_checked = false;
  double contribution = 0.0;    // (pi/4) |N_n|^2 / sqrt(sigma_n)
};

struct CouplingData {
  Parity parity = Parity::Odd;
  double period = 0.0;
  double beta = 0.0;
  std::size_t time_samples = 0;
  FourierSeries fourier_M;
  SpectralGrid spectral;
  std::vector<FourierSeries> fourier_N;  // one series per spectral node
  std::vector<cplx> N_initial;           // N^(p)(0, lambda_j)
  std::vector<Resonance> resonances;     // n0 .. n_max
  std::vector<long> near_zero;           // n with |sigma_n| < sigma_floor
  std::vector<FourierSeries> fourier_K;  // optional, flattened (i * nodes + j)
  double sigma_floor = 1e-3;
  bool drop_zero_resonance = false;
  double max_oracle_error = 0.0;
  double spatial_tail = 0.0;
};

/// sigma_n = pi n / L - beta
double resonance_sigma(long n, double period, double beta);
/// Smallest n with sigma_n > 0 (sigma values within 1e-12 of 0 count as 0).
long first_resonance(double period, double beta);

CouplingData compute_coupling(const PerturbationSpec& W, Parity parity, const CouplingOptions& opts = {});

struct DecayPrediction {
  Parity parity = Parity::Odd;
  double period = 0.0;
  double beta = 0.0;
  double Mbar = 0.0;
  double Gamma = 0.0;
  double Lambda = 0.0;
  long n0 = 1;
  std::vector<Resonance> resonances;
  std::vector<long> dropped;
  double small_time_C = 0.0;
  FourierSeries fourier_M;
};

/// Gamma = (pi/4) sum_{n >= n0} |N_n(sqrt sigma_n)|^2 / sqrt(sigma_n).
/// Throws NearZeroResonance in even parity when some |sigma_n| < sigma_floor,
/// unless the coupling was built with drop_zero_resonance.
double golden_rule(const CouplingData& c);
/// Principal-value Lamb shift in the lambda variable.
double lamb_shift(const CouplingData& c);
/// C = int_0^inf |N^(p)(0,lambda)|^2 dlambda.
double small_time_coefficient(const CouplingData& c);

DecayPrediction predict(const CouplingData& c);

/// A_b(t) = A_b(0) e^{2i beta t} e^{-Gamma|t|} e^{i Lambda t} e^{-i int_0^t M}.
cplx predict_amplitude(const DecayPrediction& pred, cplx A0, double t);
/// int_0^t M(s) ds from the Fourier series of M.
double integrated_M(const FourierSeries& M, double period, double t);

/// Slope of int_0^T of the secular part of the bound-state self-energy,
/// measured between T_lo and T_hi; tends to Gamma - i Lambda.
cplx time_domain_rates(const CouplingData& c, double T_lo, double T_hi);

struct ConvergenceReport {
  DecayPrediction base;
  DecayPrediction refined;
  double gamma_change = 0.0;
  double lambda_change = 0.0;
  bool passed = false;
};

/// Computes the prediction with `opts` (the oracle runs if enabled there),
/// then recomputes with twice the spectral panels and harmonics; throws
/// ConvergenceFailure if Gamma or Lambda move by more than `tolerance`.
ConvergenceReport convergence_gate(const PerturbationSpec& W, Parity parity, const CouplingOptions& opts = {},
                                   double tolerance = 5e-3, bool throw_on_failure = true);

}  // namespace breather
