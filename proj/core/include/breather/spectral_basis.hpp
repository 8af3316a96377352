#pragma once

// Exact eigenbasis of the unperturbed problem: bound states and the
// delta-normalized continuum Psi_d(x,t,lambda), plus analysis/synthesis on a
// spatial grid and the diagonal (Floquet) propagator.

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "breather/discrete_data.hpp"
#include "breather/dressing.hpp"
#include "breather/grid.hpp"

namespace breather {

/// Raw: B(t) = <Psi(t), f(t)>.  Floquet: A_b = B_b e^{2i beta t}, A_d = B_d e^{-2i lambda^2 t}.
enum class TimeConvention { Raw, Floquet };

struct ModeAmplitudes {
  Parity parity = Parity::Odd;
  std::vector<cplx> bound;
  std::vector<cplx> continuum;  // one value per spectral node
  SpectralGrid spectral;
  TimeConvention convention = TimeConvention::Raw;
  double time = 0.0;

  /// |B_b|^2 + sum_j w_j |B_d(lambda_j)|^2
  double parseval() const;
};

/// Mode values sampled on a set of points at one time.
struct ModeTable {
  std::vector<double> xs;
  double time = 0.0;
  std::vector<std::vector<cplx>> bound;  // [k][i]
  Eigen::MatrixXcd continuum;            // (point, node)
};

class ModeBasis {
 public:
  virtual ~ModeBasis() = default;

  virtual Parity parity() const = 0;
  virtual std::size_t bound_count() const = 0;
  /// Shared Floquet exponent of the bound states.
  virtual double floquet_exponent() const = 0;
  /// Period of the potential; 0 when stationary.
  virtual double period() const = 0;

  virtual cplx bound(std::size_t k, double x, double t) const = 0;
  /// lambda >= 0 for even/odd bases, any real lambda for full.
  virtual cplx continuum(double x, double t, double lambda) const = 0;

  /// Batch evaluation.  The default loops over the pointwise functions.
  virtual ModeTable tabulate(const std::vector<double>& xs, double t,
                             const std::vector<double>& lambdas) const;
};

/// Two-soliton family with the even/odd bound states and parity continua.
/// Full parity gives both bound states and the unsplit continuum on R.
class TwoSolitonBasis final : public ModeBasis {
 public:
  TwoSolitonBasis(const TwoSolitonParams& p, Parity parity);

  Parity parity() const override { return parity_; }
  std::size_t bound_count() const override { return parity_ == Parity::Full ? 2 : 1; }
  double floquet_exponent() const override { return params_.floquet_exponent(); }
  double period() const override { return params_.period(); }
  const TwoSolitonParams& params() const { return params_; }

  cplx bound(std::size_t k, double x, double t) const override;
  cplx continuum(double x, double t, double lambda) const override;
  ModeTable tabulate(const std::vector<double>& xs, double t,
                     const std::vector<double>& lambdas) const override;

 private:
  TwoSolitonParams params_;
  Parity parity_;
};

/// General discrete data; bound states are the Gram-Schmidt orthonormalization
/// of a(.,t,lambda_k^*) in the listed order.
class DressingBasis final : public ModeBasis {
 public:
  explicit DressingBasis(DiscreteData data, DressingOptions opts = {});

  Parity parity() const override { return Parity::Full; }
  std::size_t bound_count() const override { return data_.M(); }
  double floquet_exponent() const override;
  double period() const override { return period_; }
  const DiscreteData& data() const { return data_; }

  cplx bound(std::size_t k, double x, double t) const override;
  cplx continuum(double x, double t, double lambda) const override;
  ModeTable tabulate(const std::vector<double>& xs, double t,
                     const std::vector<double>& lambdas) const override;

  /// Lower-triangular map from a(.,t,lambda_j^*) to the orthonormal states.
  const Eigen::MatrixXcd& gram_schmidt() const { return coeffs_; }

 private:
  DiscreteData data_;
  DressingOptions opts_;
  Eigen::MatrixXcd coeffs_;
  double period_ = 0.0;
  bool periodic_ = false;
};

// Pointwise evaluators.

/// (pi prod |lambda - lambda_k|^2)^{-1/2} a(x,t,lambda), lambda real.
cplx psi_d(const DiscreteData& data, double x, double t, double lambda,
           const DressingOptions& opts = {});
/// Even or odd bound state of the two-soliton family.
cplx psi_b_parity(const TwoSolitonParams& p, Parity parity, double x, double t);
/// Even or odd continuum mode, lambda >= 0.
cplx psi_d_parity(const TwoSolitonParams& p, Parity parity, double x, double t, double lambda);

/// Orthonormal bound states sampled on a grid.
std::vector<std::vector<cplx>> bound_basis(const DiscreteData& data, const SpatialGrid& grid, double t,
                                           const DressingOptions& opts = {});

/// Default continuum cutoff max(4 rho_max, 1.5 sqrt(sigma_max)).
double default_lambda_max(const TwoSolitonParams& p, double sigma_max = 0.0);

ModeAmplitudes analyze(const WaveField& f, const ModeBasis& basis, const SpectralGrid& spectral,
                       TimeConvention convention = TimeConvention::Raw);
/// Same, from a precomputed table on f's grid points.
ModeAmplitudes analyze(const WaveField& f, const ModeTable& table, const ModeBasis& basis,
                       const SpectralGrid& spectral, TimeConvention convention = TimeConvention::Raw);

WaveField synthesize(const ModeAmplitudes& amps, const ModeBasis& basis, const SpatialGrid& grid);
WaveField synthesize(const ModeAmplitudes& amps, const ModeTable& table, const ModeBasis& basis,
                     const SpatialGrid& grid);

/// Diagonal evolution of Floquet amplitudes by dt.
ModeAmplitudes propagate_free(const ModeAmplitudes& amps, double dt, double floquet_exponent);

struct DecayProbeOptions {
  double lambda_max = 0.0;     // 0: chosen from the basis
  double phase_per_panel = 12.0;
  std::size_t nodes_per_panel = 16;
  double tail_tolerance = 1e-8;
};

struct DecayProbeResult {
  std::vector<double> times;
  std::vector<double> weighted_norms;
  std::size_t spectral_nodes = 0;
  double tail_fraction = 0.0;  // outermost panel's share of the field norm
};

/// ||<x>^{-sigma} e^{-itB} P_c f|| at each time, the continuum part synthesized
/// on f's grid by direct quadrature over lambda.
DecayProbeResult local_decay_probe(const WaveField& f, const ModeBasis& basis, double sigma,
                                   const std::vector<double>& times, const DecayProbeOptions& opts = {});

struct PowerLawFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double exponent_stderr = 0.0;
};

/// Least squares of log y against log t over samples with t in [t_lo, t_hi].
PowerLawFit fit_power_law(const std::vector<double>& t, const std::vector<double>& y, double t_lo,
                          double t_hi);

}  // namespace breather
