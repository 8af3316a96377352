#include "breather/spectral_basis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "breather/error.hpp"
#include "breather/two_soliton.hpp"

namespace breather {
namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

// Two-soliton bound states from the closed-form fields at x >= 0.
struct BoundPair {
  cplx even;
  cplx odd;
};

BoundPair two_soliton_bound_at(const TwoSolitonParams& p, double u, double t) {
  const TwoSolitonFields f = two_soliton_fields(p, u, t);
  const cplx a1 = two_soliton_a(f, u, t, cplx(0.0, -p.rho1));
  const cplx a2 = two_soliton_a(f, u, t, cplx(0.0, -p.rho2));
  const double c = 1.0 / std::sqrt(4.0 * p.s());
  const double w1 = 2.0 / (p.rho1 - p.rho2);
  const double w2 = 2.0 / (p.rho2 - p.rho1);
  BoundPair b;
  b.even = c * (w1 * a1 + w2 * a2);
  b.odd = c * (std::sqrt(p.rho2 / p.rho1) * w1 * a1 + std::sqrt(p.rho1 / p.rho2) * w2 * a2);
  return b;
}

// (lambda^2 +- a1 lambda + a0) e^{-+2i lambda x}, both signs, without the
// e^{-2i lambda^2 t} factor.
struct SplitA {
  cplx plus;   // a(x, lambda)
  cplx minus;  // a(x, -lambda) = a(-x, lambda)
};

SplitA split_a(const TwoSolitonFields& f, double x, double lambda) {
  const double l2 = lambda * lambda;
  const cplx e = std::polar(1.0, -2.0 * lambda * x);
  return {(l2 + f.a1 * lambda + f.a0) * e, (l2 - f.a1 * lambda + f.a0) * std::conj(e)};
}

double continuum_norm_two_soliton(const TwoSolitonParams& p, double lambda, double factor) {
  return 1.0 / std::sqrt(factor * kPi * (lambda * lambda + p.rho1 * p.rho1) *
                         (lambda * lambda + p.rho2 * p.rho2));
}

bool self_mirror(double x, double x_scale) { return std::abs(x) <= 1e-14 * x_scale; }

void check_basis_parity(const ModeBasis& basis, const SpectralGrid& spectral) {
  if (basis.parity() != spectral.parity)
    throw GridMismatch("spectral grid parity " + to_string(spectral.parity) +
                       " does not match basis parity " + to_string(basis.parity()));
}

}  // namespace

double ModeAmplitudes::parseval() const {
  double acc = 0.0;
  for (const cplx& b : bound) acc += std::norm(b);
  for (std::size_t j = 0; j < continuum.size(); ++j) acc += spectral.weights[j] * std::norm(continuum[j]);
  return acc;
}

ModeTable ModeBasis::tabulate(const std::vector<double>& xs, double t,
                              const std::vector<double>& lambdas) const {
  ModeTable table;
  table.xs = xs;
  table.time = t;
  table.bound.assign(bound_count(), std::vector<cplx>(xs.size()));
  table.continuum.resize(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(lambdas.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t k = 0; k < bound_count(); ++k) table.bound[k][i] = bound(k, xs[i], t);
    for (std::size_t j = 0; j < lambdas.size(); ++j)
      table.continuum(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = continuum(xs[i], t, lambdas[j]);
  }
  return table;
}

// ---------------------------------------------------------------------------

TwoSolitonBasis::TwoSolitonBasis(const TwoSolitonParams& p, Parity parity) : params_(p), parity_(parity) {
  params_.validate();
}

cplx psi_b_parity(const TwoSolitonParams& p, Parity parity, double x, double t) {
  if (parity == Parity::Full) throw InvalidArgument("psi_b_parity needs even or odd parity");
  const BoundPair b = two_soliton_bound_at(p, std::abs(x), t);
  if (parity == Parity::Even) return b.even;
  if (x == 0.0) return 0.0;
  return x < 0.0 ? -b.odd : b.odd;
}

cplx psi_d_parity(const TwoSolitonParams& p, Parity parity, double x, double t, double lambda) {
  if (parity == Parity::Full) throw InvalidArgument("psi_d_parity needs even or odd parity");
  if (lambda < 0.0) throw InvalidArgument("parity continuum modes are indexed by lambda >= 0");
  const double u = std::abs(x);
  const SplitA a = split_a(two_soliton_fields(p, u, t), u, lambda);
  const cplx sum = parity == Parity::Even ? a.plus + a.minus : a.plus - a.minus;
  const cplx v = sum * std::polar(1.0, -2.0 * lambda * lambda * t) * continuum_norm_two_soliton(p, lambda, 2.0);
  if (parity == Parity::Odd) {
    if (x == 0.0) return 0.0;
    return x < 0.0 ? -v : v;
  }
  return v;
}

cplx TwoSolitonBasis::bound(std::size_t k, double x, double t) const {
  if (k >= bound_count()) throw InvalidArgument("bound state index out of range");
  if (parity_ == Parity::Full) return psi_b_parity(params_, k == 0 ? Parity::Even : Parity::Odd, x, t);
  return psi_b_parity(params_, parity_, x, t);
}

cplx TwoSolitonBasis::continuum(double x, double t, double lambda) const {
  if (parity_ != Parity::Full) return psi_d_parity(params_, parity_, x, t, lambda);
  const TwoSolitonFields f = two_soliton_fields(params_, x, t);
  return two_soliton_a(f, x, t, lambda) * continuum_norm_two_soliton(params_, lambda, 1.0);
}

ModeTable TwoSolitonBasis::tabulate(const std::vector<double>& xs, double t,
                                    const std::vector<double>& lambdas) const {
  const std::size_t nx = xs.size(), nl = lambdas.size();
  ModeTable table;
  table.xs = xs;
  table.time = t;
  table.bound.assign(bound_count(), std::vector<cplx>(nx));
  table.continuum.resize(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(nl));

  std::vector<cplx> time_phase(nl);
  std::vector<double> norm(nl);
  const double factor = parity_ == Parity::Full ? 1.0 : 2.0;
  for (std::size_t j = 0; j < nl; ++j) {
    time_phase[j] = std::polar(1.0, -2.0 * lambdas[j] * lambdas[j] * t);
    norm[j] = continuum_norm_two_soliton(params_, lambdas[j], factor);
  }
  double x_scale = 1.0;
  for (double x : xs) x_scale = std::max(x_scale, std::abs(x));

  for (std::size_t i = 0; i < nx; ++i) {
    const double x = xs[i];
    const double u = std::abs(x);
    const double sgn = x < 0.0 ? -1.0 : 1.0;
    const bool on_axis = self_mirror(x, x_scale);
    const BoundPair b = two_soliton_bound_at(params_, u, t);
    const cplx odd_b = on_axis ? cplx(0.0) : sgn * b.odd;
    if (parity_ == Parity::Even) table.bound[0][i] = b.even;
    if (parity_ == Parity::Odd) table.bound[0][i] = odd_b;
    if (parity_ == Parity::Full) {
      table.bound[0][i] = b.even;
      table.bound[1][i] = odd_b;
    }

    const TwoSolitonFields f = two_soliton_fields(params_, u, t);
    for (std::size_t j = 0; j < nl; ++j) {
      cplx v;
      if (parity_ == Parity::Full) {
        // a(x,lambda) = a(|x|, sgn*lambda)
        const SplitA a = split_a(f, u, std::abs(lambdas[j]));
        const bool flip = (x < 0.0) != (lambdas[j] < 0.0);
        v = flip ? a.minus : a.plus;
      } else {
        const SplitA a = split_a(f, u, lambdas[j]);
        if (parity_ == Parity::Even)
          v = a.plus + a.minus;
        else
          v = on_axis ? cplx(0.0) : sgn * (a.plus - a.minus);
      }
      table.continuum(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v * time_phase[j] * norm[j];
    }
  }
  return table;
}

// ---------------------------------------------------------------------------

cplx psi_d(const DiscreteData& data, double x, double t, double lambda, const DressingOptions& opts) {
  double prod = kPi;
  for (const cplx& lk : data.lambdas) prod *= std::norm(lambda - lk);
  return eval_a(data, x, t, lambda, opts) / std::sqrt(prod);
}

DressingBasis::DressingBasis(DiscreteData data, DressingOptions opts) : data_(std::move(data)), opts_(opts) {
  data_.validate();
  try {
    const PeriodReport rep = check_commensurate(data_);
    periodic_ = rep.kind != TimeDependence::Quasiperiodic;
    period_ = rep.period;
  } catch (const NotImaginarySpectrum&) {
    periodic_ = false;
  }

  // Gram matrix of the unnormalized bound solutions a(.,t,lambda_k^*).  It is
  // conserved in t, so it is computed once at t = 0 on a fine trapezoid grid.
  double rho_min = INFINITY, rho_max = 0.0, shift = 0.0;
  for (const cplx& l : data_.lambdas) {
    rho_min = std::min(rho_min, l.imag());
    rho_max = std::max(rho_max, l.imag());
    shift = std::max(shift, std::abs(l.real()));
  }
  const double half_width = 40.0 / rho_min;
  const double h = 0.05 / std::max(rho_max, shift);
  const auto n = static_cast<std::size_t>(std::ceil(2.0 * half_width / h));
  const std::size_t M = data_.M();
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  std::vector<cplx> vals(M);
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = -half_width + static_cast<double>(i) * h;
    const CoefficientSolution sol = solve_dressing(data_, x, 0.0, opts_);
    for (std::size_t k = 0; k < M; ++k) vals[k] = eval_a(data_, sol, std::conj(data_.lambdas[k]));
    for (std::size_t a = 0; a < M; ++a)
      for (std::size_t b = 0; b < M; ++b)
        gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += std::conj(vals[a]) * vals[b] * h;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > opts_.condition_ceiling) {
    std::ostringstream msg;
    msg << "bound-state Gram matrix has condition " << (lo > 0.0 ? hi / lo : INFINITY);
    throw RankDeficient(msg.str());
  }
  // Gram = R^H R with R upper triangular; orthonormal states are a R^{-1}.
  Eigen::LLT<Eigen::MatrixXcd> llt(gram);
  const Eigen::MatrixXcd R = llt.matrixU();
  coeffs_ = R.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M)));
}

double DressingBasis::floquet_exponent() const {
  if (!periodic_)
    throw NotImaginarySpectrum("bound states have no common Floquet exponent for these data");
  const double r = data_.lambdas[0].imag();
  return r * r;
}

cplx DressingBasis::bound(std::size_t k, double x, double t) const {
  if (k >= data_.M()) throw InvalidArgument("bound state index out of range");
  const CoefficientSolution sol = solve_dressing(data_, x, t, opts_);
  cplx acc = 0.0;
  for (std::size_t j = 0; j <= k; ++j)
    acc += coeffs_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) *
           eval_a(data_, sol, std::conj(data_.lambdas[j]));
  return acc;
}

cplx DressingBasis::continuum(double x, double t, double lambda) const {
  return psi_d(data_, x, t, lambda, opts_);
}

ModeTable DressingBasis::tabulate(const std::vector<double>& xs, double t,
                                  const std::vector<double>& lambdas) const {
  const std::size_t M = data_.M();
  ModeTable table;
  table.xs = xs;
  table.time = t;
  table.bound.assign(M, std::vector<cplx>(xs.size()));
  table.continuum.resize(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(lambdas.size()));
  std::vector<double> norm(lambdas.size());
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    double prod = kPi;
    for (const cplx& lk : data_.lambdas) prod *= std::norm(lambdas[j] - lk);
    norm[j] = 1.0 / std::sqrt(prod);
  }
  std::vector<cplx> raw(M);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const CoefficientSolution sol = solve_dressing(data_, xs[i], t, opts_);
    for (std::size_t k = 0; k < M; ++k) raw[k] = eval_a(data_, sol, std::conj(data_.lambdas[k]));
    for (std::size_t k = 0; k < M; ++k) {
      cplx acc = 0.0;
      for (std::size_t j = 0; j <= k; ++j)
        acc += coeffs_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * raw[j];
      table.bound[k][i] = acc;
    }
    for (std::size_t j = 0; j < lambdas.size(); ++j)
      table.continuum(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          eval_a(data_, sol, lambdas[j]) * norm[j];
  }
  return table;
}

std::vector<std::vector<cplx>> bound_basis(const DiscreteData& data, const SpatialGrid& grid, double t,
                                           const DressingOptions& opts) {
  grid.validate();
  const DressingBasis basis(data, opts);
  return basis.tabulate(grid.points(), t, {}).bound;
}

double default_lambda_max(const TwoSolitonParams& p, double sigma_max) {
  return std::max(4.0 * p.rho2, 1.5 * std::sqrt(std::max(sigma_max, 0.0)));
}

// ---------------------------------------------------------------------------

ModeAmplitudes analyze(const WaveField& f, const ModeBasis& basis, const SpectralGrid& spectral,
                       TimeConvention convention) {
  f.grid.validate();
  return analyze(f, basis.tabulate(f.grid.points(), f.time, spectral.nodes), basis, spectral, convention);
}

ModeAmplitudes analyze(const WaveField& f, const ModeTable& table, const ModeBasis& basis,
                       const SpectralGrid& spectral, TimeConvention convention) {
  check_basis_parity(basis, spectral);
  if (f.samples.size() != f.grid.n_points || table.xs.size() != f.grid.n_points ||
      static_cast<std::size_t>(table.continuum.cols()) != spectral.size())
    throw GridMismatch("field, mode table and spectral grid sizes disagree");
  if (basis.parity() != Parity::Full && !f.grid.symmetric())
    throw GridMismatch("parity analysis needs a grid symmetric about 0");

  const double dx = f.grid.dx();
  ModeAmplitudes amps;
  amps.parity = basis.parity();
  amps.spectral = spectral;
  amps.time = f.time;
  amps.convention = convention;
  amps.bound.resize(table.bound.size());
  for (std::size_t k = 0; k < table.bound.size(); ++k) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < f.samples.size(); ++i) acc += std::conj(table.bound[k][i]) * f.samples[i];
    amps.bound[k] = acc * dx;
  }
  const Eigen::Map<const Eigen::VectorXcd> fv(f.samples.data(), static_cast<Eigen::Index>(f.samples.size()));
  const Eigen::VectorXcd c = (table.continuum.adjoint() * fv) * dx;
  amps.continuum.assign(c.data(), c.data() + c.size());

  if (convention == TimeConvention::Floquet) {
    const double beta = basis.floquet_exponent();
    for (cplx& b : amps.bound) b *= std::polar(1.0, 2.0 * beta * f.time);
    for (std::size_t j = 0; j < spectral.size(); ++j)
      amps.continuum[j] *= std::polar(1.0, -2.0 * spectral.nodes[j] * spectral.nodes[j] * f.time);
  }
  return amps;
}

WaveField synthesize(const ModeAmplitudes& amps, const ModeBasis& basis, const SpatialGrid& grid) {
  grid.validate();
  return synthesize(amps, basis.tabulate(grid.points(), amps.time, amps.spectral.nodes), basis, grid);
}

WaveField synthesize(const ModeAmplitudes& amps, const ModeTable& table, const ModeBasis& basis,
                     const SpatialGrid& grid) {
  check_basis_parity(basis, amps.spectral);
  if (table.xs.size() != grid.n_points || amps.bound.size() != table.bound.size() ||
      amps.continuum.size() != amps.spectral.size() ||
      static_cast<std::size_t>(table.continuum.cols()) != amps.spectral.size())
    throw GridMismatch("amplitudes and mode table sizes disagree");

  std::vector<cplx> bound = amps.bound;
  Eigen::VectorXcd cont(static_cast<Eigen::Index>(amps.continuum.size()));
  for (std::size_t j = 0; j < amps.continuum.size(); ++j) {
    cplx c = amps.continuum[j] * amps.spectral.weights[j];
    if (amps.convention == TimeConvention::Floquet)
      c *= std::polar(1.0, 2.0 * amps.spectral.nodes[j] * amps.spectral.nodes[j] * amps.time);
    cont(static_cast<Eigen::Index>(j)) = c;
  }
  if (amps.convention == TimeConvention::Floquet) {
    const double beta = basis.floquet_exponent();
    for (cplx& b : bound) b *= std::polar(1.0, -2.0 * beta * amps.time);
  }

  WaveField out;
  out.grid = grid;
  out.time = amps.time;
  const Eigen::VectorXcd v = table.continuum * cont;
  out.samples.assign(v.data(), v.data() + v.size());
  for (std::size_t k = 0; k < bound.size(); ++k)
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += bound[k] * table.bound[k][i];
  return out;
}

ModeAmplitudes propagate_free(const ModeAmplitudes& amps, double dt, double floquet_exponent) {
  if (amps.convention != TimeConvention::Floquet)
    throw InvalidArgument("propagate_free works on Floquet amplitudes");
  ModeAmplitudes out = amps;
  const cplx bphase = std::polar(1.0, 2.0 * floquet_exponent * dt);
  for (cplx& b : out.bound) b *= bphase;
  for (std::size_t j = 0; j < out.continuum.size(); ++j)
    out.continuum[j] *= std::polar(1.0, -2.0 * out.spectral.nodes[j] * out.spectral.nodes[j] * dt);
  return out;
}

// ---------------------------------------------------------------------------

DecayProbeResult local_decay_probe(const WaveField& f, const ModeBasis& basis, double sigma,
                                   const std::vector<double>& times, const DecayProbeOptions& opts) {
  f.grid.validate();
  if (times.empty()) throw InvalidArgument("decay probe needs at least one time");
  const double t_max = *std::max_element(times.begin(), times.end());
  double x_extent = std::max(std::abs(f.grid.x_min), std::abs(f.grid.x_max));

  double lambda_max = opts.lambda_max;
  if (lambda_max <= 0.0) {
    // Use the grid's Nyquist scale (k = 2 lambda) as an upper bound.
    lambda_max = 0.5 * kPi / f.grid.dx();
    lambda_max = std::min(lambda_max, 6.0);
  }
  const double lambda_min = basis.parity() == Parity::Full ? -lambda_max : 0.0;

  // Panels sized so the phase of e^{-2i(lambda x + lambda^2 t)} turns by at
  // most phase_per_panel radians across each one.
  std::vector<double> breaks{lambda_min};
  while (breaks.back() < lambda_max) {
    const double l = std::abs(breaks.back());
    const double rate = 2.0 * x_extent + 4.0 * (l + 0.5) * t_max;
    double h = opts.phase_per_panel / rate;
    breaks.push_back(std::min(breaks.back() + h, lambda_max));
  }
  const SpectralGrid spectral = SpectralGrid::from_breaks(basis.parity(), breaks, opts.nodes_per_panel);

  ModeTable table = basis.tabulate(f.grid.points(), 0.0, spectral.nodes);
  WaveField f0 = f;
  f0.time = 0.0;
  ModeAmplitudes amps = analyze(f0, table, basis, spectral, TimeConvention::Floquet);

  DecayProbeResult res;
  res.spectral_nodes = spectral.size();
  {
    double tail = 0.0;
    const std::size_t per = spectral.nodes_per_panel;
    for (std::size_t j = 0; j < spectral.size(); ++j) {
      const double e = spectral.weights[j] * std::norm(amps.continuum[j]);
      const bool last_panel = j + per >= spectral.size() || (basis.parity() == Parity::Full && j < per);
      if (last_panel) tail += e;
    }
    const double f2 = f.norm_squared();
    res.tail_fraction = f2 > 0.0 ? tail / f2 : 0.0;
    if (res.tail_fraction > opts.tail_tolerance) {
      std::ostringstream msg;
      msg << "continuum content in the outermost lambda panel is " << res.tail_fraction
          << " of the field norm (limit " << opts.tail_tolerance << "); raise lambda_max";
      throw InsufficientLambdaResolution(msg.str());
    }
  }
  std::fill(amps.bound.begin(), amps.bound.end(), cplx(0.0));

  std::vector<double> weight(f.grid.n_points);
  for (std::size_t i = 0; i < weight.size(); ++i) {
    const double x = f.grid.x(i);
    weight[i] = std::pow(1.0 + x * x, -sigma);  // <x>^{-2 sigma}
  }
  const double dx = f.grid.dx();
  for (double t : times) {
    const ModeAmplitudes at = propagate_free(amps, t, basis.floquet_exponent());
    Eigen::VectorXcd c(static_cast<Eigen::Index>(spectral.size()));
    for (std::size_t j = 0; j < spectral.size(); ++j) c(static_cast<Eigen::Index>(j)) = at.continuum[j] * spectral.weights[j];
    const Eigen::VectorXcd g = table.continuum * c;
    double acc = 0.0;
    for (std::size_t i = 0; i < weight.size(); ++i) acc += weight[i] * std::norm(g(static_cast<Eigen::Index>(i)));
    res.times.push_back(t);
    res.weighted_norms.push_back(std::sqrt(acc * dx));
  }
  return res;
}

PowerLawFit fit_power_law(const std::vector<double>& t, const std::vector<double>& y, double t_lo,
                          double t_hi) {
  if (t.size() != y.size()) throw InvalidArgument("power-law fit needs equal-length samples");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t_lo && t[i] <= t_hi && t[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(t[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 3) throw InvalidArgument("power-law fit needs at least three usable samples");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.log_prefactor = my - fit.exponent * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - fit.log_prefactor - fit.exponent * lx[i];
    rss += r * r;
  }
  fit.exponent_stderr = std::sqrt(rss / std::max(n - 2.0, 1.0) / sxx);
  return fit;
}

}  // namespace breather
