#include "breather/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "breather/error.hpp"
#include "breather/fft.hpp"
#include "breather/quadrature.hpp"
#include "breather/two_soliton.hpp"

namespace breather {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

void require_split_parity(Parity parity) {
  if (parity == Parity::Full) throw InvalidArgument("coupling is computed per parity sector (even or odd)");
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Runs body(i) for i in [0, n) on a few threads; each i writes only its own slot.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  const std::size_t hw = threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  const std::size_t nt = std::min(hw, n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mutex;
  for (std::size_t w = 0; w < nt; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += nt) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

double relative_change(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

// ---------------------------------------------------------------------------

double detuning_W(const TwoSolitonParams& p, double epsilon, double x, double t) {
  const double stretch = std::sqrt(1.0 + epsilon);
  return (1.0 + epsilon) * two_soliton_potential(p, x / stretch, t) - two_soliton_potential(p, x, t);
}

PerturbationSpec PerturbationSpec::detuning(const TwoSolitonParams& p, double epsilon) {
  PerturbationSpec w;
  w.kind = Kind::Detuning;
  w.potential = p;
  w.epsilon = epsilon;
  w.period = p.period();
  w.validate();
  return w;
}

PerturbationSpec PerturbationSpec::custom(const TwoSolitonParams& p, std::function<double(double, double)> fn) {
  PerturbationSpec w;
  w.kind = Kind::Custom;
  w.potential = p;
  w.sampler = std::move(fn);
  w.period = p.period();
  w.validate();
  return w;
}

double PerturbationSpec::operator()(double x, double t) const {
  if (kind == Kind::Detuning) return epsilon == 0.0 ? 0.0 : detuning_W(potential, epsilon, x, t);
  return sampler(x, t);
}

void PerturbationSpec::validate() const {
  potential.validate();
  if (kind == Kind::Detuning) {
    if (!std::isfinite(epsilon) || epsilon <= -1.0) throw InvalidArgument("detuning needs eps > -1");
    return;
  }
  if (!sampler) throw InvalidArgument("custom perturbation has no sampler");
  const double L = potential.period();
  if (std::abs(period - L) > 1e-12 * L) throw InvalidArgument("perturbation period must match the potential");
  for (double x : {0.3, 1.7, 4.1}) {
    for (double t : {0.0, 0.37 * L}) {
      const double a = sampler(x, t), b = sampler(-x, t), c = sampler(x, t + L);
      const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
      if (std::abs(a - b) > 1e-10 * scale) throw InvalidArgument("perturbation must be even in x");
      if (std::abs(a - c) > 1e-8 * scale) throw InvalidArgument("perturbation must be L-periodic in t");
    }
  }
}

// ---------------------------------------------------------------------------

cplx FourierSeries::evaluate(double t, double period) const {
  cplx acc = 0.0;
  for (long k = -K; k <= K; ++k) acc += (*this)[k] * std::polar(1.0, 2.0 * kPi * static_cast<double>(k) * t / period);
  return acc;
}

namespace {

std::vector<cplx> dft(const std::vector<cplx>& samples) {
  Fft fft(samples.size());
  std::copy(samples.begin(), samples.end(), fft.data());
  fft.forward();
  const double inv = 1.0 / static_cast<double>(samples.size());
  std::vector<cplx> out(fft.data(), fft.data() + samples.size());
  for (cplx& c : out) c *= inv;
  return out;
}

double top_octave_of(const std::vector<cplx>& spectrum) {
  const std::size_t n = spectrum.size();
  double total = 0.0, top = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::norm(spectrum[i]);
    total += e;
    const std::size_t k = std::min(i, n - i);
    if (4 * k > n) top += e;
  }
  return total == 0.0 ? 0.0 : top / total;
}

FourierSeries truncate(const std::vector<cplx>& spectrum, long k_max, bool real_valued) {
  const long n = static_cast<long>(spectrum.size());
  FourierSeries s;
  s.K = k_max;
  s.coeffs.resize(static_cast<std::size_t>(2 * k_max + 1));
  for (long k = -k_max; k <= k_max; ++k) s.coeffs[static_cast<std::size_t>(k + k_max)] = spectrum[static_cast<std::size_t>((k + n) % n)];
  if (real_valued) {
    for (long k = 0; k <= k_max; ++k) {
      const cplx avg = 0.5 * (s[k] + std::conj(s[-k]));
      s.coeffs[static_cast<std::size_t>(k + k_max)] = avg;
      s.coeffs[static_cast<std::size_t>(-k + k_max)] = std::conj(avg);
    }
  }
  return s;
}

void check_sampling(std::size_t n, long k_max) {
  if (k_max < 0) throw InvalidArgument("negative harmonic count");
  if (n < 4 * static_cast<std::size_t>(std::max(k_max, 1L)))
    throw InvalidArgument("need at least 4 K_max time samples");
}

}  // namespace

double top_octave_fraction(const std::vector<cplx>& samples) { return top_octave_of(dft(samples)); }

FourierSeries fourier_coeffs(const std::vector<cplx>& samples, long k_max, const FourierOptions& opts) {
  check_sampling(samples.size(), k_max);
  const std::vector<cplx> spectrum = dft(samples);
  const double frac = top_octave_of(spectrum);
  if (frac > opts.aliasing_threshold) {
    std::ostringstream msg;
    msg << "top octave holds " << frac << " of the energy with " << samples.size() << " samples";
    throw AliasingSuspected(msg.str());
  }
  return truncate(spectrum, k_max, opts.real_valued);
}

// ---------------------------------------------------------------------------

MatrixElementIntegrator::MatrixElementIntegrator(PerturbationSpec W, Parity parity, const CouplingOptions& opts)
    : W_(std::move(W)), basis_(W_.potential, parity), beta_(W_.potential.floquet_exponent()), threads_(opts.threads) {
  require_split_parity(parity);
  W_.validate();
  if (!(opts.dx > 0.0)) throw InvalidArgument("dx must be positive");
  const double extent = opts.x_extent > 0.0 ? opts.x_extent : 7.0 / W_.potential.rho1;
  // The integrand is even in x, so integrate over x >= 0 and double.
  const auto m = static_cast<std::size_t>(std::ceil(extent / opts.dx));
  xs_.resize(m + 1);
  weights_.resize(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    xs_[i] = static_cast<double>(i) * opts.dx;
    weights_[i] = i == 0 ? opts.dx : 2.0 * opts.dx;
  }
}

MatrixElements MatrixElementIntegrator::at(double t, const std::vector<double>& lambdas, bool kernel) const {
  const ModeTable table = basis_.tabulate(xs_, t, lambdas);
  const std::size_t nx = xs_.size();
  Eigen::VectorXcd left(static_cast<Eigen::Index>(nx));
  Eigen::VectorXd w(static_cast<Eigen::Index>(nx));
  MatrixElements out;
  double total = 0.0, tail = 0.0;
  const std::size_t tail_start = nx - std::max<std::size_t>(1, nx / 10);
  for (std::size_t i = 0; i < nx; ++i) {
    const double wi = W_(xs_[i], t);
    w(static_cast<Eigen::Index>(i)) = wi;
    const cplx b = table.bound[0][i];
    left(static_cast<Eigen::Index>(i)) = std::conj(b) * wi * weights_[i];
    out.M += (std::conj(b) * wi * b).real() * weights_[i];
    const double mag = std::abs(b * wi) * weights_[i];
    total += mag;
    if (i >= tail_start) tail += mag;
  }
  out.tail_fraction = total == 0.0 ? 0.0 : tail / total;

  const Eigen::VectorXcd n = table.continuum.transpose() * left;
  out.N.resize(lambdas.size());
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const double l = lambdas[j];
    out.N[j] = n(static_cast<Eigen::Index>(j)) * std::polar(1.0, 2.0 * (l * l + beta_) * t);
  }
  if (kernel) {
    Eigen::VectorXd wq(static_cast<Eigen::Index>(nx));
    for (std::size_t i = 0; i < nx; ++i) wq(static_cast<Eigen::Index>(i)) = w(static_cast<Eigen::Index>(i)) * weights_[i];
    Eigen::MatrixXcd Kt = table.continuum.adjoint() * wq.asDiagonal() * table.continuum;
    for (Eigen::Index a = 0; a < Kt.rows(); ++a)
      for (Eigen::Index b = 0; b < Kt.cols(); ++b) {
        const double eta = lambdas[static_cast<std::size_t>(a)], l = lambdas[static_cast<std::size_t>(b)];
        Kt(a, b) *= std::polar(1.0, 2.0 * (l * l - eta * eta) * t);
      }
    out.K = std::move(Kt);
  }
  return out;
}

cplx MatrixElementIntegrator::N(double t, double lambda) const { return at(t, {lambda}).N[0]; }

double MatrixElementIntegrator::continuum_coupling_norm(double t) const {
  double wpsi2 = 0.0, M = 0.0;
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    const cplx b = basis_.bound(0, xs_[i], t);
    const double wi = W_(xs_[i], t);
    wpsi2 += std::norm(wi * b) * weights_[i];
    M += std::norm(b) * wi * weights_[i];
  }
  return wpsi2 - M * M;
}

MatrixElements matrix_elements(const PerturbationSpec& W, Parity parity, double t, const SpectralGrid& spectral,
                               bool kernel, const CouplingOptions& opts) {
  if (spectral.parity != parity) throw GridMismatch("spectral grid parity does not match");
  const MatrixElementIntegrator integ(W, parity, opts);
  return integ.at(t, spectral.nodes, kernel);
}

// ---------------------------------------------------------------------------

double resonance_sigma(long n, double period, double beta) {
  const double s = kPi * static_cast<double>(n) / period - beta;
  return std::abs(s) < 1e-12 * std::max(1.0, beta) ? 0.0 : s;
}

long first_resonance(double period, double beta) {
  long n = static_cast<long>(std::floor(beta * period / kPi)) - 1;
  while (resonance_sigma(n, period, beta) <= 0.0) ++n;
  return n;
}

namespace {

// Samples of N(t_j, lambda) at t_j = j L / nt for the given lambdas, plus M(t_j).
struct TimeSamples {
  std::vector<double> M;
  std::vector<std::vector<cplx>> N;  // [lambda][t]
  double tail = 0.0;
};

TimeSamples sample_period(const MatrixElementIntegrator& integ, const std::vector<double>& lambdas, std::size_t nt,
                          double period) {
  std::vector<MatrixElements> per_t(nt);
  parallel_for(nt, integ.threads(), [&](std::size_t j) { per_t[j] = integ.at(period * static_cast<double>(j) / static_cast<double>(nt), lambdas); });
  TimeSamples s;
  s.M.resize(nt);
  s.N.assign(lambdas.size(), std::vector<cplx>(nt));
  for (std::size_t j = 0; j < nt; ++j) {
    s.M[j] = per_t[j].M;
    s.tail = std::max(s.tail, per_t[j].tail_fraction);
    for (std::size_t l = 0; l < lambdas.size(); ++l) s.N[l][j] = per_t[j].N[l];
  }
  return s;
}

double aggregate_top_octave(const std::vector<std::vector<cplx>>& rows) {
  double total = 0.0, top = 0.0;
  for (const auto& r : rows) {
    const std::vector<cplx> power = dft(r);
    const std::size_t n = power.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::norm(power[i]);
      total += e;
      if (4 * std::min(i, n - i) > n) top += e;
    }
  }
  return total == 0.0 ? 0.0 : top / total;
}

// n-th Fourier coefficient of N(., lambda) by adaptive Gauss-Kronrod in t.
cplx coefficient_by_quadrature(const MatrixElementIntegrator& integ, double lambda, long n, double period) {
  const auto f = [&](double t) {
    return integ.N(t, lambda) * std::polar(1.0, -2.0 * kPi * static_cast<double>(n) * t / period);
  };
  // Bisect down to pieces holding about one oscillation of the harmonic.
  const long pieces = std::max(1L, std::abs(n) / 2);
  cplx acc = 0.0;
  for (long q = 0; q < pieces; ++q) {
    const double a = period * static_cast<double>(q) / static_cast<double>(pieces);
    const double b = period * static_cast<double>(q + 1) / static_cast<double>(pieces);
    acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 6, 1e-12);
  }
  return acc / period;
}

struct ResonanceSamples {
  long k_max = 0;
  std::size_t nt = 0;
  std::vector<long> n;
  std::vector<double> lambda;
  TimeSamples samples;
};

// Samples the resonant lambdas, growing the sample count until the spectrum
// is resolved and the harmonic range until the last resonance is negligible.
ResonanceSamples sample_resonances(const MatrixElementIntegrator& integ, const CouplingOptions& opts) {
  const TwoSolitonParams& p = integ.perturbation().potential;
  const double L = p.period();
  const double beta = p.floquet_exponent();
  const long n0 = std::max(first_resonance(L, beta), 1L);

  ResonanceSamples r;
  r.k_max = std::max(4L, opts.k_max);
  for (;;) {
    r.n.clear();
    r.lambda.clear();
    for (long n = n0; n <= r.k_max; ++n) {
      r.n.push_back(n);
      r.lambda.push_back(std::sqrt(resonance_sigma(n, L, beta)));
    }
    r.nt = opts.time_samples > 0 ? opts.time_samples
                                 : next_pow2(std::max<std::size_t>(64, 4 * static_cast<std::size_t>(r.k_max)));
    check_sampling(r.nt, r.k_max);
    for (;;) {
      r.samples = sample_period(integ, r.lambda, r.nt, L);
      std::vector<std::vector<cplx>> rows = r.samples.N;
      rows.emplace_back(r.samples.M.begin(), r.samples.M.end());
      const double frac = aggregate_top_octave(rows);
      if (frac <= opts.aliasing_threshold) break;
      if (opts.time_samples > 0 || r.nt >= 8192) {
        std::ostringstream msg;
        msg << "top octave holds " << frac << " of the energy with " << r.nt << " samples";
        throw AliasingSuspected(msg.str());
      }
      r.nt *= 2;
    }
    if (r.samples.tail > opts.tail_tolerance) {
      std::ostringstream msg;
      msg << "spatial integrand tail fraction " << r.samples.tail << " exceeds " << opts.tail_tolerance;
      throw QuadratureDivergence(msg.str());
    }
    if (opts.time_samples > 0 || r.k_max >= 1024) return r;
    double gamma = 0.0, last = 0.0;
    for (std::size_t q = 0; q < r.n.size(); ++q) {
      const cplx coef = dft(r.samples.N[q])[static_cast<std::size_t>(r.n[q])];
      last = r.lambda[q] > 0.0 ? std::norm(coef) / r.lambda[q] : 0.0;
      gamma += last;
    }
    if (gamma == 0.0 || last < opts.harmonic_cutoff * gamma) return r;
    r.k_max *= 2;
  }
}

}  // namespace

CouplingData compute_coupling(const PerturbationSpec& W, Parity parity, const CouplingOptions& opts) {
  require_split_parity(parity);
  const MatrixElementIntegrator integ(W, parity, opts);
  const TwoSolitonParams& p = W.potential;
  const double L = p.period();
  const double beta = p.floquet_exponent();

  const ResonanceSamples rs = sample_resonances(integ, opts);
  const long k_max = rs.k_max;
  const std::size_t nt = rs.nt;

  CouplingData c;
  c.parity = parity;
  c.period = L;
  c.beta = beta;
  c.sigma_floor = opts.sigma_floor;
  c.drop_zero_resonance = opts.drop_zero_resonance;
  c.time_samples = nt;
  c.spatial_tail = rs.samples.tail;
  for (long n = -k_max; n <= k_max; ++n)
    if (std::abs(resonance_sigma(n, L, beta)) < opts.sigma_floor) c.near_zero.push_back(n);
  c.fourier_M = truncate(dft(std::vector<cplx>(rs.samples.M.begin(), rs.samples.M.end())), k_max, true);

  double gamma = 0.0;
  for (std::size_t r = 0; r < rs.n.size(); ++r) {
    Resonance res;
    res.n = rs.n[r];
    res.sigma = resonance_sigma(res.n, L, beta);
    res.lambda = rs.lambda[r];
    res.coefficient = dft(rs.samples.N[r])[static_cast<std::size_t>(res.n)];
    res.contribution = res.sigma > 0.0 ? 0.25 * kPi * std::norm(res.coefficient) / res.lambda : 0.0;
    gamma += res.contribution;
    c.resonances.push_back(res);
  }
  // Drop the trailing resonances that no longer matter.
  std::size_t keep = c.resonances.size();
  while (keep > 1 && c.resonances[keep - 1].contribution < opts.truncation * gamma) --keep;
  c.resonances.resize(keep);

  if (opts.run_oracle) {
    std::vector<std::size_t> todo;
    for (std::size_t r = 0; r < c.resonances.size(); ++r)
      if (c.resonances[r].contribution > 1e-10 * gamma) todo.push_back(r);
    parallel_for(todo.size(), opts.threads, [&](std::size_t q) {
      Resonance& res = c.resonances[todo[q]];
      res.oracle = coefficient_by_quadrature(integ, res.lambda, res.n, L);
      const double scale = std::max(std::abs(res.coefficient), std::abs(res.oracle));
      res.oracle_error = scale == 0.0 ? 0.0 : std::abs(res.coefficient - res.oracle) / scale;
      res.oracle_checked = true;
    });
    for (const Resonance& res : c.resonances)
      if (res.oracle_checked) c.max_oracle_error = std::max(c.max_oracle_error, res.oracle_error);
    if (c.max_oracle_error > opts.oracle_tolerance) {
      std::ostringstream msg;
      msg << "sampled and adaptive Fourier coefficients differ by " << c.max_oracle_error;
      throw ConvergenceFailure(msg.str());
    }
  }

  // Spectral grid with the retained resonant lambdas as panel breaks.
  const double sigma_top = c.resonances.empty() ? 0.0 : c.resonances.back().sigma;
  const double lmax = opts.lambda_max > 0.0 ? opts.lambda_max : default_lambda_max(p, sigma_top);
  std::vector<double> breaks;
  for (std::size_t i = 0; i <= opts.panels; ++i)
    breaks.push_back(lmax * static_cast<double>(i) / static_cast<double>(opts.panels));
  const double min_gap = 0.05 * lmax / static_cast<double>(opts.panels);
  for (const Resonance& res : c.resonances) {
    if (res.lambda <= 0.0 || res.lambda >= lmax) continue;
    auto it = std::lower_bound(breaks.begin(), breaks.end(), res.lambda);
    // Move a nearby uniform break onto the resonance instead of making a sliver.
    if (*it - res.lambda < min_gap && it != breaks.end() - 1)
      *it = res.lambda;
    else if (res.lambda - *(it - 1) < min_gap && it - 1 != breaks.begin())
      *(it - 1) = res.lambda;
    else
      breaks.insert(it, res.lambda);
  }
  c.spectral = SpectralGrid::from_breaks(parity, breaks, opts.nodes_per_panel);

  const TimeSamples gs = sample_period(integ, c.spectral.nodes, nt, L);
  c.fourier_N.reserve(c.spectral.size());
  c.N_initial.resize(c.spectral.size());
  for (std::size_t j = 0; j < c.spectral.size(); ++j) {
    c.fourier_N.push_back(truncate(dft(gs.N[j]), k_max, false));
    c.N_initial[j] = gs.N[j][0];
  }

  if (opts.compute_kernel) {
    const std::size_t nl = c.spectral.size();
    std::vector<Eigen::MatrixXcd> ks(nt);
    parallel_for(nt, opts.threads, [&](std::size_t j) {
      ks[j] = *integ.at(L * static_cast<double>(j) / static_cast<double>(nt), c.spectral.nodes, true).K;
    });
    c.fourier_K.reserve(nl * nl);
    std::vector<cplx> row(nt);
    for (std::size_t a = 0; a < nl; ++a)
      for (std::size_t b = 0; b < nl; ++b) {
        for (std::size_t j = 0; j < nt; ++j) row[j] = ks[j](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        c.fourier_K.push_back(truncate(dft(row), k_max, false));
      }
  }
  return c;
}

// ---------------------------------------------------------------------------

namespace {

void check_zero_resonance(const CouplingData& c) {
  if (c.parity == Parity::Even && !c.near_zero.empty() && !c.drop_zero_resonance) {
    std::ostringstream msg;
    msg << "sigma_" << c.near_zero.front() << " = " << resonance_sigma(c.near_zero.front(), c.period, c.beta)
        << " is within " << c.sigma_floor << " of zero in the even sector";
    throw NearZeroResonance(msg.str());
  }
}

bool dropped(const CouplingData& c, long n) {
  return c.drop_zero_resonance && std::find(c.near_zero.begin(), c.near_zero.end(), n) != c.near_zero.end();
}

}  // namespace

double golden_rule(const CouplingData& c) {
  check_zero_resonance(c);
  double g = 0.0;
  for (const Resonance& r : c.resonances)
    if (!dropped(c, r.n)) g += r.contribution;
  return g;
}

double lamb_shift(const CouplingData& c) {
  check_zero_resonance(c);
  const SpectralGrid& sg = c.spectral;
  const double lmax = sg.breaks.back();
  const long K = c.fourier_N.empty() ? 0 : c.fourier_N.front().K;
  double total = 0.0;
  for (long n = -K; n <= K; ++n) {
    if (dropped(c, n)) continue;
    const double sigma = resonance_sigma(n, c.period, c.beta);
    const double ln = sigma > 0.0 ? std::sqrt(sigma) : 0.0;
    const bool singular = sigma > 0.0 && ln < lmax;
    // In lambda: |N_n|^2 / (2 (lambda^2 - sigma_n)).
    if (!singular) {
      double acc = 0.0;
      for (std::size_t j = 0; j < sg.size(); ++j) {
        const double l = sg.nodes[j];
        const double den = l * l - sigma;
        if (den == 0.0) continue;
        acc += sg.weights[j] * std::norm(c.fourier_N[j][n]) / (2.0 * den);
      }
      total += acc;
      continue;
    }
    // G(lambda) = |N_n|^2 / (2 (lambda + lambda_n)); subtract G(lambda_n) at the pole.
    const Resonance* res = nullptr;
    for (const Resonance& r : c.resonances)
      if (r.n == n) res = &r;
    double g_n;
    if (res) {
      g_n = std::norm(res->coefficient) / (4.0 * ln);
    } else {
      // Not retained: interpolate from the grid.
      const PanelInterpolator interp(sg.breaks, sg.nodes_per_panel);
      const auto st = interp.stencil(ln);
      cplx v = 0.0;
      for (std::size_t q = 0; q < st.coeff.size(); ++q) v += st.coeff[q] * c.fourier_N[st.first + q][n];
      g_n = std::norm(v) / (4.0 * ln);
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < sg.size(); ++j) {
      const double l = sg.nodes[j];
      const double g = std::norm(c.fourier_N[j][n]) / (2.0 * (l + ln));
      acc += sg.weights[j] * (g - g_n) / (l - ln);
    }
    acc += g_n * std::log((lmax - ln) / ln);
    total += acc;
  }
  return total;
}

double small_time_coefficient(const CouplingData& c) {
  double acc = 0.0;
  for (std::size_t j = 0; j < c.spectral.size(); ++j) acc += c.spectral.weights[j] * std::norm(c.N_initial[j]);
  return acc;
}

DecayPrediction predict(const CouplingData& c) {
  DecayPrediction d;
  d.parity = c.parity;
  d.period = c.period;
  d.beta = c.beta;
  d.Mbar = c.fourier_M[0].real();
  d.Gamma = golden_rule(c);
  d.Lambda = lamb_shift(c);
  d.n0 = first_resonance(c.period, c.beta);
  d.resonances = c.resonances;
  if (c.drop_zero_resonance) d.dropped = c.near_zero;
  d.small_time_C = small_time_coefficient(c);
  d.fourier_M = c.fourier_M;
  return d;
}

double integrated_M(const FourierSeries& M, double period, double t) {
  double acc = M[0].real() * t;
  for (long k = 1; k <= M.K; ++k) {
    const double w = 2.0 * kPi * static_cast<double>(k) / period;
    // c_k e^{iwt} + c_{-k} e^{-iwt} integrates to 2 Re[c_k (e^{iwt} - 1)/(iw)].
    acc += 2.0 * (M[k] * (std::polar(1.0, w * t) - 1.0) / (kI * w)).real();
  }
  return acc;
}

cplx predict_amplitude(const DecayPrediction& pred, cplx A0, double t) {
  const double phase = 2.0 * pred.beta * t + pred.Lambda * t - integrated_M(pred.fourier_M, pred.period, t);
  return A0 * std::exp(-pred.Gamma * std::abs(t)) * std::polar(1.0, phase);
}

// ---------------------------------------------------------------------------

namespace {

// int_0^T int_0^{T0} e^{-iu(T0-s)} ds dT0
cplx secular_kernel(double u, double T) {
  const double z = u * T;
  if (std::abs(z) < 0.5) {
    cplx acc = 0.0, term = T * T / 2.0;
    for (int j = 0; j < 30; ++j) {
      acc += term;
      term *= -kI * z / static_cast<double>(j + 3);
    }
    return acc;
  }
  return -kI * T / u - (std::polar(1.0, -z) - 1.0) / (u * u);
}

}  // namespace

cplx time_domain_rates(const CouplingData& c, double T_lo, double T_hi) {
  if (!(T_hi > T_lo && T_lo > 0.0)) throw InvalidArgument("need 0 < T_lo < T_hi");
  const SpectralGrid& sg = c.spectral;
  const PanelInterpolator interp(sg.breaks, sg.nodes_per_panel);
  const double lmax = sg.breaks.back();
  const long K = c.fourier_N.front().K;

  // Panels fine enough to resolve e^{-2i lambda^2 T_hi}.
  std::vector<double> breaks{0.0};
  while (breaks.back() < lmax) {
    const double l = breaks.back();
    const double h = 6.0 / (4.0 * std::max(l, 1.0 / std::sqrt(T_hi)) * T_hi);
    breaks.push_back(std::min(lmax, l + h));
  }
  const QuadratureRule fine = composite_gauss_legendre(breaks, 12);

  // Least-squares slope over a set of horizons, which averages out the
  // slowly decaying oscillation from the lambda = 0 endpoint.
  constexpr int kHorizons = 24;
  std::vector<double> Ts(kHorizons);
  for (int h = 0; h < kHorizons; ++h) Ts[h] = T_lo + (T_hi - T_lo) * h / (kHorizons - 1.0);
  std::vector<cplx> I(kHorizons, 0.0);
  for (std::size_t q = 0; q < fine.size(); ++q) {
    const double l = fine.nodes[q];
    const auto st = interp.stencil(l);
    for (long n = -K; n <= K; ++n) {
      if (dropped(c, n)) continue;
      cplx v = 0.0;
      for (std::size_t s = 0; s < st.coeff.size(); ++s) v += st.coeff[s] * c.fourier_N[st.first + s][n];
      const double w = fine.weights[q] * std::norm(v);
      if (w == 0.0) continue;
      const double u = 2.0 * (l * l + c.beta) - 2.0 * kPi * static_cast<double>(n) / c.period;
      for (int h = 0; h < kHorizons; ++h) I[h] += w * secular_kernel(u, Ts[h]);
    }
  }
  double tm = 0.0;
  cplx im = 0.0;
  for (int h = 0; h < kHorizons; ++h) {
    tm += Ts[h] / kHorizons;
    im += I[h] / static_cast<double>(kHorizons);
  }
  double sxx = 0.0;
  cplx sxy = 0.0;
  for (int h = 0; h < kHorizons; ++h) {
    sxx += (Ts[h] - tm) * (Ts[h] - tm);
    sxy += (Ts[h] - tm) * (I[h] - im);
  }
  return sxy / sxx;
}

// ---------------------------------------------------------------------------

ConvergenceReport convergence_gate(const PerturbationSpec& W, Parity parity, const CouplingOptions& opts,
                                   double tolerance, bool throw_on_failure) {
  ConvergenceReport rep;
  const CouplingOptions& base = opts;
  const CouplingData c1 = compute_coupling(W, parity, base);
  CouplingOptions fine = base;
  fine.run_oracle = false;
  fine.panels *= 2;
  fine.k_max = 2 * std::max(base.k_max, c1.fourier_M.K);
  fine.lambda_max = c1.spectral.breaks.back();
  if (fine.time_samples > 0) fine.time_samples *= 2;
  const CouplingData c2 = compute_coupling(W, parity, fine);
  rep.base = predict(c1);
  rep.refined = predict(c2);
  rep.gamma_change = relative_change(rep.base.Gamma, rep.refined.Gamma);
  rep.lambda_change = relative_change(rep.base.Lambda, rep.refined.Lambda);
  rep.passed = rep.gamma_change <= tolerance && rep.lambda_change <= tolerance;
  if (!rep.passed && throw_on_failure) {
    std::ostringstream msg;
    msg << "Gamma moved by " << rep.gamma_change << ", Lambda by " << rep.lambda_change
        << " under refinement (limit " << tolerance << ")";
    throw ConvergenceFailure(msg.str());
  }
  return rep;
}

}  // namespace breather
