#include "breather/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "breather/error.hpp"
#include "breather/quadrature.hpp"
#include "breather/spectral_basis.hpp"

namespace breather {
namespace {

constexpr double kInteriorSponge = 1e-3;

const QuadratureRule& time_rule() {
  static const QuadratureRule rule = gauss_legendre(4, 0.0, 1.0);
  return rule;
}

}  // namespace

std::string to_string(Frame f) { return f == Frame::Lab ? "lab" : "theory"; }

Frame parse_frame(const std::string& s) {
  if (s == "lab") return Frame::Lab;
  if (s == "theory") return Frame::Theory;
  throw ConfigError("unknown frame '" + s + "' (expected lab or theory)");
}

double SimulationConfig::effective_dt_max() const { return dt_max > 0.0 ? dt_max : period() / 64.0; }

Parity SimulationConfig::parity() const {
  switch (initial) {
    case InitialCondition::EvenBound: return Parity::Even;
    case InitialCondition::OddBound: return Parity::Odd;
    case InitialCondition::Custom: return projection;
  }
  return projection;
}

void SimulationConfig::validate() const {
  potential.validate();
  grid.validate();
  if (!(epsilon > -1.0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be finite and > -1");
  if (n_periods < 0) throw InvalidArgument("n_periods must be nonnegative");
  if (record_every < 1) throw InvalidArgument("record_every must be positive");
  const double L = period();
  const double dmax = effective_dt_max();
  if (!(dt_min > 0.0 && dt_min < dmax && dmax <= L / 64.0 * (1.0 + 1e-12)))
    throw InvalidArgument("time steps need 0 < dt_min < dt_max <= L/64");
  if (!(dt_scale > 0.0)) throw InvalidArgument("dt_scale must be positive");
  if (initial == InitialCondition::Custom && custom_initial.size() != grid.n_points)
    throw GridMismatch("custom initial field does not match the grid");
  if (!schedule.empty() && schedule.size() != static_cast<std::size_t>(record_every))
    throw InvalidArgument("fixed schedule needs one substep count per record interval");
  for (std::size_t n : schedule)
    if (n == 0) throw InvalidArgument("fixed schedule has an empty interval");
  if (parity() == Parity::Full) throw InvalidArgument("simulation records an even or odd bound state");
  if (!grid.symmetric()) throw InvalidArgument("simulation grid must be symmetric about 0");
  if (sponge.damping < 0.0 || sponge.width < 0.0 || sponge.margin < 0.0)
    throw InvalidArgument("sponge parameters must be nonnegative");
}

std::vector<double> sponge_profile(const SpatialGrid& grid, const SpongeParams& sponge) {
  const double width = sponge.width > 0.0 ? sponge.width : (grid.x_max - grid.x_min) / 16.0;
  const double left = grid.x_min + sponge.margin;
  const double right = grid.x_max - sponge.margin;
  std::vector<double> w(grid.n_points);
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    const double x = grid.x(j);
    const double a = (x - right) / width, b = (x - left) / width;
    w[j] = std::exp(-a * a) + std::exp(-b * b);
  }
  return w;
}

SplitStepSolver::SplitStepSolver(SimulationConfig cfg) : cfg_(std::move(cfg)), fft_(cfg_.grid.n_points) {
  cfg_.validate();
  const double stretch = std::sqrt(1.0 + cfg_.epsilon);
  kappa_ = cfg_.frame == Frame::Lab ? 1.0 / (1.0 + cfg_.epsilon) : 1.0;
  u_scale_ = cfg_.free_particle ? 0.0 : 1.0 + cfg_.epsilon;
  xs_frame_ = cfg_.grid.points();
  if (cfg_.frame == Frame::Theory)
    for (double& x : xs_frame_) x /= stretch;
  table_ = std::make_unique<TwoSolitonPotentialTable>(cfg_.potential, xs_frame_);

  const std::vector<double> k = cfg_.grid.wavenumbers();
  k2_.resize(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) k2_[i] = k[i] * k[i];
  sponge_ = sponge_profile(cfg_.grid, cfg_.sponge);
  phase_buf_.resize(cfg_.grid.n_points);
  v_buf_.resize(cfg_.grid.n_points);
}

const std::vector<cplx>& SplitStepSolver::kinetic(double dt) {
  auto it = kinetic_cache_.find(dt);
  if (it != kinetic_cache_.end()) return it->second;
  if (kinetic_cache_.size() > 256) kinetic_cache_.clear();
  // exp(-i kappa k^2 dt / 2), with the 1/n of the FFT round trip folded in.
  std::vector<cplx> m(k2_.size());
  const double norm = 1.0 / static_cast<double>(k2_.size());
  for (std::size_t i = 0; i < k2_.size(); ++i) m[i] = std::polar(norm, -0.5 * kappa_ * k2_[i] * dt);
  return kinetic_cache_.emplace(dt, std::move(m)).first->second;
}

void SplitStepSolver::apply_kinetic(double dt) {
  const std::vector<cplx>& kin = kinetic(dt);
  cplx* buf = fft_.data();
  fft_.forward();
  for (std::size_t i = 0; i < kin.size(); ++i) buf[i] *= kin[i];
  fft_.backward();
}

std::vector<double> SplitStepSolver::potential(double t) const {
  std::vector<double> u(cfg_.grid.n_points, 0.0);
  if (u_scale_ == 0.0) return u;
  table_->sample(t, u.data());
  for (double& v : u) v *= u_scale_;
  return u;
}

void SplitStepSolver::potential_phase(double t, double dt, std::vector<cplx>& out) const {
  const std::size_t n = cfg_.grid.n_points;
  out.resize(n);
  if (u_scale_ == 0.0) {
    std::fill(out.begin(), out.end(), cplx(1.0, 0.0));
    return;
  }
  std::vector<double>& acc = acc_buf_;
  acc.assign(n, 0.0);
  const QuadratureRule& rule = time_rule();
  for (std::size_t g = 0; g < rule.size(); ++g) {
    table_->sample(t + rule.nodes[g] * dt, v_buf_.data());
    for (std::size_t i = 0; i < n; ++i) acc[i] += rule.weights[g] * v_buf_[i];
  }
  const double c = -u_scale_ * dt;
  for (std::size_t i = 0; i < n; ++i) out[i] = std::polar(1.0, c * acc[i]);
}

void SplitStepSolver::step(std::vector<cplx>& f, double t, double dt) {
  const std::size_t n = cfg_.grid.n_points;
  if (f.size() != n) throw GridMismatch("field does not match the solver grid");
  cplx* buf = fft_.data();
  std::copy(f.begin(), f.end(), buf);
  apply_kinetic(0.5 * dt);
  potential_phase(t, dt, phase_buf_);
  for (std::size_t i = 0; i < n; ++i) buf[i] *= phase_buf_[i];
  apply_kinetic(0.5 * dt);

  if (cfg_.sponge.enabled && cfg_.sponge.damping > 0.0) {
    const double c = -cfg_.sponge.damping * dt;
    for (std::size_t i = 0; i < n; ++i) f[i] = buf[i] * std::exp(c * sponge_[i]);
  } else {
    std::copy(buf, buf + n, f.begin());
  }
}

double SplitStepSolver::step_error(const std::vector<cplx>& f, double t, double dt) {
  std::vector<cplx> one = f, two = f;
  step(one, t, dt);
  step(two, t, 0.5 * dt);
  step(two, t + 0.5 * dt, 0.5 * dt);
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += std::norm(one[i] - two[i]);
  return std::sqrt(acc * cfg_.grid.dx());
}

double SplitStepSolver::adapt_dt(double t) const {
  const double dmax = cfg_.effective_dt_max();
  if (u_scale_ == 0.0) return dmax;
  table_->sample_dt(t, v_buf_.data());
  double peak = 0.0;
  for (double v : v_buf_) peak = std::max(peak, std::abs(v));
  peak *= u_scale_;
  if (peak == 0.0) return dmax;
  return std::clamp(cfg_.dt_scale / peak, cfg_.dt_min, dmax);
}

std::vector<cplx> SplitStepSolver::bound_state(double t) const {
  const Parity par = cfg_.parity();
  std::vector<cplx> b(cfg_.grid.n_points);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = psi_b_parity(cfg_.potential, par, cfg_.grid.x(i), t);
  // The edge point is its own mirror on the periodic grid.
  if (par == Parity::Odd) b[0] = 0.0;
  return b;
}

std::vector<cplx> SplitStepSolver::initial_field() const {
  if (cfg_.initial == InitialCondition::Custom) return cfg_.custom_initial;
  return bound_state(0.0);
}

std::vector<std::size_t> SplitStepSolver::calibrate(const std::vector<cplx>& f0, RunStats* stats) {
  const double L = cfg_.period();
  const auto R = static_cast<std::size_t>(cfg_.record_every);
  const double interval = L / static_cast<double>(R);
  std::vector<std::size_t> n(R);

  // Initial counts from the potential's time derivative, sampled
  // symmetrically so the schedule mirrors about L/2.
  constexpr int kSamples = 8;
  for (std::size_t r = 0; r < R; ++r) {
    double dt = cfg_.effective_dt_max();
    for (int s = 0; s <= kSamples; ++s) {
      const double t = interval * (static_cast<double>(r) + static_cast<double>(s) / kSamples);
      dt = std::min(dt, adapt_dt(t));
    }
    n[r] = static_cast<std::size_t>(std::ceil(interval / dt * (1.0 - 1e-12)));
  }
  for (std::size_t r = 0; r < R; ++r) n[r] = std::max(n[r], n[R - 1 - r]);

  double worst = 0.0;
  if (cfg_.error_control) {
    // Local error of Strang splitting scales like dt^3; each interval is
    // rerun with the count predicted from its worst step until it passes.
    const double tol = cfg_.step_tolerance;
    const auto n_floor = static_cast<std::size_t>(std::ceil(interval / cfg_.effective_dt_max() * (1.0 - 1e-12)));
    auto predicted = [&](std::size_t cur, double err) {
      const double factor = 1.1 * std::cbrt(err / tol);
      return std::max(n_floor, static_cast<std::size_t>(std::ceil(static_cast<double>(cur) * factor)));
    };
    std::vector<cplx> f = f0;
    constexpr int kMaxAttempts = 12;
    for (std::size_t r = 0; r < R; ++r) {
      const double t0 = interval * static_cast<double>(r);
      // Coarsen first if the starting count is far finer than needed.
      {
        const double dt = interval / static_cast<double>(n[r]);
        const double e = step_error(f, t0, dt);
        if (e < 0.1 * tol) n[r] = predicted(n[r], std::max(e, 1e-300));
      }
      for (int attempt = 0;; ++attempt) {
        const double dt = interval / static_cast<double>(n[r]);
        if (dt < cfg_.dt_min || attempt >= kMaxAttempts) {
          std::ostringstream msg;
          msg << "step-doubling error stays above " << tol << " near t=" << t0 << " with dt=" << dt;
          throw StepRejected(msg.str());
        }
        std::vector<cplx> trial = f;
        double interval_worst = 0.0;
        for (std::size_t s = 0; s < n[r]; ++s) {
          const double t = t0 + static_cast<double>(s) * dt;
          interval_worst = std::max(interval_worst, step_error(trial, t, dt));
          if (interval_worst > tol) break;
          step(trial, t, dt);
        }
        if (interval_worst <= tol) {
          f = std::move(trial);
          worst = std::max(worst, interval_worst);
          break;
        }
        n[r] = std::max(n[r] + 1, predicted(n[r], interval_worst));
      }
    }
    for (std::size_t r = 0; r < R; ++r) n[r] = std::max(n[r], n[R - 1 - r]);
  }
  if (stats) {
    stats->substeps = n;
    stats->max_step_error = worst;
    stats->dt_smallest = interval / static_cast<double>(*std::max_element(n.begin(), n.end()));
    stats->dt_largest = interval / static_cast<double>(*std::min_element(n.begin(), n.end()));
  }
  return n;
}

void SplitStepSolver::advance(std::vector<cplx>& f, std::size_t first_interval,
                              const std::vector<std::size_t>& schedule, std::size_t n_intervals) {
  const std::size_t R = schedule.size();
  const std::size_t n = cfg_.grid.n_points;
  if (f.size() != n) throw GridMismatch("field does not match the solver grid");
  const double interval = cfg_.period() / static_cast<double>(R);
  const bool sponge = cfg_.sponge.enabled && cfg_.sponge.damping > 0.0;
  cplx* buf = fft_.data();
  for (std::size_t q = first_interval; q < first_interval + n_intervals; ++q) {
    const double ta = interval * static_cast<double>(q);
    const std::size_t m = schedule[q % R];
    const double dt = interval / static_cast<double>(m);
    if (sponge) {
      for (std::size_t s = 0; s < m; ++s) step(f, ta + static_cast<double>(s) * dt, dt);
      continue;
    }
    // Without the sponge, adjacent kinetic half-steps merge into one.
    std::copy(f.begin(), f.end(), buf);
    apply_kinetic(0.5 * dt);
    for (std::size_t s = 0; s < m; ++s) {
      potential_phase(ta + static_cast<double>(s) * dt, dt, phase_buf_);
      for (std::size_t i = 0; i < n; ++i) buf[i] *= phase_buf_[i];
      apply_kinetic(s + 1 < m ? dt : 0.5 * dt);
    }
    std::copy(buf, buf + n, f.begin());
  }
}

TimeSeries SplitStepSolver::run() {
  const double L = cfg_.period();
  const auto R = static_cast<std::size_t>(cfg_.record_every);
  const double interval = L / static_cast<double>(R);
  const double beta = cfg_.potential.floquet_exponent();
  const double dx = cfg_.grid.dx();

  std::vector<cplx> f = initial_field();
  TimeSeries ts;
  std::vector<std::size_t> schedule = cfg_.schedule;
  if (schedule.empty()) {
    schedule = calibrate(f, &ts.stats);
  } else {
    ts.stats.substeps = schedule;
  }

  // Bound state at the record phases of the first period; later periods
  // differ by the Floquet multiplier.
  std::vector<std::vector<cplx>> probes(R);

  std::vector<char> interior(cfg_.grid.n_points);
  for (std::size_t i = 0; i < interior.size(); ++i) interior[i] = sponge_[i] <= kInteriorSponge;

  auto record = [&](std::size_t q) {
    const std::size_t r = q % R;
    if (probes[r].empty()) probes[r] = bound_state(interval * static_cast<double>(r));
    const double periods = static_cast<double>(q / R);
    const cplx multiplier = std::polar(1.0, 2.0 * beta * L * periods);
    cplx proj = 0.0;
    double norm = 0.0, inner = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      proj += std::conj(probes[r][i]) * f[i];
      const double a = std::norm(f[i]);
      norm += a;
      if (interior[i]) inner += a;
    }
    ts.times.push_back(interval * static_cast<double>(q));
    ts.bound_amplitude.push_back(std::conj(multiplier) * proj * dx);
    ts.field_norm.push_back(std::sqrt(norm * dx));
    ts.interior_norm.push_back(std::sqrt(inner * dx));
  };

  std::size_t total = R * static_cast<std::size_t>(cfg_.n_periods);
  if (cfg_.record_limit > 0) total = std::min(total, cfg_.record_limit);
  record(0);
  for (std::size_t q = 0; q < total; ++q) {
    advance(f, q, schedule, 1);
    ts.stats.total_steps += schedule[q % R];
    record(q + 1);
  }
  return ts;
}

WaveField step(const WaveField& field, double t, double dt, const SimulationConfig& cfg) {
  SimulationConfig c = cfg;
  c.grid = field.grid;
  SplitStepSolver solver(c);
  WaveField out = field;
  solver.step(out.samples, t, dt);
  out.time = t + dt;
  return out;
}

TimeSeries run(const SimulationConfig& cfg) { return SplitStepSolver(cfg).run(); }

double adapt_dt(double t, const SimulationConfig& cfg) { return SplitStepSolver(cfg).adapt_dt(t); }

}  // namespace breather
