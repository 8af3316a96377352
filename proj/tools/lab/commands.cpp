#include "lab/commands.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "breather/dressing.hpp"
#include "breather/error.hpp"
#include "breather/spectral_basis.hpp"
#include "breather/two_soliton.hpp"
#include "lab/svg.hpp"

namespace lab {

namespace fs = std::filesystem;
using breather::cplx;
using nlohmann::json;

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

template <class F>
void run_jobs(std::size_t n, unsigned threads, F&& job) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

void say(const Context& ctx, const std::string& line) {
  static std::mutex m;
  if (!ctx.log) return;
  std::lock_guard<std::mutex> lock(m);
  *ctx.log << line << std::endl;
}

const breather::TwoSolitonParams& require_two_soliton(const Scenario& s, const char* what) {
  if (s.kind != PotentialKind::TwoSoliton)
    throw breather::ConfigError(std::string(what) + " needs potential.kind = two_soliton");
  return s.two_soliton;
}

breather::CouplingOptions coupling_options(const Scenario& s, unsigned threads) {
  breather::CouplingOptions o;
  o.panels = s.panels;
  o.nodes_per_panel = s.nodes_per_panel;
  o.lambda_max = s.lambda_max;
  o.k_max = s.k_max;
  o.drop_zero_resonance = s.drop_zero_resonance;
  o.threads = threads;
  return o;
}

std::vector<double> unwrap_phase(const std::vector<cplx>& B) {
  std::vector<double> out(B.size());
  double offset = 0.0;
  for (std::size_t i = 0; i < B.size(); ++i) {
    const double a = std::arg(B[i]);
    if (i > 0) offset -= 2.0 * std::numbers::pi * std::round((a + offset - out[i - 1]) / (2.0 * std::numbers::pi));
    out[i] = a + offset;
  }
  return out;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream o;
  o.precision(digits);
  o << v;
  return o.str();
}

}  // namespace

// ---------------------------------------------------------------------------

void cmd_construct(const Scenario& s, const Context& ctx) {
  const breather::DiscreteData data = s.discrete_data();
  const double L = s.period();
  const bool stationary = L == 0.0;
  const double t_span = stationary ? 1.0 : L;
  constexpr int kTimes = 64;
  // Trim the domain to where the well lives; the far field is flat.
  double rho_min = INFINITY;
  for (const cplx& l : data.lambdas) rho_min = std::min(rho_min, l.imag());
  const double half = std::min(s.grid.x_max, 12.0 / rho_min);
  constexpr int kX = 400;

  std::ostringstream csv;
  csv << "t,x,V\n";
  std::vector<std::vector<double>> heat(kTimes + 1, std::vector<double>(kX + 1));
  for (int j = 0; j <= kTimes; ++j) {
    const double t = t_span * j / kTimes;
    for (int i = 0; i <= kX; ++i) {
      const double x = -half + 2.0 * half * i / kX;
      const double v = s.kind == PotentialKind::TwoSoliton ? breather::two_soliton_potential(s.two_soliton, x, t)
                                                            : breather::eval_potential(data, x, t);
      heat[j][i] = v;
      csv << format_double(t) << ',' << format_double(x) << ',' << format_double(v) << '\n';
    }
  }
  write_text(ctx.out / "potential.csv", csv.str());
  write_text(ctx.out / "potential.svg",
             render_heatmap(heat, -half, half, 0.0, t_span, "V0(x,t) over one period", "x", "t"));
  say(ctx, "construct: period " + (stationary ? std::string("none (stationary)") : fixed(L, 10)) + ", wrote " +
               (ctx.out / "potential.csv").string());
}

void cmd_spectrum(const Scenario& s, const Context& ctx) {
  const breather::DiscreteData data = s.discrete_data();
  const breather::PeriodReport rep = breather::check_commensurate(data);
  json j;
  json pts = json::array();
  for (const cplx& l : data.lambdas) pts.push_back({l.real(), l.imag()});
  j["spectral_points"] = pts;
  j["time_dependence"] = rep.kind == breather::TimeDependence::Stationary ? "stationary"
                         : rep.kind == breather::TimeDependence::Periodic ? "periodic"
                                                                          : "quasiperiodic";
  j["period"] = rep.period;
  j["harmonics"] = rep.harmonics;

  std::unique_ptr<breather::ModeBasis> basis;
  if (s.kind == PotentialKind::TwoSoliton)
    basis = std::make_unique<breather::TwoSolitonBasis>(s.two_soliton, breather::Parity::Full);
  else
    basis = std::make_unique<breather::DressingBasis>(data);

  if (rep.kind != breather::TimeDependence::Quasiperiodic) {
    const double beta = basis->floquet_exponent();
    j["floquet_exponent"] = beta;
    if (rep.kind == breather::TimeDependence::Periodic) {
      const long n0 = breather::first_resonance(rep.period, beta);
      j["first_resonance"] = n0;
      json res = json::array();
      for (long n = n0 - 2; n <= n0 + 8; ++n) {
        const double sigma = breather::resonance_sigma(n, rep.period, beta);
        res.push_back({{"n", n}, {"sigma", sigma}, {"near_zero", std::abs(sigma) < breather::CouplingOptions{}.sigma_floor}});
      }
      j["resonances"] = res;
    }
  }

  const std::vector<double> xs = s.grid.points();
  const breather::ModeTable table = basis->tabulate(xs, 0.0, {});
  std::ostringstream csv;
  csv << "x";
  for (std::size_t k = 0; k < table.bound.size(); ++k) csv << ",re_b" << k << ",im_b" << k;
  csv << '\n';
  json norms = json::array();
  for (std::size_t k = 0; k < table.bound.size(); ++k) {
    double n2 = 0.0;
    for (const cplx& v : table.bound[k]) n2 += std::norm(v) * s.grid.dx();
    norms.push_back(std::sqrt(n2));
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    csv << format_double(xs[i]);
    for (const auto& b : table.bound) csv << ',' << format_double(b[i].real()) << ',' << format_double(b[i].imag());
    csv << '\n';
  }
  j["bound_state_norms"] = norms;
  write_text(ctx.out / "spectrum.json", j.dump(2) + "\n");
  write_text(ctx.out / "bound_states.csv", csv.str());
  say(ctx, "spectrum: " + j["time_dependence"].get<std::string>() + ", " + std::to_string(table.bound.size()) +
               " bound states");
}

std::vector<breather::DecayPrediction> cmd_predict(const Scenario& s, const Context& ctx) {
  const breather::TwoSolitonParams& p = require_two_soliton(s, "predict");
  const std::size_t n = s.epsilons.size();
  std::vector<breather::DecayPrediction> out(n);
  const unsigned jobs = std::max(1u, std::min<unsigned>(ctx.threads, static_cast<unsigned>(n)));
  const unsigned inner = std::max(1u, ctx.threads / jobs);
  run_jobs(n, jobs, [&](std::size_t k) {
    const double eps = s.epsilons[k];
    const auto W = breather::PerturbationSpec::detuning(p, eps);
    const breather::ConvergenceReport rep =
        breather::convergence_gate(W, s.parity, coupling_options(s, inner), s.convergence_tolerance);
    out[k] = rep.base;
    json j = prediction_json(rep.base, eps);
    j["convergence"] = {{"gamma_change", rep.gamma_change},
                        {"lambda_change", rep.lambda_change},
                        {"tolerance", s.convergence_tolerance},
                        {"passed", rep.passed}};
    write_text(ctx.out / ("predict_" + epsilon_tag(eps) + ".json"), j.dump(2) + "\n");
    say(ctx, "predict eps=" + format_double(eps) + ": Gamma=" + fixed(rep.base.Gamma, 6) +
                 " Lambda=" + fixed(rep.base.Lambda, 6) + " Mbar=" + fixed(rep.base.Mbar, 6));
  });
  return out;
}

void cmd_simulate(const Scenario& s, const Context& ctx) {
  require_two_soliton(s, "simulate");
  run_jobs(s.epsilons.size(), ctx.threads, [&](std::size_t k) {
    const double eps = s.epsilons[k];
    const breather::SimulationConfig cfg = s.simulation(eps);
    breather::SplitStepSolver solver(cfg);
    const breather::TimeSeries ts = solver.run();
    const std::string tag = epsilon_tag(eps);
    write_text(ctx.out / ("simulate_" + tag + ".csv"), series_csv(to_table(ts)));
    write_text(ctx.out / ("simulate_" + tag + ".json"), run_metadata_json(cfg, ts.stats).dump(2) + "\n");
    say(ctx, "simulate eps=" + format_double(eps) + ": " + std::to_string(ts.times.size()) + " records, |B(T)|=" +
                 fixed(std::abs(ts.bound_amplitude.back()), 8));
  });
}

ComparisonReport cmd_compare(const Scenario& s, const Context& ctx) {
  std::vector<SeriesTable> series;
  std::vector<breather::DecayPrediction> preds;
  for (double eps : s.epsilons) {
    const std::string tag = epsilon_tag(eps);
    const fs::path pj = ctx.out / ("predict_" + tag + ".json");
    const fs::path sc = ctx.out / ("simulate_" + tag + ".csv");
    if (!fs::exists(pj)) throw breather::MissingArtifacts(pj.string() + " not found (run predict first)");
    if (!fs::exists(sc)) throw breather::MissingArtifacts(sc.string() + " not found (run simulate first)");
    preds.push_back(prediction_from_json(read_json(pj)));
    series.push_back(read_series_csv(sc));
  }
  const ComparisonReport rep =
      build_report(s.epsilons, series, preds, s.fit_start, s.slope_tolerance, s.ratio_tolerance);
  write_text(ctx.out / "compare.json", report_json(rep).dump(2) + "\n");

  LinePlot decay{"log|B| against the predicted decay", "t", "log|B|", {}};
  LinePlot phase{"phase of B against the prediction", "t", "arg B (unwrapped)", {}};
  for (std::size_t k = 0; k < series.size(); ++k) {
    const std::string color = kColors[k % std::size(kColors)];
    const SeriesTable& st = series[k];
    Series sim{"eps=" + format_double(s.epsilons[k]), st.t, {}, color, false};
    Series line{"", st.t, {}, color, true};
    const double a0 = std::log(std::abs(st.B.front()));
    for (std::size_t i = 0; i < st.t.size(); ++i) {
      sim.y.push_back(std::log(std::abs(st.B[i])));
      line.y.push_back(a0 - preds[k].Gamma * st.t[i]);
    }
    decay.series.push_back(sim);
    decay.series.push_back(line);

    Series ph{"eps=" + format_double(s.epsilons[k]), st.t, unwrap_phase(st.B), color, false};
    Series pp{"", st.t, {}, color, true};
    const double p0 = ph.y.front();
    for (double t : st.t) {
      pp.y.push_back(p0 + preds[k].Lambda * t - breather::integrated_M(preds[k].fourier_M, preds[k].period, t));
    }
    phase.series.push_back(ph);
    phase.series.push_back(pp);
  }
  write_text(ctx.out / "compare_decay.svg", render_svg(decay));
  write_text(ctx.out / "compare_phase.svg", render_svg(phase));

  for (const auto& e : rep.entries)
    say(ctx, std::string(e.passed ? "PASS" : "FAIL") + " eps=" + format_double(e.epsilon) + " slope=" +
                 fixed(e.decay.slope, 6) + " predicted=" + fixed(e.predicted_slope, 6) +
                 " rel.err=" + fixed(e.relative_error, 3));
  for (const auto& r : rep.scaling)
    say(ctx, std::string(r.passed ? "PASS" : "FAIL") + " ratio eps " + format_double(r.eps_a) + "/" +
                 format_double(r.eps_b) + ": " + fixed(r.observed, 4) + " (expected " + fixed(r.expected, 4) + ")");
  return rep;
}

std::vector<DecayProbeEntry> cmd_decay_probe(const Scenario& s, const Context& ctx) {
  const breather::TwoSolitonParams& p = require_two_soliton(s, "decay-probe");
  const double L = p.period();
  std::vector<double> times(static_cast<std::size_t>(s.decay_samples));
  for (std::size_t k = 0; k < times.size(); ++k)
    times[k] = L * s.decay_t_min *
               std::pow(s.decay_t_max / s.decay_t_min, static_cast<double>(k) / static_cast<double>(times.size() - 1));

  std::vector<DecayProbeEntry> out(2);
  const breather::Parity parities[] = {breather::Parity::Odd, breather::Parity::Even};
  run_jobs(2, ctx.threads, [&](std::size_t k) {
    const breather::Parity par = parities[k];
    const breather::TwoSolitonBasis basis(p, par);
    breather::WaveField f;
    f.grid = s.grid;
    f.samples.resize(s.grid.n_points);
    const double w = s.decay_width;
    for (std::size_t j = 0; j < f.samples.size(); ++j) {
      const double x = s.grid.x(j);
      const double g = std::exp(-x * x / (2.0 * w * w));
      f.samples[j] = par == breather::Parity::Odd ? x * g : g;
    }
    const breather::DecayProbeResult r = breather::local_decay_probe(f, basis, s.decay_sigma, times);
    DecayProbeEntry e;
    e.parity = par;
    e.fit = breather::fit_power_law(r.times, r.weighted_norms, L * s.decay_t_min, L * s.decay_t_max);
    e.expected = par == breather::Parity::Odd ? -1.5 : -0.5;
    e.times = r.times;
    e.norms = r.weighted_norms;
    out[k] = e;
  });

  json j;
  j["sigma"] = s.decay_sigma;
  j["window"] = {L * s.decay_t_min, L * s.decay_t_max};
  std::ostringstream csv;
  csv << "t,odd,even\n";
  for (std::size_t i = 0; i < times.size(); ++i)
    csv << format_double(times[i]) << ',' << format_double(out[0].norms[i]) << ',' << format_double(out[1].norms[i])
        << '\n';
  for (const auto& e : out) {
    j[breather::to_string(e.parity)] = {{"exponent", e.fit.exponent},
                                        {"stderr", e.fit.exponent_stderr},
                                        {"ci95", {e.fit.exponent - 1.96 * e.fit.exponent_stderr,
                                                  e.fit.exponent + 1.96 * e.fit.exponent_stderr}},
                                        {"expected", e.expected}};
    say(ctx, "decay-probe " + breather::to_string(e.parity) + ": exponent " + fixed(e.fit.exponent, 4) + " +- " +
                 fixed(1.96 * e.fit.exponent_stderr, 2) + " (expected " + fixed(e.expected, 2) + ")");
  }
  write_text(ctx.out / "decay_probe.json", j.dump(2) + "\n");
  write_text(ctx.out / "decay_probe.csv", csv.str());
  return out;
}

}  // namespace lab
