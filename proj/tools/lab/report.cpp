#include "lab/report.hpp"

#include <cmath>
#include <numbers>

#include "breather/error.hpp"

namespace lab {
namespace {

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  f.samples = x.size();
  if (x.size() < 2) return f;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

// Indices inside the fit window that are above the dispersive floor.
std::vector<std::size_t> window(const SeriesTable& s, double fit_start) {
  std::vector<std::size_t> idx;
  if (s.t.empty()) return idx;
  const double t_lo = fit_start * s.t.back();
  const double floor = 1e-3 * std::abs(s.B.front());
  for (std::size_t i = 0; i < s.t.size(); ++i)
    if (s.t[i] >= t_lo && std::abs(s.B[i]) >= floor) idx.push_back(i);
  return idx;
}

}  // namespace

LineFit fit_log_amplitude(const SeriesTable& s, double fit_start) {
  std::vector<double> x, y;
  for (std::size_t i : window(s, fit_start)) {
    x.push_back(s.t[i]);
    y.push_back(std::log(std::abs(s.B[i])));
  }
  return least_squares(x, y);
}

LineFit fit_phase(const SeriesTable& s, double fit_start) {
  // Unwrap over the whole record, then fit inside the window.
  std::vector<double> phase(s.t.size());
  double offset = 0.0;
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    const double a = std::arg(s.B[i]);
    if (i > 0) {
      const double jump = a + offset - phase[i - 1];
      offset -= 2.0 * std::numbers::pi * std::round(jump / (2.0 * std::numbers::pi));
    }
    phase[i] = a + offset;
  }
  std::vector<double> x, y;
  for (std::size_t i : window(s, fit_start)) {
    x.push_back(s.t[i]);
    y.push_back(phase[i]);
  }
  return least_squares(x, y);
}

ComparisonReport build_report(const std::vector<double>& epsilons, const std::vector<SeriesTable>& series,
                              const std::vector<breather::DecayPrediction>& predictions, double fit_start,
                              double slope_tolerance, double ratio_tolerance) {
  if (epsilons.size() != series.size() || epsilons.size() != predictions.size())
    throw breather::InvalidArgument("one series and one prediction per epsilon");
  ComparisonReport r;
  r.fit_start = fit_start;
  r.slope_tolerance = slope_tolerance;
  r.ratio_tolerance = ratio_tolerance;
  if (!predictions.empty()) r.parity = predictions.front().parity;
  r.passed = true;
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    ComparisonEntry e;
    e.epsilon = epsilons[k];
    e.decay = fit_log_amplitude(series[k], fit_start);
    e.predicted_slope = -predictions[k].Gamma;
    const double denom = std::abs(e.predicted_slope);
    e.relative_error = denom > 0.0 ? std::abs(e.decay.slope - e.predicted_slope) / denom
                                   : std::abs(e.decay.slope - e.predicted_slope);
    e.phase = fit_phase(series[k], fit_start);
    e.predicted_phase_slope = predictions[k].Lambda - predictions[k].Mbar;
    e.passed = e.relative_error <= slope_tolerance;
    r.passed = r.passed && e.passed;
    r.entries.push_back(e);
  }
  // Neighbouring epsilons only, so each ratio tests one halving step.
  for (std::size_t a = 0; a + 1 < r.entries.size(); ++a) {
    const auto& ea = r.entries[a];
    const auto& eb = r.entries[a + 1];
    if (ea.epsilon == 0.0 || eb.epsilon == 0.0 || eb.decay.slope == 0.0) continue;
    ScalingCheck s;
    s.eps_a = ea.epsilon;
    s.eps_b = eb.epsilon;
    s.observed = ea.decay.slope / eb.decay.slope;
    s.expected = (ea.epsilon / eb.epsilon) * (ea.epsilon / eb.epsilon);
    s.relative_error = std::abs(s.observed - s.expected) / s.expected;
    s.passed = s.relative_error <= ratio_tolerance;
    r.passed = r.passed && s.passed;
    r.scaling.push_back(s);
  }
  return r;
}

nlohmann::json report_json(const ComparisonReport& r) {
  nlohmann::json j;
  j["parity"] = breather::to_string(r.parity);
  j["fit_window_start"] = r.fit_start;
  j["slope_tolerance"] = r.slope_tolerance;
  j["ratio_tolerance"] = r.ratio_tolerance;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"epsilon", e.epsilon},
                       {"fitted_slope", e.decay.slope},
                       {"fitted_intercept", e.decay.intercept},
                       {"fit_samples", e.decay.samples},
                       {"predicted_slope", e.predicted_slope},
                       {"relative_error", e.relative_error},
                       {"phase_slope", e.phase.slope},
                       {"predicted_phase_slope", e.predicted_phase_slope},
                       {"passed", e.passed}});
  }
  j["entries"] = entries;
  nlohmann::json scaling = nlohmann::json::array();
  for (const auto& s : r.scaling) {
    scaling.push_back({{"eps_a", s.eps_a},
                       {"eps_b", s.eps_b},
                       {"observed_ratio", s.observed},
                       {"expected_ratio", s.expected},
                       {"relative_error", s.relative_error},
                       {"passed", s.passed}});
  }
  j["scaling"] = scaling;
  j["passed"] = r.passed;
  return j;
}

}  // namespace lab
