#pragma once

// Comparison of simulated bound-state amplitudes with the decay prediction.

#include <vector>

#include "json.hpp"

#include "breather/perturbation.hpp"
#include "lab/artifacts.hpp"

namespace lab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t samples = 0;
};

/// Least squares of log|B| on t over [fit_start * T_end, T_end], skipping
/// samples with |B| < 1e-3 |B(0)|.
LineFit fit_log_amplitude(const SeriesTable& s, double fit_start);
/// Same window, on the unwrapped phase of B.
LineFit fit_phase(const SeriesTable& s, double fit_start);

struct ComparisonEntry {
  double epsilon = 0.0;
  LineFit decay;
  double predicted_slope = 0.0;  // -Gamma
  double relative_error = 0.0;
  LineFit phase;                 // of B = A e^{-2i beta t}
  double predicted_phase_slope = 0.0;  // Lambda - Mbar
  bool passed = false;
};

struct ScalingCheck {
  double eps_a = 0.0;
  double eps_b = 0.0;
  double observed = 0.0;  // slope(a) / slope(b)
  double expected = 0.0;  // (a/b)^2
  double relative_error = 0.0;
  bool passed = false;
};

struct ComparisonReport {
  breather::Parity parity = breather::Parity::Odd;
  double fit_start = 0.2;
  double slope_tolerance = 0.2;
  double ratio_tolerance = 0.1;
  std::vector<ComparisonEntry> entries;
  std::vector<ScalingCheck> scaling;
  bool passed = false;
};

ComparisonReport build_report(const std::vector<double>& epsilons, const std::vector<SeriesTable>& series,
                              const std::vector<breather::DecayPrediction>& predictions, double fit_start,
                              double slope_tolerance, double ratio_tolerance);

nlohmann::json report_json(const ComparisonReport& r);

}  // namespace lab
