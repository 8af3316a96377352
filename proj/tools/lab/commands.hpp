#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "breather/perturbation.hpp"
#include "lab/report.hpp"
#include "lab/scenario.hpp"

namespace lab {

struct Context {
  std::filesystem::path out;
  unsigned threads = 1;
  std::ostream* log = nullptr;
};

/// V0 over one period: potential.csv and potential.svg.
void cmd_construct(const Scenario& s, const Context& ctx);
/// Time dependence, Floquet exponent, resonance table, bound states at t = 0.
void cmd_spectrum(const Scenario& s, const Context& ctx);
/// predict_<eps>.json per epsilon, each behind the refinement gate.
std::vector<breather::DecayPrediction> cmd_predict(const Scenario& s, const Context& ctx);
/// simulate_<eps>.csv and .json per epsilon.
void cmd_simulate(const Scenario& s, const Context& ctx);
/// compare.json plus decay and phase overlays, from persisted files only.
ComparisonReport cmd_compare(const Scenario& s, const Context& ctx);

struct DecayProbeEntry {
  breather::Parity parity = breather::Parity::Odd;
  breather::PowerLawFit fit;
  double expected = 0.0;
  std::vector<double> times;
  std::vector<double> norms;
};

/// Weighted local-decay exponents for an even and an odd packet.
std::vector<DecayProbeEntry> cmd_decay_probe(const Scenario& s, const Context& ctx);

}  // namespace lab
