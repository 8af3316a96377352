#pragma once

// Scenario files: flat "section.key = value" lines, '#' comments.

#include <filesystem>
#include <string>
#include <vector>

#include "breather/discrete_data.hpp"
#include "breather/grid.hpp"
#include "breather/pde_solver.hpp"

namespace lab {

enum class PotentialKind { TwoSoliton, Discrete };

struct Scenario {
  std::string name = "scenario";
  PotentialKind kind = PotentialKind::TwoSoliton;
  breather::TwoSolitonParams two_soliton;
  breather::DiscreteData discrete;  // kind == Discrete

  breather::Parity parity = breather::Parity::Odd;
  std::vector<double> epsilons{0.04, 0.02, 0.01};
  int n_periods = 50;
  breather::Frame frame = breather::Frame::Lab;
  breather::SpatialGrid grid;
  breather::SpongeParams sponge;

  int record_every = 16;
  double step_tolerance = 1e-9;
  double dt_max = 0.0;
  double dt_min = 1e-6;

  std::size_t panels = 24;
  std::size_t nodes_per_panel = 16;
  double lambda_max = 0.0;
  long k_max = 32;
  bool drop_zero_resonance = false;
  double convergence_tolerance = 5e-3;

  double fit_start = 0.2;     // fraction of the run
  double slope_tolerance = 0.2;
  double ratio_tolerance = 0.1;

  double decay_sigma = 3.5;
  double decay_t_min = 5.0;   // periods
  double decay_t_max = 50.0;  // periods
  int decay_samples = 21;
  double decay_width = 2.0;

  std::filesystem::path output = "out";

  /// Period of the potential (0 when stationary).
  double period() const;
  breather::DiscreteData discrete_data() const;
  breather::SimulationConfig simulation(double epsilon) const;

  void validate() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws ConfigError naming the line and key on any problem.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const Scenario& s);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

}  // namespace lab
