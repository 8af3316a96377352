#pragma once

// Persisted run outputs: time series CSV and prediction JSON.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "breather/pde_solver.hpp"
#include "breather/perturbation.hpp"

namespace lab {

/// One row per record: t, Re B, Im B, |B|, arg B, interior norm.
struct SeriesTable {
  std::vector<double> t;
  std::vector<breather::cplx> B;
  std::vector<double> interior_norm;
};

SeriesTable to_table(const breather::TimeSeries& ts);
std::string series_csv(const SeriesTable& s);
/// Throws MissingArtifacts if the file is absent, ConfigError if malformed.
SeriesTable read_series_csv(const std::filesystem::path& path);

nlohmann::json prediction_json(const breather::DecayPrediction& p, double epsilon);
breather::DecayPrediction prediction_from_json(const nlohmann::json& j);

nlohmann::json run_metadata_json(const breather::SimulationConfig& cfg, const breather::RunStats& stats);

/// File stem for one epsilon, e.g. "eps0.04".
std::string epsilon_tag(double epsilon);

void write_text(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace lab
