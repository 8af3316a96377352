#include "lab/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "breather/error.hpp"
#include "lab/scenario.hpp"

namespace lab {

using breather::cplx;
using nlohmann::json;

SeriesTable to_table(const breather::TimeSeries& ts) {
  return {ts.times, ts.bound_amplitude, ts.interior_norm};
}

std::string series_csv(const SeriesTable& s) {
  std::ostringstream o;
  o << "t,re_B,im_B,abs_B,arg_B,interior_norm\n";
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    o << format_double(s.t[i]) << ',' << format_double(s.B[i].real()) << ',' << format_double(s.B[i].imag()) << ','
      << format_double(std::abs(s.B[i])) << ',' << format_double(std::arg(s.B[i])) << ','
      << format_double(s.interior_norm[i]) << '\n';
  }
  return o.str();
}

SeriesTable read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw breather::MissingArtifacts("no time series at " + path.string() + " (run simulate first)");
  std::string line;
  std::getline(in, line);
  if (line.rfind("t,re_B,im_B", 0) != 0) throw breather::ConfigError(path.string() + ": unexpected header");
  SeriesTable s;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw breather::ConfigError(path.string() + ":" + std::to_string(row) + ": bad number '" + cell + "'");
      }
    }
    if (v.size() != 6) throw breather::ConfigError(path.string() + ":" + std::to_string(row) + ": expected 6 columns");
    s.t.push_back(v[0]);
    s.B.emplace_back(v[1], v[2]);
    s.interior_norm.push_back(v[5]);
  }
  return s;
}

json prediction_json(const breather::DecayPrediction& p, double epsilon) {
  json j;
  j["epsilon"] = epsilon;
  j["parity"] = breather::to_string(p.parity);
  j["period"] = p.period;
  j["floquet_exponent"] = p.beta;
  j["Mbar"] = p.Mbar;
  j["Gamma"] = p.Gamma;
  j["Lambda"] = p.Lambda;
  j["small_time_C"] = p.small_time_C;
  j["n0"] = p.n0;
  j["dropped"] = p.dropped;
  json res = json::array();
  for (const auto& r : p.resonances) {
    res.push_back({{"n", r.n},
                   {"sigma", r.sigma},
                   {"lambda", r.lambda},
                   {"abs_N", std::abs(r.coefficient)},
                   {"contribution", r.contribution},
                   {"oracle_checked", r.oracle_checked},
                   {"oracle_error", r.oracle_error}});
  }
  j["resonances"] = res;
  json re = json::array(), im = json::array();
  for (const cplx& c : p.fourier_M.coeffs) {
    re.push_back(c.real());
    im.push_back(c.imag());
  }
  j["fourier_M"] = {{"K", p.fourier_M.K}, {"re", re}, {"im", im}};
  return j;
}

breather::DecayPrediction prediction_from_json(const json& j) {
  breather::DecayPrediction p;
  try {
    p.parity = breather::parse_parity(j.at("parity").get<std::string>());
    p.period = j.at("period").get<double>();
    p.beta = j.at("floquet_exponent").get<double>();
    p.Mbar = j.at("Mbar").get<double>();
    p.Gamma = j.at("Gamma").get<double>();
    p.Lambda = j.at("Lambda").get<double>();
    p.small_time_C = j.at("small_time_C").get<double>();
    p.n0 = j.at("n0").get<long>();
    p.dropped = j.at("dropped").get<std::vector<long>>();
    const json& fm = j.at("fourier_M");
    p.fourier_M.K = fm.at("K").get<long>();
    const auto re = fm.at("re").get<std::vector<double>>();
    const auto im = fm.at("im").get<std::vector<double>>();
    if (re.size() != im.size() || re.size() != static_cast<std::size_t>(2 * p.fourier_M.K + 1))
      throw breather::ConfigError("fourier_M has the wrong length");
    for (std::size_t i = 0; i < re.size(); ++i) p.fourier_M.coeffs.emplace_back(re[i], im[i]);
  } catch (const json::exception& e) {
    throw breather::ConfigError(std::string("malformed prediction file: ") + e.what());
  }
  return p;
}

json run_metadata_json(const breather::SimulationConfig& cfg, const breather::RunStats& stats) {
  json j;
  j["epsilon"] = cfg.epsilon;
  j["parity"] = breather::to_string(cfg.parity());
  j["frame"] = breather::to_string(cfg.frame);
  j["periods"] = cfg.n_periods;
  j["period"] = cfg.period();
  j["record_every"] = cfg.record_every;
  j["grid"] = {{"x_min", cfg.grid.x_min}, {"x_max", cfg.grid.x_max}, {"points", cfg.grid.n_points}};
  j["sponge"] = {{"enabled", cfg.sponge.enabled},
                 {"damping", cfg.sponge.damping},
                 {"width", cfg.sponge.width > 0.0 ? cfg.sponge.width : (cfg.grid.x_max - cfg.grid.x_min) / 16.0},
                 {"margin", cfg.sponge.margin}};
  j["steps"] = {{"tolerance", cfg.step_tolerance},
                {"total", stats.total_steps},
                {"per_interval", stats.substeps},
                {"dt_smallest", stats.dt_smallest},
                {"dt_largest", stats.dt_largest},
                {"max_step_error", stats.max_step_error}};
  return j;
}

std::string epsilon_tag(double epsilon) { return "eps" + format_double(epsilon); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw breather::ConfigError("cannot write " + path.string());
  out << text;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw breather::MissingArtifacts("missing " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw breather::ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace lab
