#include "lab/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "breather/error.hpp"

namespace lab {

using breather::ConfigError;

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

class Reader {
 public:
  Reader(const std::string& text, std::string origin) : origin_(std::move(origin)) {
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const auto hash = raw.find('#');
      const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) fail(line, "expected 'key = value'");
      const std::string key = trim(body.substr(0, eq));
      if (key.empty()) fail(line, "empty key");
      if (entries_.count(key)) fail(line, "duplicate key '" + key + "' (first on line " + std::to_string(entries_[key].line) + ")");
      entries_[key] = Entry{trim(body.substr(eq + 1)), line, false};
    }
  }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + msg);
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  template <class T>
  void get(const std::string& key, T& out) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return;
    it->second.used = true;
    try {
      out = convert<T>(it->second.value);
    } catch (const std::exception& e) {
      fail(it->second.line, "bad value for '" + key + "': " + e.what());
    }
  }

  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, _] : entries_)
      if (k.rfind(prefix, 0) == 0) out.push_back(k);
    return out;
  }

  void check_all_used() const {
    for (const auto& [k, e] : entries_)
      if (!e.used) fail(e.line, "unknown key '" + k + "'");
  }

 private:
  template <class T>
  static T convert(const std::string& v);

  std::string origin_;
  std::map<std::string, Entry> entries_;
};

double to_double(const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw std::invalid_argument("not a number: '" + v + "'");
  return out;
}

std::vector<double> to_doubles(const std::string& v) {
  std::vector<double> out;
  std::string s = v;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(to_double(tok));
  return out;
}

template <>
double Reader::convert<double>(const std::string& v) { return to_double(v); }
template <>
int Reader::convert<int>(const std::string& v) {
  const double d = to_double(v);
  if (d != static_cast<int>(d)) throw std::invalid_argument("not an integer: '" + v + "'");
  return static_cast<int>(d);
}
template <>
long Reader::convert<long>(const std::string& v) { return convert<int>(v); }
template <>
std::size_t Reader::convert<std::size_t>(const std::string& v) {
  const int i = convert<int>(v);
  if (i < 0) throw std::invalid_argument("must be nonnegative");
  return static_cast<std::size_t>(i);
}
template <>
bool Reader::convert<bool>(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("not a boolean: '" + v + "'");
}
template <>
std::string Reader::convert<std::string>(const std::string& v) { return v; }
template <>
std::vector<double> Reader::convert<std::vector<double>>(const std::string& v) { return to_doubles(v); }
template <>
breather::Parity Reader::convert<breather::Parity>(const std::string& v) { return breather::parse_parity(v); }
template <>
breather::Frame Reader::convert<breather::Frame>(const std::string& v) { return breather::parse_frame(v); }
template <>
std::filesystem::path Reader::convert<std::filesystem::path>(const std::string& v) { return v; }

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, p) : std::string("nan");
}

double Scenario::period() const {
  if (kind == PotentialKind::TwoSoliton) return two_soliton.period();
  return breather::check_commensurate(discrete).period;
}

breather::DiscreteData Scenario::discrete_data() const {
  return kind == PotentialKind::TwoSoliton ? breather::DiscreteData::from_two_soliton(two_soliton) : discrete;
}

breather::SimulationConfig Scenario::simulation(double epsilon) const {
  if (kind != PotentialKind::TwoSoliton) throw ConfigError("simulation needs potential.kind = two_soliton");
  breather::SimulationConfig c;
  c.potential = two_soliton;
  c.grid = grid;
  c.epsilon = epsilon;
  c.n_periods = n_periods;
  c.initial = parity == breather::Parity::Even ? breather::InitialCondition::EvenBound
                                               : breather::InitialCondition::OddBound;
  c.projection = parity;
  c.dt_max = dt_max;
  c.dt_min = dt_min;
  c.sponge = sponge;
  c.record_every = record_every;
  c.step_tolerance = step_tolerance;
  c.frame = frame;
  return c;
}

void Scenario::validate() const {
  if (kind == PotentialKind::TwoSoliton) {
    two_soliton.validate();
  } else {
    discrete.validate();
  }
  if (parity == breather::Parity::Full) throw ConfigError("parity must be even or odd");
  if (n_periods < 1) throw ConfigError("run.periods must be at least 1");
  if (epsilons.empty()) throw ConfigError("run.epsilons is empty");
  for (double e : epsilons)
    if (!(e > -1.0)) throw ConfigError("epsilon must exceed -1");
  grid.validate();
  if (!grid.symmetric()) throw ConfigError("grid must be symmetric about 0");
  if (!(fit_start >= 0.0 && fit_start < 1.0)) throw ConfigError("compare.fit_start must be in [0, 1)");
  if (!(decay_t_min > 0.0 && decay_t_max > decay_t_min)) throw ConfigError("decay window is empty");
  if (decay_samples < 3) throw ConfigError("decay.samples must be at least 3");
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  Reader r(text, origin);
  Scenario s;
  r.get("name", s.name);

  std::string kind = "two_soliton";
  r.get("potential.kind", kind);
  if (kind == "two_soliton") {
    s.kind = PotentialKind::TwoSoliton;
    r.get("potential.rho1", s.two_soliton.rho1);
    r.get("potential.rho2", s.two_soliton.rho2);
    r.get("potential.theta1", s.two_soliton.theta1);
    r.get("potential.theta2", s.two_soliton.theta2);
  } else if (kind == "discrete") {
    s.kind = PotentialKind::Discrete;
    std::size_t m = 0;
    r.get("potential.points", m);
    if (m == 0) throw ConfigError(origin + ": potential.points must be set for discrete data");
    for (std::size_t k = 1; k <= m; ++k) {
      const std::string lk = "potential.lambda." + std::to_string(k), gk = "potential.g." + std::to_string(k);
      if (!r.has(lk) || !r.has(gk)) throw ConfigError(origin + ": missing " + lk + " or " + gk);
      std::vector<double> l, g;
      r.get(lk, l);
      r.get(gk, g);
      if (l.size() != 2) throw ConfigError(origin + ": " + lk + " needs 're im'");
      if (g.empty() || g.size() % 2) throw ConfigError(origin + ": " + gk + " needs 're im' pairs");
      s.discrete.lambdas.emplace_back(l[0], l[1]);
      std::vector<breather::cplx> gv;
      for (std::size_t i = 0; i < g.size(); i += 2) gv.emplace_back(g[i], g[i + 1]);
      s.discrete.g.push_back(std::move(gv));
    }
  } else {
    throw ConfigError(origin + ": potential.kind must be two_soliton or discrete, got '" + kind + "'");
  }

  r.get("run.parity", s.parity);
  r.get("run.epsilons", s.epsilons);
  r.get("run.periods", s.n_periods);
  r.get("run.frame", s.frame);
  r.get("run.output", s.output);

  r.get("grid.x_min", s.grid.x_min);
  r.get("grid.x_max", s.grid.x_max);
  r.get("grid.points", s.grid.n_points);

  r.get("sponge.enabled", s.sponge.enabled);
  r.get("sponge.damping", s.sponge.damping);
  r.get("sponge.width", s.sponge.width);
  r.get("sponge.margin", s.sponge.margin);

  r.get("solver.record_every", s.record_every);
  r.get("solver.step_tolerance", s.step_tolerance);
  r.get("solver.dt_max", s.dt_max);
  r.get("solver.dt_min", s.dt_min);

  r.get("spectral.panels", s.panels);
  r.get("spectral.nodes_per_panel", s.nodes_per_panel);
  r.get("spectral.lambda_max", s.lambda_max);
  r.get("spectral.k_max", s.k_max);
  r.get("spectral.drop_zero_resonance", s.drop_zero_resonance);
  r.get("spectral.convergence_tolerance", s.convergence_tolerance);

  r.get("compare.fit_start", s.fit_start);
  r.get("compare.slope_tolerance", s.slope_tolerance);
  r.get("compare.ratio_tolerance", s.ratio_tolerance);

  r.get("decay.sigma", s.decay_sigma);
  r.get("decay.t_min", s.decay_t_min);
  r.get("decay.t_max", s.decay_t_max);
  r.get("decay.samples", s.decay_samples);
  r.get("decay.width", s.decay_width);

  r.check_all_used();
  try {
    s.validate();
  } catch (const breather::Error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream o;
  auto kv = [&](const std::string& k, const std::string& v) { o << k << " = " << v << "\n"; };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  kv("name", s.name);
  if (s.kind == PotentialKind::TwoSoliton) {
    kv("potential.kind", "two_soliton");
    kv("potential.rho1", format_double(s.two_soliton.rho1));
    kv("potential.rho2", format_double(s.two_soliton.rho2));
    kv("potential.theta1", format_double(s.two_soliton.theta1));
    kv("potential.theta2", format_double(s.two_soliton.theta2));
  } else {
    kv("potential.kind", "discrete");
    kv("potential.points", std::to_string(s.discrete.M()));
    for (std::size_t k = 0; k < s.discrete.M(); ++k) {
      kv("potential.lambda." + std::to_string(k + 1),
         format_double(s.discrete.lambdas[k].real()) + " " + format_double(s.discrete.lambdas[k].imag()));
      std::string g;
      for (const auto& c : s.discrete.g[k]) g += (g.empty() ? "" : " ") + format_double(c.real()) + " " + format_double(c.imag());
      kv("potential.g." + std::to_string(k + 1), g);
    }
  }
  o << "\n";
  kv("run.parity", breather::to_string(s.parity));
  kv("run.epsilons", join(s.epsilons));
  kv("run.periods", std::to_string(s.n_periods));
  kv("run.frame", breather::to_string(s.frame));
  kv("run.output", s.output.string());
  o << "\n";
  kv("grid.x_min", format_double(s.grid.x_min));
  kv("grid.x_max", format_double(s.grid.x_max));
  kv("grid.points", std::to_string(s.grid.n_points));
  o << "\n";
  kv("sponge.enabled", b(s.sponge.enabled));
  kv("sponge.damping", format_double(s.sponge.damping));
  kv("sponge.width", format_double(s.sponge.width));
  kv("sponge.margin", format_double(s.sponge.margin));
  o << "\n";
  kv("solver.record_every", std::to_string(s.record_every));
  kv("solver.step_tolerance", format_double(s.step_tolerance));
  kv("solver.dt_max", format_double(s.dt_max));
  kv("solver.dt_min", format_double(s.dt_min));
  o << "\n";
  kv("spectral.panels", std::to_string(s.panels));
  kv("spectral.nodes_per_panel", std::to_string(s.nodes_per_panel));
  kv("spectral.lambda_max", format_double(s.lambda_max));
  kv("spectral.k_max", std::to_string(s.k_max));
  kv("spectral.drop_zero_resonance", b(s.drop_zero_resonance));
  kv("spectral.convergence_tolerance", format_double(s.convergence_tolerance));
  o << "\n";
  kv("compare.fit_start", format_double(s.fit_start));
  kv("compare.slope_tolerance", format_double(s.slope_tolerance));
  kv("compare.ratio_tolerance", format_double(s.ratio_tolerance));
  o << "\n";
  kv("decay.sigma", format_double(s.decay_sigma));
  kv("decay.t_min", format_double(s.decay_t_min));
  kv("decay.t_max", format_double(s.decay_t_max));
  kv("decay.samples", std::to_string(s.decay_samples));
  kv("decay.width", format_double(s.decay_width));
  return o.str();
}

}  // namespace lab
