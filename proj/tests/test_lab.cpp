#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "breather/error.hpp"
#include "doctest.h"
#include "lab/artifacts.hpp"
#include "lab/commands.hpp"
#include "lab/report.hpp"
#include "lab/scenario.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace lab;
using breather::cplx;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("breather_lab_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scenario_file(const std::string& name) { return fs::path(BREATHER_SCENARIO_DIR) / name; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BREATHER_LAB_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// B(t) = exp(-g t + i w t) sampled like a simulation record.
SeriesTable synthetic_series(double g, double w, double T, std::size_t n) {
  SeriesTable s;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = T * static_cast<double>(i) / static_cast<double>(n);
    s.t.push_back(t);
    s.B.push_back(std::exp(cplx(-g * t, w * t)));
    s.interior_norm.push_back(1.0);
  }
  return s;
}

breather::DecayPrediction synthetic_prediction(double gamma, double lambda, double mbar) {
  breather::DecayPrediction p;
  p.period = 2.0 * oracle::kPi;
  p.beta = 1.0 / 16.0;
  p.Gamma = gamma;
  p.Lambda = lambda;
  p.Mbar = mbar;
  p.fourier_M.K = 1;
  p.fourier_M.coeffs = {cplx(0.1, 0.0), cplx(mbar, 0.0), cplx(0.1, 0.0)};
  return p;
}

}  // namespace

TEST_CASE("scenario files round-trip") {
  for (const char* name : {"quarter_odd.ini", "quarter_even.ini", "resonant_odd.ini", "resonant_even.ini", "single_well.ini"}) {
    const Scenario s = load_scenario(scenario_file(name));
    const Scenario back = parse_scenario(serialize_scenario(s));
    CHECK(back == s);
  }
  const Scenario q = load_scenario(scenario_file("quarter_odd.ini"));
  CHECK(q.two_soliton.rho1 == 0.25);
  CHECK(q.parity == breather::Parity::Odd);
  CHECK(q.epsilons == std::vector<double>{0.04, 0.02, 0.01});
  CHECK(q.period() == doctest::Approx(2.0 * oracle::kPi).epsilon(1e-14));
  CHECK(load_scenario(scenario_file("single_well.ini")).period() == 0.0);
}

TEST_CASE("scenario errors name the line") {
  auto message = [](const std::string& text) {
    try {
      parse_scenario(text, "t.ini");
    } catch (const breather::ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("name = a\nrun.periods = many\n").find("t.ini:2") != std::string::npos);
  CHECK(message("\n\nbogus.key = 1\n").find("t.ini:3: unknown key 'bogus.key'") != std::string::npos);
  CHECK(message("run.parity = odd\nrun.parity = even\n").find("duplicate") != std::string::npos);
  CHECK(message("just words\n").find("t.ini:1") != std::string::npos);
  CHECK(message("run.parity = full\n").find("parity") != std::string::npos);
  CHECK(message("grid.x_min = -50\n").find("symmetric") != std::string::npos);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.ini"), breather::ConfigError);
}

TEST_CASE("doubles print back exactly") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 200; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(u(rng)) % 30);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.04) == "0.04");
  CHECK(epsilon_tag(0.01) == "eps0.01");
}

TEST_CASE("artifact round trips") {
  TempDir tmp("artifacts");
  const SeriesTable s = synthetic_series(1e-3, 0.02, 300.0, 64);
  write_text(tmp.path / "s.csv", series_csv(s));
  const SeriesTable back = read_series_csv(tmp.path / "s.csv");
  REQUIRE(back.t.size() == s.t.size());
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    CHECK(back.t[i] == s.t[i]);
    CHECK(back.B[i] == s.B[i]);
  }

  breather::DecayPrediction p = synthetic_prediction(2e-5, 3e-4, -0.01);
  p.n0 = 1;
  p.dropped = {1};
  p.small_time_C = 0.123;
  const breather::DecayPrediction q = prediction_from_json(prediction_json(p, 0.04));
  CHECK(q.Gamma == p.Gamma);
  CHECK(q.Lambda == p.Lambda);
  CHECK(q.Mbar == p.Mbar);
  CHECK(q.small_time_C == p.small_time_C);
  CHECK(q.dropped == p.dropped);
  CHECK(q.fourier_M.coeffs == p.fourier_M.coeffs);

  CHECK_THROWS_AS(read_series_csv(tmp.path / "absent.csv"), breather::MissingArtifacts);
  write_text(tmp.path / "bad.csv", "t,re_B,im_B,abs_B,arg_B,interior_norm\n0,1,x,1,0,1\n");
  CHECK_THROWS_AS(read_series_csv(tmp.path / "bad.csv"), breather::ConfigError);
}

TEST_CASE("report on synthetic series") {
  const std::vector<double> eps{0.04, 0.02, 0.01};
  std::vector<SeriesTable> series;
  std::vector<breather::DecayPrediction> preds;
  for (double e : eps) {
    const double g = 0.03 * e * e, lam = 0.4 * e * e, mbar = -0.5 * e;
    series.push_back(synthetic_series(g, lam - mbar, 300.0, 400));
    preds.push_back(synthetic_prediction(g, lam, mbar));
  }
  const ComparisonReport r = build_report(eps, series, preds, 0.2, 0.2, 0.1);
  CHECK(r.passed);
  REQUIRE(r.entries.size() == 3);
  for (const auto& e : r.entries) {
    CHECK(e.relative_error < 1e-10);
    CHECK(e.phase.slope == doctest::Approx(e.predicted_phase_slope).epsilon(1e-10));
    CHECK(e.decay.samples > 300);
  }
  REQUIRE(r.scaling.size() == 2);
  for (const auto& s : r.scaling) CHECK(s.observed == doctest::Approx(4.0).epsilon(1e-10));

  // A slope 30% off fails both its entry and the ratio it enters.
  series[1] = synthetic_series(1.3 * preds[1].Gamma, 0.0, 300.0, 400);
  const ComparisonReport bad = build_report(eps, series, preds, 0.2, 0.2, 0.1);
  CHECK_FALSE(bad.passed);
  CHECK_FALSE(bad.entries[1].passed);
  CHECK(bad.entries[0].passed);
  CHECK_FALSE(bad.scaling[0].passed);
  CHECK_THROWS_AS(build_report(eps, series, {}, 0.2, 0.2, 0.1), breather::InvalidArgument);
}

TEST_CASE("compare works from persisted files only and is reproducible") {
  TempDir tmp("compare");
  Scenario s = load_scenario(scenario_file("quarter_odd.ini"));
  s.epsilons = {0.04, 0.02};
  std::ostringstream log;
  Context ctx{tmp.path, 1, &log};
  CHECK_THROWS_AS(cmd_compare(s, ctx), breather::MissingArtifacts);

  for (double e : s.epsilons) {
    const double g = 0.03 * e * e;
    write_text(tmp.path / ("predict_" + epsilon_tag(e) + ".json"),
               prediction_json(synthetic_prediction(g, 0.0, 0.0), e).dump(2));
    write_text(tmp.path / ("simulate_" + epsilon_tag(e) + ".csv"), series_csv(synthetic_series(g, 0.0, 300.0, 200)));
  }
  const ComparisonReport r = cmd_compare(s, ctx);
  CHECK(r.passed);
  const std::string first = slurp(tmp.path / "compare.json");
  CHECK(fs::exists(tmp.path / "compare_decay.svg"));
  CHECK(fs::exists(tmp.path / "compare_phase.svg"));
  cmd_compare(s, ctx);
  CHECK(slurp(tmp.path / "compare.json") == first);
  CHECK(log.str().find("PASS") != std::string::npos);
}

TEST_CASE("construct and spectrum outputs") {
  TempDir a("construct_a"), b("construct_b");
  const Scenario s = load_scenario(scenario_file("quarter_odd.ini"));
  cmd_construct(s, Context{a.path, 1, nullptr});
  cmd_construct(s, Context{b.path, 1, nullptr});
  const std::string csv = slurp(a.path / "potential.csv");
  CHECK(csv == slurp(b.path / "potential.csv"));
  CHECK(slurp(a.path / "potential.svg") == slurp(b.path / "potential.svg"));
  CHECK(csv.rfind("t,x,V\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 65 * 401);

  // V0(0, 0) = -4 appears in the table.
  std::istringstream rows(csv);
  std::string line;
  std::getline(rows, line);
  double v_origin = 0.0;
  while (std::getline(rows, line)) {
    double t, x, v;
    char c1, c2;
    std::istringstream(line) >> t >> c1 >> x >> c2 >> v;
    if (t == 0.0 && x == 0.0) v_origin = v;
  }
  CHECK(v_origin == doctest::Approx(-4.0).epsilon(1e-10));

  TempDir w("construct_single");
  const Scenario single = load_scenario(scenario_file("single_well.ini"));
  CHECK_NOTHROW(cmd_construct(single, Context{w.path, 1, nullptr}));
  cmd_spectrum(single, Context{w.path, 1, nullptr});
  const auto j = read_json(w.path / "spectrum.json");
  CHECK(j["time_dependence"] == "stationary");

  cmd_spectrum(s, Context{a.path, 1, nullptr});
  const auto q = read_json(a.path / "spectrum.json");
  CHECK(q["time_dependence"] == "periodic");
  CHECK(q["period"].get<double>() == doctest::Approx(2.0 * oracle::kPi).epsilon(1e-12));
  CHECK(q["floquet_exponent"].get<double>() == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
  CHECK(q["first_resonance"] == 1);
  CHECK(fs::exists(a.path / "bound_states.csv"));
}

TEST_CASE("predict without a perturbation and at a zero-energy resonance") {
  TempDir tmp("predict");
  Scenario s = load_scenario(scenario_file("quarter_odd.ini"));
  s.epsilons = {0.0};
  const auto zero = cmd_predict(s, Context{tmp.path, 1, nullptr});
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].Gamma == 0.0);
  CHECK(zero[0].Lambda == 0.0);
  CHECK(fs::exists(tmp.path / "predict_eps0.json"));

  Scenario r = load_scenario(scenario_file("resonant_even.ini"));
  CHECK_THROWS_AS(cmd_predict(r, Context{tmp.path, 1, nullptr}), breather::NearZeroResonance);
  r.drop_zero_resonance = true;
  const auto dropped = cmd_predict(r, Context{tmp.path, 1, nullptr});
  CHECK(dropped[0].dropped == std::vector<long>{1});
  CHECK(dropped[0].Gamma > 0.0);
  const auto j = read_json(tmp.path / ("predict_" + epsilon_tag(r.epsilons[0]) + ".json"));
  CHECK(j["convergence"]["passed"] == true);
}

TEST_CASE("command-line exit codes") {
  TempDir tmp("cli");
  const std::string out = " --out " + tmp.path.string();
  CHECK(run_cli("construct --scenario " + scenario_file("quarter_odd.ini").string() + out) == 0);
  CHECK(fs::exists(tmp.path / "potential.csv"));
  CHECK(run_cli("bogus") != 0);
  CHECK(run_cli("construct") != 0);
  CHECK(run_cli("construct --scenario " + scenario_file("quarter_odd.ini").string() + " --parity sideways") != 0);

  const fs::path broken = tmp.path / "broken.ini";
  write_text(broken, "name = x\nrun.periods = -3\n");
  CHECK(run_cli("construct --scenario " + broken.string() + out) == 2);
  CHECK(run_cli("compare --scenario " + scenario_file("quarter_odd.ini").string() + out) == 2);
  const fs::path quasi = tmp.path / "quasi.ini";
  write_text(quasi, "potential.kind = two_soliton\npotential.rho1 = 0.3\npotential.rho2 = 0.7\n");
  CHECK(run_cli("spectrum --scenario " + quasi.string() + out) == 0);
  CHECK(run_cli("predict --scenario " + scenario_file("resonant_even.ini").string() + out) == 3);

  // A failed comparison is not an error class of its own.
  for (double e : {0.04}) {
    write_text(tmp.path / ("predict_" + epsilon_tag(e) + ".json"),
               prediction_json(synthetic_prediction(1e-4, 0.0, 0.0), e).dump(2));
    write_text(tmp.path / ("simulate_" + epsilon_tag(e) + ".csv"), series_csv(synthetic_series(3e-4, 0.0, 300.0, 200)));
  }
  CHECK(run_cli("compare --epsilon 0.04 --scenario " + scenario_file("quarter_odd.ini").string() + out) == 1);
}
