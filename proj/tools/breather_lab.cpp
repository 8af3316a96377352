#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "breather/error.hpp"
#include "lab/commands.hpp"
#include "lab/scenario.hpp"

namespace {

unsigned thread_cap() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BREATHER_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw breather::ConfigError(std::string("BREATHER_LAB_THREADS must be a positive integer, got '") + env + "'");
    n = static_cast<unsigned>(v);
  }
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decay of a bound state in a time-periodic reflectionless well"};
  app.require_subcommand(1, 1);

  std::string scenario_path, out_dir, parity;
  std::vector<double> epsilons;
  bool drop_zero = false, no_sponge = false;
  std::optional<int> periods;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides run.output)");
    sub->add_option("--epsilon", epsilons, "perturbation strength, repeatable (overrides run.epsilons)")
        ->allow_extra_args(false);
    sub->add_option("--parity", parity, "even or odd")->check(CLI::IsMember({"even", "odd"}));
    sub->add_flag("--drop-zero-resonance", drop_zero, "drop the sigma = 0 term in even parity");
    sub->add_flag("--no-sponge", no_sponge, "disable the absorbing layer");
    sub->add_option("--periods", periods, "number of periods to simulate")->check(CLI::PositiveNumber);
  };
  const char* names[] = {"construct", "spectrum", "predict", "simulate", "compare", "decay-probe"};
  const char* help[] = {"tabulate V0 over one period",
                        "period, Floquet exponent, resonances and bound states",
                        "decay rate and level shift per epsilon",
                        "split-step runs per epsilon",
                        "fit the simulated decay against the prediction",
                        "weighted local-decay exponents"};
  for (int i = 0; i < 6; ++i) add_common(app.add_subcommand(names[i], help[i]));

  CLI11_PARSE(app, argc, argv);
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    lab::Scenario s = lab::load_scenario(scenario_path);
    if (!out_dir.empty()) s.output = out_dir;
    if (!epsilons.empty()) s.epsilons = epsilons;
    if (!parity.empty()) s.parity = breather::parse_parity(parity);
    if (drop_zero) s.drop_zero_resonance = true;
    if (no_sponge) s.sponge.enabled = false;
    if (periods) s.n_periods = *periods;
    s.validate();

    lab::Context ctx{s.output, thread_cap(), &std::cout};
    if (cmd == "construct") lab::cmd_construct(s, ctx);
    else if (cmd == "spectrum") lab::cmd_spectrum(s, ctx);
    else if (cmd == "predict") lab::cmd_predict(s, ctx);
    else if (cmd == "simulate") lab::cmd_simulate(s, ctx);
    else if (cmd == "compare") {
      if (!lab::cmd_compare(s, ctx).passed) return 1;
    } else lab::cmd_decay_probe(s, ctx);
  } catch (const breather::Error& e) {
    std::cerr << "breather_lab " << cmd << ": " << e.what() << '\n';
    if (e.kind() == "NearZeroResonance")
      std::cerr << "  the sigma = 0 term has no finite golden-rule value; pass --drop-zero-resonance to drop it\n";
    return breather::exit_code_for(e.error_class());
  } catch (const std::exception& e) {
    std::cerr << "breather_lab " << cmd << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
