#include <benchmark/benchmark.h>

#include "breather/discrete_data.hpp"
#include "breather/dressing.hpp"
#include "breather/pde_solver.hpp"
#include "breather/perturbation.hpp"

using namespace breather;

namespace {

const TwoSolitonParams kQuarter{0.25, 0.75, 0.0, 0.0};

void BM_DressingSolve(benchmark::State& state) {
  const DiscreteData d = DiscreteData::from_two_soliton(kQuarter);
  double x = -10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_dressing(d, x, 1.3));
    x = x > 10.0 ? -10.0 : x + 0.01;
  }
}
BENCHMARK(BM_DressingSolve);

void BM_SplitStep(benchmark::State& state) {
  SimulationConfig c;
  c.potential = kQuarter;
  c.epsilon = 0.04;
  c.grid.n_points = static_cast<std::size_t>(state.range(0));
  SplitStepSolver s(c);
  std::vector<cplx> f = s.initial_field();
  double t = 0.0;
  const double dt = c.period() / 512.0;
  for (auto _ : state) {
    s.step(f, t, dt);
    t += dt;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SplitStep)->Arg(1024)->Arg(2048);

void BM_MatrixElements(benchmark::State& state) {
  CouplingOptions o;
  o.threads = 1;
  o.run_oracle = false;
  MatrixElementIntegrator in(PerturbationSpec::detuning(kQuarter, 0.04), Parity::Odd, o);
  std::vector<double> lambdas;
  for (int j = 0; j < state.range(0); ++j) lambdas.push_back(0.05 + 3.0 * j / state.range(0));
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(in.at(t, lambdas));
    t += 0.01;
  }
}
BENCHMARK(BM_MatrixElements)->Arg(16)->Arg(384);

}  // namespace

BENCHMARK_MAIN();
