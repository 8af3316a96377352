#pragma once

// Split-step Fourier integration of
//
//   i f_t = -(kappa/2) f_xx + U(x,t) f
//
// on a periodic grid, with U built from the two-soliton well.  In the lab
// frame kappa = 1/(1+eps) and U = (1+eps) V0(x,t); in the theory frame the
// coordinate is stretched by sqrt(1+eps) so kappa = 1 and U = V0 + W.

#include <map>
#include <memory>
#include <vector>

#include "breather/discrete_data.hpp"
#include "breather/fft.hpp"
#include "breather/grid.hpp"
#include "breather/two_soliton.hpp"

namespace breather {

enum class Frame { Lab, Theory };
enum class InitialCondition { EvenBound, OddBound, Custom };

std::string to_string(Frame f);
Frame parse_frame(const std::string& s);

struct SpongeParams {
  double damping = 1.0;
  double width = 0.0;   // 0: (x_max - x_min)/16
  double margin = 0.0;  // bump centres pulled in from the edges by this much
  bool enabled = true;

  friend bool operator==(const SpongeParams&, const SpongeParams&) = default;
};

struct SimulationConfig {
  TwoSolitonParams potential;
  SpatialGrid grid;
  double epsilon = 0.0;
  int n_periods = 50;
  InitialCondition initial = InitialCondition::OddBound;
  std::vector<cplx> custom_initial;  // used with InitialCondition::Custom
  Parity projection = Parity::Odd;   // bound state recorded for custom data
  double dt_max = 0.0;               // 0: L/64
  double dt_min = 1e-6;
  /// adapt_dt returns dt_scale / max_x |dU/dt|, clamped.
  double dt_scale = 0.05;
  SpongeParams sponge;
  int record_every = 16;
  /// Stop after this many record intervals (0: all n_periods).
  std::size_t record_limit = 0;
  /// Step-doubling tolerance on the L2 difference.
  double step_tolerance = 1e-9;
  bool error_control = true;
  /// Substeps per record interval, reused every period; empty: calibrate.
  std::vector<std::size_t> schedule;
  Frame frame = Frame::Lab;
  /// Replace V0 by 0 (free propagation tests).
  bool free_particle = false;

  double period() const { return potential.period(); }
  double effective_dt_max() const;
  Parity parity() const;
  void validate() const;
};

struct RunStats {
  std::vector<std::size_t> substeps;  // per record interval within one period
  std::size_t total_steps = 0;
  double dt_smallest = 0.0;
  double dt_largest = 0.0;
  double max_step_error = 0.0;
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<cplx> bound_amplitude;
  std::vector<double> field_norm;
  std::vector<double> interior_norm;
  RunStats stats;
};

/// Gaussian bumps at both ends of the domain.
std::vector<double> sponge_profile(const SpatialGrid& grid, const SpongeParams& sponge);

class SplitStepSolver {
 public:
  explicit SplitStepSolver(SimulationConfig cfg);

  const SimulationConfig& config() const { return cfg_; }

  /// One Strang step from time t: kinetic half, potential, kinetic half, sponge.
  void step(std::vector<cplx>& f, double t, double dt);
  /// L2 difference between one step of dt and two of dt/2.
  double step_error(const std::vector<cplx>& f, double t, double dt);

  /// U(x_j, t) in the configured frame.
  std::vector<double> potential(double t) const;
  /// dt_scale / max |dU/dt| clamped to [dt_min, dt_max].
  double adapt_dt(double t) const;

  /// Substeps per record interval over one period, refined by step doubling
  /// on a copy of `f` and made symmetric about L/2.
  std::vector<std::size_t> calibrate(const std::vector<cplx>& f, RunStats* stats = nullptr);

  std::vector<cplx> initial_field() const;
  /// Bound state of the configured parity at time t on the grid (frame coordinates).
  std::vector<cplx> bound_state(double t) const;

  TimeSeries run();
  /// Evolve `f` through record intervals first..first+n-1 (interval q spans
  /// [q, q+1] * L/schedule.size()) with schedule[q % size] substeps each.
  void advance(std::vector<cplx>& f, std::size_t first_interval, const std::vector<std::size_t>& schedule,
               std::size_t n_intervals);

 private:
  const std::vector<cplx>& kinetic(double dt);
  /// Kinetic propagation of the FFT buffer (x-space in and out).
  void apply_kinetic(double dt);
  void potential_phase(double t, double dt, std::vector<cplx>& out) const;

  SimulationConfig cfg_;
  Fft fft_;
  double kappa_ = 1.0;
  double u_scale_ = 1.0;
  std::vector<double> xs_frame_;  // points where V0 is evaluated
  std::unique_ptr<TwoSolitonPotentialTable> table_;
  std::vector<double> k2_;
  std::vector<double> sponge_;
  std::map<double, std::vector<cplx>> kinetic_cache_;
  std::vector<cplx> phase_buf_;
  mutable std::vector<double> v_buf_;
  mutable std::vector<double> acc_buf_;
};

/// Free-function forms.
WaveField step(const WaveField& field, double t, double dt, const SimulationConfig& cfg);
TimeSeries run(const SimulationConfig& cfg);
double adapt_dt(double t, const SimulationConfig& cfg);

}  // namespace breather
