#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chemo/grid.hpp"
#include "chemo/linear_solver.hpp"
#include "chemo/model.hpp"

namespace chemo {

/// (u, v) at one time level. u is the cell density, v the chemical
/// concentration; both nonnegative.
struct State {
  Field u;
  Field v;
  double t = 0.0;
};

/// Fields sampled at increasing times.
struct TimeSeries {
  std::vector<double> times;
  std::vector<Field> fields;

  std::size_t size() const noexcept { return times.size(); }
  /// Linear interpolation in time, constant extrapolation outside the range.
  Field at(double t) const;
};

/// Space-time control f sampled on time levels t_0 = 0 < ... < t_K = T and
/// interpolated linearly in between. Values outside the control region are
/// forced to zero on construction.
class Control {
 public:
  Control() = default;
  Control(std::vector<double> times, std::vector<Field> levels);

  static Control zero(GridPtr grid, double horizon, std::size_t level_count);
  static Control constant(GridPtr grid, double horizon, std::size_t level_count, double value);

  const std::vector<double>& times() const noexcept { return series_.times; }
  const std::vector<Field>& levels() const noexcept { return series_.fields; }
  const TimeSeries& series() const noexcept { return series_; }
  std::size_t level_count() const noexcept { return series_.times.size(); }
  const GridPtr& grid_ptr() const { return series_.fields.front().grid_ptr(); }
  bool empty() const noexcept { return series_.times.empty(); }

  Field at(double t) const { return series_.at(t); }
  Control scaled(double factor) const;
  /// max over masked cells and levels of the positive part f+.
  double max_positive() const;

 private:
  TimeSeries series_;
};

struct StepOptions {
  SolverOptions solver;
  /// Explicit chemotaxis transport is accepted while dt * outflow_rate <= cfl_limit.
  double cfl_limit = 0.9;
};

struct StepRecord {
  double t = 0.0;               ///< time at the end of the step
  double dt = 0.0;
  double cfl_number = 0.0;      ///< dt * max outflow rate
  double control_number = 0.0;  ///< dt * max f+ on the control region
};

/// One IMEX step of the truncated controlled system with the control slice
/// evaluated at the new time level:
///   (I - dt L + dt T(u)^s + dt f- - dt f+) v' = v
///   (I - dt L) u' = u + dt * chemotaxis_divergence(T(u), v')
/// Throws StepSizeError if dt * max f+ >= 1 or the transport CFL fails.
State step(const State& state, const Field& control_slice, const ModelParams& params, double dt,
           const StepOptions& options = {}, StepRecord* record = nullptr);

struct SimOptions {
  double dt_max = 1e-2;
  std::size_t save_every = 1;   ///< keep every k-th accepted level (and the last)
  std::size_t grow_after = 10;  ///< clean steps before dt is doubled again
  StepOptions step;
};

struct Trajectory {
  std::vector<State> states;  ///< saved levels, starting at t = 0
  Control control;
  ModelParams params;
  std::vector<StepRecord> steps;  ///< every accepted step
  std::size_t rejected_steps = 0;
  std::size_t save_every = 1;

  std::vector<double> times() const;
  std::vector<double> step_times() const;
  TimeSeries u_series() const;
  TimeSeries v_series() const;
};

/// Adaptive integration over [0, params.T_final] with dt <= dt_max: dt is
/// halved on a StepSizeError and doubled after `grow_after` clean steps.
/// Throws StiffnessFailure when dt drops below 1e-12 * T_final.
Trajectory simulate(const Field& u0, const Field& v0, const Control& control,
                    const ModelParams& params, const SimOptions& options);

/// Backward Euler solve of the comparison problem dt w - Lw = f+ w on the
/// control region. With `step_times` (e.g. Trajectory::step_times()) the
/// steps follow those levels exactly and the saving cadence matches a paired
/// simulate call; otherwise dt = dt_max, halved until dt * max f+ < 1.
TimeSeries solve_comparison(const Field& w0, const Control& control, const ModelParams& params,
                            const SimOptions& options, std::span<const double> step_times = {});

/// Space-time residual of the discrete u weak form tested against `test`
/// (sampled on the trajectory's saved times): time derivative paired with the
/// level average of the test function, spatial terms by trapezoid in time,
/// using the stepper's own Laplacian and upwind flux. Normalized by the
/// space-time H^1 norm of the test function.
double weak_residual(const Trajectory& trajectory, const TimeSeries& test);

}  // namespace chemo
