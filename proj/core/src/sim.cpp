#include "chemo/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chemo/errors.hpp"

namespace chemo {

namespace {

void require_nonnegative(const Field& f, const char* name, const char* where) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f[i] >= 0.0)) {
      throw DomainError(std::string(where) + ": " + name + " = " + std::to_string(f[i]) +
                        " at cell " + std::to_string(i));
    }
  }
}

struct PositivePart {
  double max = 0.0;
  std::size_t cell = 0;
};

PositivePart max_positive_on_mask(const Field& f) {
  PositivePart p;
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (g.in_control(i) && f[i] > p.max) {
      p.max = f[i];
      p.cell = i;
    }
  }
  return p;
}

void check_control_number(const Field& f, double dt, double t) {
  const PositivePart fp = max_positive_on_mask(f);
  if (fp.max > 0.0 && !(dt * fp.max < 1.0)) {
    throw StepSizeError("step at t=" + std::to_string(t) + ": dt * max f+ = " +
                            std::to_string(dt * fp.max) + " >= 1 at cell " +
                            std::to_string(fp.cell),
                        std::nextafter(1.0 / fp.max, 0.0), fp.cell);
  }
}

bool lands_on(double t, double target) {
  return std::abs(t - target) <= 1e-12 * std::max(1.0, std::abs(target));
}

}  // namespace

Field TimeSeries::at(double t) const {
  if (times.empty()) throw StructuralError("TimeSeries::at on an empty series");
  if (t <= times.front()) return fields.front();
  if (t >= times.back()) return fields.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times.begin());
  const double t0 = times[k - 1], t1 = times[k];
  const double w = (t - t0) / (t1 - t0);
  if (w == 0.0) return fields[k - 1];
  Field out = fields[k - 1];
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - w) * fields[k - 1][i] + w * fields[k][i];
  }
  return out;
}

Control::Control(std::vector<double> times, std::vector<Field> levels) {
  if (times.empty() || times.size() != levels.size()) {
    throw StructuralError("Control: need one field per time level");
  }
  if (times.front() != 0.0) throw DomainError("Control: first time level must be 0");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw DomainError("Control: times must increase strictly");
    require_same_grid(levels[0], levels[k], "Control");
  }
  for (auto& f : levels) {
    if (!f.all_finite()) throw DomainError("Control: non-finite value");
    const Grid& g = f.grid();
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!g.in_control(i)) f[i] = 0.0;
    }
  }
  series_.times = std::move(times);
  series_.fields = std::move(levels);
}

Control Control::zero(GridPtr grid, double horizon, std::size_t level_count) {
  return constant(std::move(grid), horizon, level_count, 0.0);
}

Control Control::constant(GridPtr grid, double horizon, std::size_t level_count, double value) {
  if (level_count == 0) throw DomainError("Control: need at least one level");
  if (level_count == 1 || horizon == 0.0) {
    return Control({0.0}, {Field(grid, value)});
  }
  std::vector<double> times(level_count);
  std::vector<Field> levels;
  for (std::size_t k = 0; k < level_count; ++k) {
    times[k] = horizon * static_cast<double>(k) / static_cast<double>(level_count - 1);
    levels.emplace_back(grid, value);
  }
  times.back() = horizon;
  return Control(std::move(times), std::move(levels));
}

Control Control::scaled(double factor) const {
  Control c = *this;
  for (auto& f : c.series_.fields) {
    for (auto& x : f) x *= factor;
  }
  return c;
}

double Control::max_positive() const {
  double m = 0.0;
  for (const auto& f : series_.fields) m = std::max(m, max_positive_on_mask(f).max);
  return m;
}

State step(const State& state, const Field& control_slice, const ModelParams& params, double dt,
           const StepOptions& options, StepRecord* record) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("step: dt must be positive");
  require_same_grid(state.u, state.v, "step");
  require_same_grid(state.u, control_slice, "step");
  require_nonnegative(state.u, "u", "step");
  require_nonnegative(state.v, "v", "step");

  const Grid& g = state.u.grid();
  const GridPtr& grid = state.u.grid_ptr();
  const double t_new = state.t + dt;
  check_control_number(control_slice, dt, state.t);

  const Field mobility = truncate(state.u, params.m);

  // v-step: consumption and both control parts implicit.
  std::vector<double> dv(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double f = g.in_control(i) ? control_slice[i] : 0.0;
    const double consumption = params.s == 1.0 ? mobility[i] : std::pow(mobility[i], params.s);
    dv[i] = 1.0 + dt * (consumption - f);
  }
  const Field v_new = DiffusionSystem(grid, dt, std::move(dv)).solve(state.v, options.solver, &state.v);

  const OutflowRate rate = chemotaxis_outflow_rate(mobility, v_new);
  if (dt * rate.rate > options.cfl_limit) {
    throw StepSizeError("step at t=" + std::to_string(state.t) + ": transport CFL " +
                            std::to_string(dt * rate.rate) + " exceeds " +
                            std::to_string(options.cfl_limit) + " at cell " +
                            std::to_string(rate.cell),
                        options.cfl_limit / rate.rate, rate.cell);
  }

  // u-step: implicit diffusion, explicit upwind chemotaxis with v^{n+1}.
  const Field div = chemotaxis_divergence(mobility, v_new);
  Field rhs = state.u;
  for (std::size_t i = 0; i < g.size(); ++i) rhs[i] += dt * div[i];
  const Field u_new =
      DiffusionSystem(grid, dt, std::vector<double>(g.size(), 1.0)).solve(rhs, options.solver, &state.u);

  // Positivity is a property of the scheme; a violation is a bug, not a clamp.
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (u_new[i] < 0.0 || v_new[i] < 0.0) {
      throw Error("step: positivity lost at cell " + std::to_string(i) + " (u=" +
                  std::to_string(u_new[i]) + ", v=" + std::to_string(v_new[i]) + ")");
    }
  }

  if (record) {
    record->t = t_new;
    record->dt = dt;
    record->cfl_number = dt * rate.rate;
    record->control_number = dt * max_positive_on_mask(control_slice).max;
  }
  return State{u_new, v_new, t_new};
}

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(states.size());
  for (const auto& s : states) t.push_back(s.t);
  return t;
}

std::vector<double> Trajectory::step_times() const {
  std::vector<double> t;
  t.reserve(steps.size());
  for (const auto& s : steps) t.push_back(s.t);
  return t;
}

TimeSeries Trajectory::u_series() const {
  TimeSeries s;
  for (const auto& st : states) {
    s.times.push_back(st.t);
    s.fields.push_back(st.u);
  }
  return s;
}

TimeSeries Trajectory::v_series() const {
  TimeSeries s;
  for (const auto& st : states) {
    s.times.push_back(st.t);
    s.fields.push_back(st.v);
  }
  return s;
}

Trajectory simulate(const Field& u0, const Field& v0, const Control& control,
                    const ModelParams& params, const SimOptions& options) {
  params.validate();
  if (!(options.dt_max > 0.0)) throw DomainError("simulate: dt_max must be positive");
  if (options.save_every == 0) throw DomainError("simulate: save_every must be >= 1");
  require_same_grid(u0, v0, "simulate");
  if (control.empty()) throw StructuralError("simulate: empty control");
  require_same_grid(u0, control.levels().front(), "simulate");
  require_nonnegative(u0, "u0", "simulate");
  require_nonnegative(v0, "v0", "simulate");

  Trajectory traj;
  traj.control = control;
  traj.params = params;
  traj.save_every = options.save_every;
  traj.states.push_back(State{u0, v0, 0.0});

  const double horizon = params.T_final;
  if (horizon == 0.0) return traj;

  State current = traj.states.front();
  double dt = std::min(options.dt_max, horizon);
  std::size_t clean = 0;
  std::size_t accepted = 0;
  const double dt_floor = 1e-12 * horizon;

  while (!lands_on(current.t, horizon) && current.t < horizon) {
    double h = dt;
    double t_next = current.t + h;
    if (t_next >= horizon || lands_on(t_next, horizon)) {
      h = horizon - current.t;
      t_next = horizon;
    }
    StepRecord rec;
    try {
      State next = step(current, control.at(t_next), params, h, options.step, &rec);
      next.t = t_next;
      rec.t = t_next;
      current = std::move(next);
    } catch (const StepSizeError& e) {
      ++traj.rejected_steps;
      dt = std::min(dt, h) * 0.5;
      clean = 0;
      if (dt < dt_floor) {
        throw StiffnessFailure("simulate: dt underflow at t=" + std::to_string(current.t) +
                                   " (cell " + std::to_string(e.cell()) + "): " + e.what(),
                               current.t, e.cell());
      }
      continue;
    }
    traj.steps.push_back(rec);
    ++accepted;
    const bool last = t_next == horizon;
    if (last || accepted % options.save_every == 0) traj.states.push_back(current);
    if (++clean >= options.grow_after) {
      dt = std::min(2.0 * dt, options.dt_max);
      clean = 0;
    }
  }
  return traj;
}

TimeSeries solve_comparison(const Field& w0, const Control& control, const ModelParams& params,
                            const SimOptions& options, std::span<const double> step_times) {
  params.validate();
  require_nonnegative(w0, "w0", "solve_comparison");
  if (control.empty()) throw StructuralError("solve_comparison: empty control");
  require_same_grid(w0, control.levels().front(), "solve_comparison");
  if (options.save_every == 0) throw DomainError("solve_comparison: save_every must be >= 1");

  const GridPtr& grid = w0.grid_ptr();
  const Grid& g = *grid;
  TimeSeries out;
  out.times.push_back(0.0);
  out.fields.push_back(w0);
  const double horizon = params.T_final;

  auto advance = [&](const Field& w, double dt, double t_next) {
    const Field f = control.at(t_next);
    check_control_number(f, dt, t_next - dt);
    std::vector<double> d(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double fp = g.in_control(i) ? std::max(f[i], 0.0) : 0.0;
      d[i] = 1.0 - dt * fp;
    }
    return DiffusionSystem(grid, dt, std::move(d)).solve(w, options.step.solver, &w);
  };

  Field w = w0;
  double t = 0.0;
  if (!step_times.empty()) {
    for (std::size_t k = 0; k < step_times.size(); ++k) {
      const double t_next = step_times[k];
      if (!(t_next > t)) throw DomainError("solve_comparison: step times must increase");
      w = advance(w, t_next - t, t_next);
      t = t_next;
      if (k + 1 == step_times.size() || (k + 1) % options.save_every == 0) {
        out.times.push_back(t);
        out.fields.push_back(w);
      }
    }
    return out;
  }

  if (horizon == 0.0) return out;
  double dt = std::min(options.dt_max, horizon);
  const double fmax = control.max_positive();
  while (fmax > 0.0 && !(dt * fmax < 1.0)) {
    dt *= 0.5;
    if (dt < 1e-12 * horizon) {
      throw StiffnessFailure("solve_comparison: dt underflow", 0.0, 0);
    }
  }
  std::size_t k = 0;
  while (t < horizon && !lands_on(t, horizon)) {
    double t_next = t + dt;
    if (t_next >= horizon || lands_on(t_next, horizon)) t_next = horizon;
    w = advance(w, t_next - t, t_next);
    t = t_next;
    ++k;
    if (t == horizon || k % options.save_every == 0) {
      out.times.push_back(t);
      out.fields.push_back(w);
    }
  }
  return out;
}

namespace {

double dot(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid().cell_volume();
}

// <grad u, grad phi> - <T(u) grad v, grad phi> via summation by parts.
double spatial_form(const State& st, const Field& phi, double m) {
  const Field lap = laplacian_neumann(st.u);
  const Field div = chemotaxis_divergence(truncate(st.u, m), st.v);
  return -dot(lap, phi) - dot(div, phi);
}

double h1_norm_sq(const Field& phi) {
  const double l2 = lp_norm(phi, 2.0);
  const double h1 = h1_seminorm(phi);
  return l2 * l2 + h1 * h1;
}

}  // namespace

double weak_residual(const Trajectory& trajectory, const TimeSeries& test) {
  const auto& states = trajectory.states;
  if (test.size() != states.size()) {
    throw StructuralError("weak_residual: test function has " + std::to_string(test.size()) +
                          " levels for " + std::to_string(states.size()) + " saved states");
  }
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (!lands_on(test.times[k], states[k].t)) {
      throw StructuralError("weak_residual: test function times differ from the trajectory");
    }
    require_same_grid(states[k].u, test.fields[k], "weak_residual");
  }
  if (states.size() < 2) return 0.0;

  const double m = trajectory.params.m;
  double residual = 0.0;
  double norm_sq = 0.0;
  double g_prev = spatial_form(states[0], test.fields[0], m);
  double n_prev = h1_norm_sq(test.fields[0]);
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    const double dt = states[k + 1].t - states[k].t;
    const Field phi_mid = 0.5 * (test.fields[k] + test.fields[k + 1]);
    const double g_next = spatial_form(states[k + 1], test.fields[k + 1], m);
    const double n_next = h1_norm_sq(test.fields[k + 1]);
    residual += dot(states[k + 1].u - states[k].u, phi_mid) + 0.5 * dt * (g_prev + g_next);
    norm_sq += 0.5 * dt * (n_prev + n_next);
    g_prev = g_next;
    n_prev = n_next;
  }
  if (norm_sq == 0.0) return std::abs(residual);
  return std::abs(residual) / std::sqrt(norm_sq);
}

}  // namespace chemo
