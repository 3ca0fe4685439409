#include "chemo/cost.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "chemo/energy.hpp"
#include "chemo/errors.hpp"

namespace chemo {

namespace {

double lp_power(const Field& f, double p) {
  if (p == 2.0) {
    double s = 0.0;
    for (double x : f) s += x * x;
    return s * f.grid().cell_volume();
  }
  double s = 0.0;
  for (double x : f) s += std::pow(std::abs(x), p);
  return s * f.grid().cell_volume();
}

// sum_k trapezoid weight_k * phi(k)
template <class Fn>
double trapezoid_in_time(const std::vector<double>& times, Fn&& phi) {
  double total = 0.0;
  double prev = times.empty() ? 0.0 : phi(0);
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double next = phi(k + 1);
    total += 0.5 * (times[k + 1] - times[k]) * (prev + next);
    prev = next;
  }
  return total;
}

}  // namespace

double spacetime_lp_norm(const TimeSeries& series, double p) {
  if (std::isnan(p) || p < 1.0) throw DomainError("spacetime_lp_norm requires p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& f : series.fields) m = std::max(m, lp_norm(f, p));
    return m;
  }
  const double integral =
      trapezoid_in_time(series.times, [&](std::size_t k) { return lp_power(series.fields[k], p); });
  return std::pow(integral, 1.0 / p);
}

double control_norm(const Control& control, double q) {
  return spacetime_lp_norm(control.series(), q);
}

DesiredState DesiredState::constant(double value) {
  DesiredState d;
  d.kind_ = Kind::constant;
  d.base_ = value;
  return d;
}

DesiredState DesiredState::gaussian(double amplitude, std::vector<double> center, double width,
                                    double base) {
  if (!(width > 0.0)) throw DomainError("gaussian desired state needs width > 0");
  DesiredState d;
  d.kind_ = Kind::gaussian;
  d.amplitude_ = amplitude;
  d.center_ = std::move(center);
  d.width_ = width;
  d.base_ = base;
  return d;
}

DesiredState DesiredState::decaying(double amplitude, std::vector<double> center, double width,
                                    double rate, double base) {
  DesiredState d = gaussian(amplitude, std::move(center), width, base);
  d.kind_ = Kind::decaying;
  d.rate_ = rate;
  return d;
}

DesiredState DesiredState::from_series(TimeSeries series) {
  if (series.times.empty()) throw DomainError("desired state series is empty");
  DesiredState d;
  d.kind_ = Kind::series;
  d.series_ = std::move(series);
  return d;
}

Field DesiredState::sample(double t, const GridPtr& grid) const {
  switch (kind_) {
    case Kind::constant:
      return Field(grid, base_);
    case Kind::series: {
      Field f = series_.at(t);
      if (!(f.grid() == *grid)) throw StructuralError("desired state series on a different grid");
      return f;
    }
    case Kind::gaussian:
    case Kind::decaying: {
      const Grid& g = *grid;
      if (center_.size() != g.dimension()) {
        throw StructuralError("desired state center does not match the grid dimension");
      }
      const double decay = kind_ == Kind::decaying ? std::exp(-rate_ * t) : 1.0;
      Field f(grid, 0.0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        double r2 = 0.0;
        for (std::size_t a = 0; a < g.dimension(); ++a) {
          const double d = g.center(i, a) - center_[a];
          r2 += d * d;
        }
        f[i] = base_ + amplitude_ * decay * std::exp(-r2 / (2.0 * width_ * width_));
      }
      return f;
    }
  }
  throw Error("unreachable desired state kind");
}

void CostParams::validate() const {
  if (!(gamma_u > 0.0) || !(gamma_v > 0.0) || !(gamma_f > 0.0)) {
    throw DomainError("cost weights gamma_u, gamma_v, gamma_f must be > 0");
  }
  if (!(q > 2.5)) throw DomainError("cost.q must be > 5/2");
  if (!(M > 0.0)) throw DomainError("cost.M must be > 0");
}

CostBreakdown evaluate_J(const Trajectory& trajectory, const Control& control,
                         const CostParams& cost, double s) {
  const auto& states = trajectory.states;
  if (states.empty()) throw StructuralError("evaluate_J: empty trajectory");
  const GridPtr& grid = states.front().u.grid_ptr();
  const std::vector<double> times = trajectory.times();
  const double pu = 5.0 * s / 3.0;

  CostBreakdown b;
  const double iu = trapezoid_in_time(times, [&](std::size_t k) {
    return lp_power(states[k].u - cost.u_d.sample(times[k], grid), pu);
  });
  const double iv = trapezoid_in_time(times, [&](std::size_t k) {
    return lp_power(states[k].v - cost.v_d.sample(times[k], grid), 2.0);
  });
  const double ifq = trapezoid_in_time(
      control.times(), [&](std::size_t k) { return lp_power(control.levels()[k], cost.q); });
  b.state_u = 3.0 * cost.gamma_u / (5.0 * s) * iu;
  b.state_v = cost.gamma_v / 2.0 * iv;
  b.control = cost.gamma_f / cost.q * ifq;
  return b;
}

Control project_ball(const Control& control, double M, double q) {
  if (!(M > 0.0)) throw DomainError("project_ball: M must be > 0");
  const double norm = control_norm(control, q);
  if (norm <= M) return control;
  Control c = control.scaled(M / norm);
  // Guard the last ulp so the result is inside the ball.
  while (control_norm(c, q) > M) c = c.scaled(1.0 - 1e-15);
  return c;
}

std::string AdmissibilityReport::to_json() const {
  nlohmann::json j{{"control_norm", control_norm}, {"in_ball", in_ball},
                   {"weak_residual", weak_residual}, {"weak_ok", weak_ok},
                   {"energy_residual", energy_residual}, {"energy_ok", energy_ok},
                   {"beta", beta}, {"K", K}, {"pass", pass}};
  return j.dump(2);
}

std::vector<TimeSeries> weak_test_functions(const Trajectory& trajectory) {
  const GridPtr& grid = trajectory.states.front().u.grid_ptr();
  const Grid& g = *grid;
  const std::vector<double> times = trajectory.times();
  std::vector<Field> shapes;
  shapes.emplace_back(grid, 1.0);
  constexpr double kPi = 3.14159265358979323846;
  for (std::size_t a = 0; a < g.dimension(); ++a) {
    for (int k = 1; k <= 2; ++k) {
      Field f(grid, 0.0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        f[i] = std::cos(k * kPi * g.center(i, a) / g.length(a));
      }
      shapes.push_back(std::move(f));
    }
  }
  std::vector<TimeSeries> tests;
  for (auto& shape : shapes) {
    TimeSeries ts;
    ts.times = times;
    ts.fields.assign(times.size(), shape);
    tests.push_back(std::move(ts));
  }
  return tests;
}

double default_weak_tolerance(const Trajectory& trajectory) {
  const Grid& g = trajectory.states.front().u.grid();
  double dt = 0.0;
  for (const auto& s : trajectory.steps) dt = std::max(dt, s.dt);
  double h = 0.0;
  for (double x : g.spacing()) h = std::max(h, x);
  double umax = 0.0, vmax = 0.0;
  for (const auto& st : trajectory.states) {
    umax = std::max(umax, st.u.max());
    vmax = std::max(vmax, st.v.max());
  }
  const double scale = std::max(1.0, umax * std::max(1.0, vmax));
  return 10.0 * (dt + h * h) * scale;
}

AdmissibilityReport check_admissible(const Trajectory& trajectory, const Control& control,
                                     const CostParams& cost, const ModelParams& params,
                                     double beta, double K_of_M, double weak_tol,
                                     double energy_tol) {
  AdmissibilityReport r;
  r.control_norm = control_norm(control, cost.q);
  r.in_ball = r.control_norm <= cost.M + 1e-12;
  for (const auto& test : weak_test_functions(trajectory)) {
    r.weak_residual = std::max(r.weak_residual, weak_residual(trajectory, test));
  }
  r.weak_ok = r.weak_residual <= weak_tol;
  Trajectory audited = trajectory;
  audited.params = params;
  r.beta = beta;
  r.K = K_of_M;
  r.energy_residual = energy_inequality_audit(audited, beta, K_of_M).worst_residual;
  r.energy_ok = r.energy_residual <= energy_tol;
  r.pass = r.in_ball && r.weak_ok && r.energy_ok;
  return r;
}

}  // namespace chemo
