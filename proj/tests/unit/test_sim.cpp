#include <doctest.h>

#include <cmath>
#include <random>

#include "chemo/errors.hpp"
#include "chemo/sim.hpp"
#include "helpers.hpp"

using namespace chemo;
using namespace chemo::test;

namespace {

ModelParams params(double s = 1.0, double T = 1.0) {
  ModelParams p;
  p.s = s;
  p.T_final = T;
  return p;
}

SimOptions options(double dt_max) {
  SimOptions o;
  o.dt_max = dt_max;
  return o;
}

Field smooth_u(const GridPtr& g, double base, double amp) {
  return sample(g, [&](double x, double y, double) {
    return base + amp * std::cos(M_PI * x) * (g->dimension() > 1 ? std::cos(M_PI * y) : 1.0);
  });
}

Field smooth_v(const GridPtr& g, double base, double amp) {
  return sample(g, [&](double x, double y, double) {
    return base + amp * std::cos(2 * M_PI * x + 0.3) * (g->dimension() > 1 ? std::cos(M_PI * y) : 1.0);
  });
}

Control random_control(const GridPtr& g, double T, std::size_t levels, std::mt19937_64& rng,
                       double lo, double hi) {
  std::vector<double> times;
  std::vector<Field> fields;
  for (std::size_t k = 0; k < levels; ++k) {
    times.push_back(T * k / (levels - 1.0));
    fields.push_back(random_field(g, rng, lo, hi));
  }
  return Control(times, fields);
}

}  // namespace

TEST_CASE("control construction") {
  auto g = make_grid(Grid::box({8}, {1.0}).with_control_box({0.0}, {0.5}));
  const Control c = Control::constant(g, 2.0, 5, 3.0);
  CHECK(c.level_count() == 5);
  CHECK(c.times().back() == 2.0);
  CHECK(c.levels()[2][0] == 3.0);
  CHECK(c.levels()[2][7] == 0.0);  // outside the control region
  CHECK(c.max_positive() == 3.0);
  CHECK(c.scaled(-1.0).max_positive() == 0.0);
  CHECK(Control::constant(g, 0.0, 5, 1.0).level_count() == 1);
  CHECK_THROWS_AS(Control({0.5}, {Field(g)}), DomainError);
  CHECK_THROWS_AS(Control({0.0, 0.0}, {Field(g), Field(g)}), DomainError);
  CHECK_THROWS_AS(Control({0.0}, {}), StructuralError);
  const Field mid = Control({0.0, 1.0}, {Field(g, 0.0), Field(g, 2.0)}).at(0.25);
  CHECK(mid[0] == doctest::Approx(0.5));
}

TEST_CASE("step: equilibria and exact growth") {
  auto g = square(6);
  const ModelParams p = params();
  // no cells, constant chemical
  State s0{Field(g, 0.0), Field(g, 2.5), 0.0};
  State s1 = step(s0, Field(g, 0.0), p, 0.1);
  CHECK(max_abs_diff(s1.u, s0.u) == 0.0);
  CHECK(max_abs_diff(s1.v, s0.v) == 0.0);
  CHECK(s1.t == doctest::Approx(0.1));

  // v' = lambda v, backward Euler factor 1 / (1 - dt lambda)
  const double lambda = 1.5, dt = 0.05;
  State e{Field(g, 0.0), Field(g, 1.0), 0.0};
  for (int k = 1; k <= 10; ++k) {
    e = step(e, Field(g, lambda), p, dt);
    for (double v : e.v) CHECK(v == doctest::Approx(std::pow(1.0 / (1.0 - dt * lambda), k)));
  }

  // no chemical: nothing moves whatever the control
  std::mt19937_64 rng(1);
  State c{Field(g, 0.8), Field(g, 0.0), 0.0};
  const State c1 = step(c, random_field(g, rng, -2, 2), p, 0.1);
  for (double u : c1.u) CHECK(u == 0.8);
  for (double v : c1.v) CHECK(v == 0.0);
}

TEST_CASE("step: admissibility errors") {
  auto g = line(16);
  const ModelParams p = params();
  State s{Field(g, 1.0), Field(g, 1.0), 0.0};
  try {
    step(s, Field(g, 4.0), p, 0.5);
    FAIL("expected StepSizeError");
  } catch (const StepSizeError& e) {
    CHECK(e.admissible_dt() < 0.25);
    CHECK(e.admissible_dt() * 4.0 < 1.0);
  }
  State steep{smooth_u(g, 5.0, 4.0), smooth_v(g, 50.0, 40.0), 0.0};
  try {
    step(steep, Field(g, 0.0), p, 0.5);
    FAIL("expected StepSizeError");
  } catch (const StepSizeError& e) {
    CHECK(e.admissible_dt() > 0.0);
    CHECK(e.admissible_dt() < 0.5);
  }
  State neg{Field(g, 1.0), Field(g, 1.0), 0.0};
  neg.u[3] = -1e-3;
  CHECK_THROWS_AS(step(neg, Field(g, 0.0), p, 0.1), DomainError);
  CHECK_THROWS_AS(step(s, Field(line(8), 0.0), p, 0.1), StructuralError);
}

TEST_CASE("simulate: zero horizon and analytic runs") {
  auto g = line(20);
  const Trajectory t0 =
      simulate(Field(g, 1.0), Field(g, 2.0), Control::zero(g, 0.0, 1), params(1, 0.0), options(0.1));
  CHECK(t0.states.size() == 1);
  CHECK(t0.steps.empty());

  const double lambda = 0.8;
  std::vector<double> errs;
  for (double dt : {0.02, 0.01, 0.005}) {
    const Trajectory tr = simulate(Field(g, 0.0), Field(g, 1.0), Control::constant(g, 1.0, 2, lambda),
                                   params(), options(dt));
    CHECK(tr.states.back().t == 1.0);
    errs.push_back(std::abs(tr.states.back().v.max() - std::exp(lambda)));
    CHECK(errs.back() < 2.0 * dt * std::exp(lambda));
  }
  CHECK(std::log2(errs[0] / errs[1]) >= 0.9);
  CHECK(std::log2(errs[1] / errs[2]) >= 0.9);

  const Trajectory still = simulate(Field(g, 0.0), Field(g, 3.0), Control::zero(g, 1.0, 2), params(),
                                    options(0.05));
  for (const auto& s : still.states) CHECK(s.v.min() == 3.0);
  const Trajectory nochem = simulate(Field(g, 0.4), Field(g, 0.0), Control::constant(g, 1.0, 3, 2.0),
                                     params(), options(0.05));
  for (const auto& s : nochem.states) {
    CHECK(s.u.min() == 0.4);
    CHECK(s.v.max() == 0.0);
  }
}

TEST_CASE("simulate: mass conservation and positivity on random data") {
  std::mt19937_64 rng(21);
  for (double s : {1.0, 2.0, 3.0}) {
    for (bool controlled : {false, true}) {
      auto g = square(12);
      const Field u0 = random_field(g, rng, 0.0, 3.0);
      const Field v0 = random_field(g, rng, 0.0, 2.0);
      const Control c = controlled ? random_control(g, 0.5, 4, rng, -3.0, 3.0) : Control::zero(g, 0.5, 1);
      const Trajectory tr = simulate(u0, v0, c, params(s, 0.5), options(0.01));
      const double m0 = integrate(u0);
      for (const auto& st : tr.states) {
        CHECK(std::abs(integrate(st.u) - m0) <= 1e-12 * m0);
        CHECK(st.u.min() >= 0.0);
        CHECK(st.v.min() >= 0.0);
      }
    }
  }
}

TEST_CASE("simulate: adaptive stepping") {
  auto g = line(64);
  const Field u0 = smooth_u(g, 4.0, 3.0), v0 = smooth_v(g, 10.0, 8.0);
  const Trajectory tr = simulate(u0, v0, Control::zero(g, 0.2, 1), params(1, 0.2), options(0.1));
  CHECK(tr.rejected_steps > 0);
  CHECK(tr.states.back().t == 0.2);
  double total = 0.0;
  for (const auto& r : tr.steps) {
    CHECK(r.cfl_number <= 0.9);
    CHECK(r.dt <= 0.1);
    total += r.dt;
  }
  CHECK(total == doctest::Approx(0.2));

  CHECK_THROWS_AS(simulate(Field(g, 1.0), Field(g, 1.0), Control::constant(g, 1.0, 2, 1e14), params(),
                           options(0.1)),
                  StiffnessFailure);
}

TEST_CASE("simulate: saving cadence") {
  auto g = line(10);
  SimOptions o = options(0.01);
  o.save_every = 7;
  const Trajectory tr = simulate(smooth_u(g, 1, 0.5), smooth_v(g, 1, 0.5), Control::zero(g, 1, 1), params(), o);
  CHECK(tr.steps.size() == 100);
  CHECK(tr.states.size() == 1 + 14 + 1);
  CHECK(tr.states.back().t == 1.0);
}

TEST_CASE("simulate: truncation level is irrelevant while inactive") {
  auto g = line(32);
  const Field u0 = smooth_u(g, 1.0, 0.5), v0 = smooth_v(g, 1.0, 0.3);
  ModelParams a = params(2.0), b = params(2.0);
  a.m = 4.0;
  b.m = 8.0;
  const Trajectory ta = simulate(u0, v0, Control::constant(g, 1, 2, 0.5), a, options(0.01));
  const Trajectory tb = simulate(u0, v0, Control::constant(g, 1, 2, 0.5), b, options(0.01));
  REQUIRE(ta.states.size() == tb.states.size());
  for (std::size_t k = 0; k < ta.states.size(); ++k) {
    CHECK(ta.states[k].u.max() < a.m);
    CHECK(max_abs_diff(ta.states[k].u, tb.states[k].u) <= 1e-8);
    CHECK(max_abs_diff(ta.states[k].v, tb.states[k].v) <= 1e-8);
  }
}

TEST_CASE("simulate: conjugate gradient reproduces the direct solver") {
  auto g = square(10);
  const Field u0 = smooth_u(g, 1.0, 0.5), v0 = smooth_v(g, 1.0, 0.3);
  SimOptions cg = options(0.01);
  cg.step.solver.kind = SolverKind::conjugate_gradient;
  const Trajectory a = simulate(u0, v0, Control::constant(g, 0.5, 2, 0.5), params(1, 0.5), options(0.01));
  const Trajectory b = simulate(u0, v0, Control::constant(g, 0.5, 2, 0.5), params(1, 0.5), cg);
  CHECK(max_abs_diff(a.states.back().u, b.states.back().u) < 1e-8);
  CHECK(max_abs_diff(a.states.back().v, b.states.back().v) < 1e-8);
}

TEST_CASE("comparison problem") {
  auto g = line(32);
  const Field w0 = smooth_v(g, 1.0, 0.6);
  const TimeSeries heat = solve_comparison(w0, Control::zero(g, 1, 1), params(), options(0.01));
  const double mass = integrate(w0);
  double prev_max = w0.max();
  for (const auto& w : heat.fields) {
    CHECK(integrate(w) == doctest::Approx(mass).epsilon(1e-12));
    CHECK(w.max() <= prev_max + 1e-15);
    prev_max = w.max();
  }

  const TimeSeries growth =
      solve_comparison(Field(g, 1.0), Control::constant(g, 1, 2, 0.7), params(), options(0.001));
  CHECK(growth.times.back() == 1.0);
  CHECK(growth.fields.back().max() == doctest::Approx(std::exp(0.7)).epsilon(1e-3));

  // a negative control does not feed the comparison problem
  const TimeSeries neg =
      solve_comparison(Field(g, 1.0), Control::constant(g, 1, 2, -3.0), params(), options(0.01));
  CHECK(neg.fields.back().max() == doctest::Approx(1.0));
}

TEST_CASE("comparison bound on randomized controls") {
  std::mt19937_64 rng(33);
  for (int rep = 0; rep < 10; ++rep) {
    auto g = rep % 2 ? square(10) : line(40);
    const double s = rep % 3 == 0 ? 2.0 : 1.0;
    const Field u0 = random_field(g, rng, 0.0, 2.0), v0 = random_field(g, rng, 0.0, 1.5);
    const Control c = random_control(g, 0.5, 5, rng, -4.0, 4.0);
    const SimOptions o = options(0.01);
    const Trajectory tr = simulate(u0, v0, c, params(s, 0.5), o);
    const TimeSeries w = solve_comparison(v0, c, params(s, 0.5), o, tr.step_times());
    REQUIRE(w.size() == tr.states.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
      CHECK(w.times[k] == tr.states[k].t);
      double excess = -1.0;
      for (std::size_t i = 0; i < g->size(); ++i) excess = std::max(excess, tr.states[k].v[i] - w.fields[k][i]);
      CHECK(excess <= 1e-10);
    }
  }
}

TEST_CASE("weak residual") {
  auto g = line(32);
  const Trajectory eq = simulate(Field(g, 0.0), Field(g, 1.0), Control::zero(g, 1, 1), params(), options(0.05));
  std::mt19937_64 rng(4);
  TimeSeries phi;
  for (const auto& st : eq.states) {
    phi.times.push_back(st.t);
    phi.fields.push_back(random_field(g, rng, -1, 1));
  }
  CHECK(weak_residual(eq, phi) == 0.0);

  const Field u0 = smooth_u(g, 1.0, 0.5), v0 = smooth_v(g, 1.0, 0.4);
  const Trajectory tr = simulate(u0, v0, Control::constant(g, 1, 2, 0.3), params(), options(0.01));
  TimeSeries one{tr.times(), std::vector<Field>(tr.states.size(), Field(g, 1.0))};
  CHECK(weak_residual(tr, one) <= 1e-12);

  std::vector<double> res;
  for (double dt : {0.01, 0.005, 0.0025, 0.00125}) {
    const Trajectory t = simulate(u0, v0, Control::constant(g, 1, 2, 0.3), params(), options(dt));
    const Field c = sample(g, [](double x, double, double) { return std::cos(M_PI * x); });
    TimeSeries test{t.times(), std::vector<Field>(t.states.size(), c)};
    res.push_back(weak_residual(t, test));
  }
  for (std::size_t k = 1; k < res.size(); ++k) CHECK(std::log2(res[k - 1] / res[k]) >= 0.9);

  TimeSeries wrong{{0.0}, {Field(g)}};
  CHECK_THROWS_AS(weak_residual(tr, wrong), StructuralError);
}
