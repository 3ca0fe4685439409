#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "chemo/cost.hpp"
#include "chemo/errors.hpp"
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

Control random_control(const GridPtr& g, std::size_t levels, std::mt19937_64& rng, double amp) {
  std::vector<double> t;
  std::vector<Field> f;
  for (std::size_t k = 0; k < levels; ++k) {
    t.push_back(k / (levels - 1.0));
    f.push_back(random_field(g, rng, -amp, amp));
  }
  return Control(t, f);
}

double distance(const Control& a, const Control& b, double q) {
  std::vector<Field> d;
  for (std::size_t k = 0; k < a.level_count(); ++k) d.push_back(a.levels()[k] - b.levels()[k]);
  return control_norm(Control(a.times(), d), q);
}

}  // namespace

TEST_CASE("space-time norms") {
  auto g = square(5);
  TimeSeries zero{{0.0, 0.5, 1.0}, std::vector<Field>(3, Field(g))};
  CHECK(spacetime_lp_norm(zero, 3.0) == 0.0);
  TimeSeries c{{0.0, 0.25, 1.0}, std::vector<Field>(3, Field(g, -1.7))};
  for (double p : {1.0, 2.0, 2.7, 5.0}) CHECK(spacetime_lp_norm(c, p) == doctest::Approx(1.7));
  CHECK(spacetime_lp_norm(c, std::numeric_limits<double>::infinity()) == 1.7);
  // two levels: 0 then c over [0, 0.8] on a domain of measure 1
  const double cv = 2.0, p = 3.0;
  TimeSeries two{{0.0, 0.8}, {Field(g), Field(g, cv)}};
  CHECK(std::abs(spacetime_lp_norm(two, p) - std::pow(0.5 * 0.8 * std::pow(cv, p), 1 / p)) <= 1e-14);
  CHECK_THROWS_AS(spacetime_lp_norm(two, 0.9), DomainError);
  CHECK(spacetime_lp_norm(TimeSeries{{0.0}, {Field(g, 3.0)}}, 2.0) == 0.0);
}

TEST_CASE("desired states") {
  auto g = line(10);
  CHECK(DesiredState::constant(2.0).sample(0.3, g).max() == 2.0);
  const Field gauss = DesiredState::gaussian(1.0, {0.25}, 0.1, 0.5).sample(0.0, g);
  CHECK(gauss[2] == doctest::Approx(1.5));
  CHECK(gauss[9] == doctest::Approx(0.5 + std::exp(-0.7 * 0.7 / 0.02)));
  const Field decayed = DesiredState::decaying(1.0, {0.25}, 0.1, 2.0).sample(1.0, g);
  CHECK(decayed[2] == doctest::Approx(std::exp(-2.0)));
  TimeSeries s{{0.0, 1.0}, {Field(g, 0.0), Field(g, 4.0)}};
  CHECK(DesiredState::from_series(s).sample(0.25, g)[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(DesiredState::gaussian(1.0, {0.5}, 0.0), DomainError);
  CHECK_THROWS_AS(DesiredState::gaussian(1.0, {0.5, 0.5}, 0.1).sample(0.0, g), StructuralError);
}

TEST_CASE("objective values") {
  auto g = line(16);
  // no cells, constant chemical: trajectory is exactly the initial state
  const Trajectory eq = simulate(Field(g, 0.0), Field(g, 1.0), Control::zero(g, 1, 1), params(), options(0.1));
  CostParams cp;
  cp.u_d = DesiredState::constant(0.0);
  cp.v_d = DesiredState::constant(1.0);
  const CostBreakdown zero = evaluate_J(eq, eq.control, cp, 1.0);
  CHECK(zero.total() == 0.0);

  const double lambda = 0.7;
  cp.gamma_f = 2.0;
  const Control f = Control::constant(g, 1.0, 5, lambda);
  const CostBreakdown only_f = evaluate_J(eq, f, cp, 1.0);
  CHECK(only_f.state_u == 0.0);
  CHECK(only_f.state_v == 0.0);
  CHECK(only_f.control == doctest::Approx(2.0 / 3.0 * std::pow(lambda, 3.0)));

  // s = 3: exponent 5, prefactor gamma_u / 5, brute-force sum
  std::mt19937_64 rng(1);
  ModelParams p3 = params(3.0, 0.2);
  const Trajectory tr = simulate(random_field(g, rng, 0, 2), random_field(g, rng, 0, 2),
                                 Control::zero(g, 0.2, 1), p3, options(0.05));
  CostParams c3;
  c3.gamma_u = 1.3;
  c3.gamma_v = 0.4;
  c3.u_d = DesiredState::constant(0.5);
  c3.v_d = DesiredState::constant(0.1);
  const CostBreakdown b = evaluate_J(tr, tr.control, c3, 3.0);
  double su = 0.0, sv = 0.0;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const double w = (k == 0 ? 0.0 : 0.5 * (tr.states[k].t - tr.states[k - 1].t)) +
                     (k + 1 == tr.states.size() ? 0.0 : 0.5 * (tr.states[k + 1].t - tr.states[k].t));
    for (std::size_t i = 0; i < g->size(); ++i) {
      su += w * std::pow(std::abs(tr.states[k].u[i] - 0.5), 5.0) / 16.0;
      sv += w * std::pow(tr.states[k].v[i] - 0.1, 2.0) / 16.0;
    }
  }
  CHECK(b.state_u == doctest::Approx(1.3 / 5.0 * su).epsilon(1e-12));
  CHECK(b.state_v == doctest::Approx(0.2 * sv).epsilon(1e-12));
  CHECK(b.control == 0.0);
}

TEST_CASE("objective is nonnegative and monotone in the weights") {
  std::mt19937_64 rng(2);
  auto g = line(12);
  const Control f = random_control(g, 3, rng, 1.0);
  const Trajectory tr = simulate(random_field(g, rng, 0, 1), random_field(g, rng, 0, 1), f, params(), options(0.05));
  CostParams base;
  base.u_d = DesiredState::constant(0.3);
  base.v_d = DesiredState::gaussian(1.0, {0.5}, 0.2);
  const double J0 = evaluate_J(tr, f, base, 1.0).total();
  CHECK(J0 > 0.0);
  for (int w = 0; w < 3; ++w) {
    CostParams more = base;
    (w == 0 ? more.gamma_u : w == 1 ? more.gamma_v : more.gamma_f) *= 1.5;
    CHECK(evaluate_J(tr, f, more, 1.0).total() > J0);
  }
}

TEST_CASE("ball projection") {
  std::mt19937_64 rng(3);
  auto g = square(6);
  const double q = 3.0, M = 1.0;
  Control f = random_control(g, 4, rng, 1.0);
  f = f.scaled(0.5 * M / control_norm(f, q));
  CHECK(distance(project_ball(f, M, q), f, q) == 0.0);
  const Control big = f.scaled(4.0);  // norm 2M
  const Control pb = project_ball(big, M, q);
  CHECK(control_norm(pb, q) <= M + 1e-12);
  CHECK(control_norm(pb, q) == doctest::Approx(M));
  CHECK(pb.levels()[1][3] == doctest::Approx(0.5 * big.levels()[1][3]));

  for (double qq : {2.0, 3.0, 5.0}) {
    for (int rep = 0; rep < 20; ++rep) {
      const Control a = random_control(g, 3, rng, 5.0);
      const Control pa = project_ball(a, M, qq);
      CHECK(control_norm(pa, qq) <= M + 1e-12);
      CHECK(distance(project_ball(pa, M, qq), pa, qq) == 0.0);
      if (qq == 2.0) {
        const Control b = random_control(g, 3, rng, 2.0);
        CHECK(distance(pa, project_ball(b, M, qq), qq) <= distance(a, b, qq) + 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(project_ball(f, 0.0, q), DomainError);
}

TEST_CASE("admissibility report") {
  auto g = line(16);
  const Trajectory eq = simulate(Field(g, 0.0), Field(g, 1.0), Control::zero(g, 1, 1), params(), options(0.1));
  CostParams cp;
  const AdmissibilityReport ok = check_admissible(eq, eq.control, cp, params(), 1e-3, 0.0, 1e-12);
  CHECK(ok.pass);
  CHECK(ok.weak_residual == 0.0);

  const Control twice = Control::constant(g, 1.0, 2, 2.0 * cp.M);
  const AdmissibilityReport out = check_admissible(eq, twice, cp, params(), 1e-3, 0.0, 1e-12);
  CHECK_FALSE(out.in_ball);
  CHECK_FALSE(out.pass);

  const Field u0 = sample(g, [](double x, double, double) { return 1.0 + 0.5 * std::cos(M_PI * x); });
  const Field v0 = sample(g, [](double x, double, double) { return 1.0 + 0.3 * std::cos(2 * M_PI * x); });
  const Control f = Control::constant(g, 1.0, 3, 0.5);
  const Trajectory tr = simulate(u0, v0, f, params(), options(0.01));
  const AdmissibilityReport r =
      check_admissible(tr, f, cp, params(), 1e-3, 10.0, default_weak_tolerance(tr));
  CHECK(r.weak_ok);
  CHECK(r.in_ball);
  CHECK(r.energy_ok);
  CHECK(r.pass);
  CHECK(weak_test_functions(tr).size() == 3);
}
