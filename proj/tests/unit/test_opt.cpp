#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "chemo/errors.hpp"
#include "chemo/opt.hpp"
#include "helpers.hpp"

using namespace chemo;
using namespace chemo::test;

namespace {

OptimizationProblem small_problem() {
  auto g = make_grid(Grid::box({16}, {1.0}).with_control_box({0.0}, {0.5}));
  OptimizationProblem p;
  p.u0 = sample(g, [](double x, double, double) { return 0.5 + 0.3 * std::cos(M_PI * x); });
  p.v0 = sample(g, [](double x, double, double) { return 0.5 + 0.2 * std::cos(M_PI * x); });
  p.model.s = 1.0;
  p.model.q = 3.0;
  p.model.T_final = 0.5;
  p.sim.dt_max = 0.5 / 7;
  p.cost.gamma_u = 0.1;
  p.cost.gamma_v = 1.0;
  p.cost.gamma_f = 0.1;
  p.cost.q = 3.0;
  p.cost.M = 1.0;
  p.cost.u_d = DesiredState::constant(0.5);
  p.cost.v_d = DesiredState::gaussian(0.6, {0.25}, 0.15, 0.3);
  p.control_levels = 8;
  return p;
}

OptimizerConfig small_config() {
  OptimizerConfig c;
  c.basis.time_nodes = 2;
  c.basis.space_nodes = {2};
  c.max_iters = 30;
  return c;
}

}  // namespace

TEST_CASE("prolongation") {
  const OptimizationProblem p = small_problem();
  CoarseBasis b{2, {3}};
  CHECK(b.size() == 6);
  const std::vector<double> ones(6, 1.0);
  const Control f = prolong(ones, p, b);
  CHECK(f.level_count() == 8);
  CHECK(f.times().back() == doctest::Approx(0.5));
  for (const Field& level : f.levels()) {
    for (std::size_t i = 0; i < 16; ++i) CHECK(level[i] == (i < 8 ? doctest::Approx(1.0) : doctest::Approx(0.0)));
  }
  // coefficient at (t = T, x = 0) only: hat in time and space
  std::vector<double> corner(6, 0.0);
  corner[1] = 1.0;
  const Control h = prolong(corner, p, b);
  CHECK(h.levels().front().max() == 0.0);
  CHECK(h.levels().back()[0] == doctest::Approx(1.0 - p.u0.grid().center(0, 0) / 0.5));
  CHECK_THROWS_AS(prolong(std::vector<double>(5, 0.0), p, b), StructuralError);
  CHECK_THROWS_AS(prolong(ones, p, CoarseBasis{2, {3, 3}}), StructuralError);
}

TEST_CASE("reduced objective") {
  const OptimizationProblem p = small_problem();
  const CoarseBasis b{2, {2}};
  const Evaluation zero = reduced_objective(std::vector<double>(4, 0.0), p, b);
  const Trajectory base = simulate(p.u0, p.v0, Control::zero(p.u0.grid_ptr(), 0.5, 8), p.model, p.sim);
  CHECK(zero.feasible);
  CHECK(zero.value() == evaluate_J(base, Control::zero(p.u0.grid_ptr(), 0.5, 8), p.cost, 1.0).total());

  const std::vector<double> big{5.0, -3.0, 4.0, 2.0};
  const std::vector<double> proj = project_coefficients(big, p, b);
  CHECK(control_norm(prolong(proj, p, b), 3.0) <= 1.0 + 1e-12);
  const Evaluation over = reduced_objective(big, p, b);
  CHECK(over.value() == reduced_objective(proj, p, b).value());
  CHECK(over.control_norm <= 1.0 + 1e-12);
  CHECK(reduced_objective(big, p, b).value() == over.value());

  OptimizationProblem stiff = p;
  stiff.cost.M = 1e16;
  const Evaluation bad = reduced_objective(std::vector<double>{1e15, 1e15, 1e15, 1e15}, stiff, b);
  CHECK_FALSE(bad.feasible);
  CHECK(bad.value() == std::numeric_limits<double>::infinity());
}

TEST_CASE("finite-difference gradient") {
  auto quad = [](std::span<const double> x) {
    return 3.0 * x[0] * x[0] + x[0] * x[1] - 2.0 * x[1];
  };
  const std::vector<double> x{0.4, -1.0};
  const Gradient g = fd_gradient_of(quad, x, quad(x), 1e-4, 2);
  CHECK(g.values[0] == doctest::Approx(6.0 * 0.4 - 1.0).epsilon(1e-9));
  CHECK(g.values[1] == doctest::Approx(0.4 - 2.0).epsilon(1e-9));
  CHECK_FALSE(g.one_sided[0]);

  auto wall = [](std::span<const double> x) {
    return x[0] < 1.0 ? std::numeric_limits<double>::infinity() : x[0] * x[0];
  };
  const std::vector<double> at{1.0};
  const Gradient w = fd_gradient_of(wall, at, 1.0, 1e-6, 1);
  CHECK(w.one_sided[0]);
  CHECK(w.values[0] == doctest::Approx(2.0).epsilon(1e-5));

  // coefficients at x >= 0.5 act only outside the control box
  const OptimizationProblem p = small_problem();
  OptimizerConfig c = small_config();
  c.basis = CoarseBasis{2, {3}};
  const Gradient masked = fd_gradient(std::vector<double>(6, 0.1), p, c);
  CHECK(masked.values[4] == 0.0);
  CHECK(masked.values[5] == 0.0);
  CHECK(masked.values[0] != 0.0);
}

TEST_CASE("optimizer: descent, ball, determinism") {
  const OptimizationProblem p = small_problem();
  OptimizerConfig c = small_config();
  c.starts = 3;
  c.seed = 42;
  const OptimizationResult r = optimize(c, p);
  CHECK(r.best_J.total() <= r.baseline_J);
  CHECK(r.best_J.total() < r.baseline_J);
  CHECK(control_norm(r.best, 3.0) <= p.cost.M + 1e-12);
  double last = std::numeric_limits<double>::infinity();
  std::size_t start = 0;
  for (const IterationRecord& rec : r.trace) {
    if (rec.start != start) {
      start = rec.start;
      last = std::numeric_limits<double>::infinity();
    }
    CHECK(rec.control_norm <= p.cost.M + 1e-12);
    if (rec.accepted) {
      CHECK(rec.objective < last);
      last = rec.objective;
    }
  }
  const OptimizationResult again = optimize(c, p);
  CHECK(again.trace_csv() == r.trace_csv());
  CHECK(again.coefficients == r.coefficients);
}

TEST_CASE("optimizer: unreachable improvement and matching targets") {
  OptimizationProblem p = small_problem();
  const Trajectory base = simulate(p.u0, p.v0, Control::zero(p.u0.grid_ptr(), 0.5, 8), p.model, p.sim);
  p.cost.u_d = DesiredState::from_series(base.u_series());
  p.cost.v_d = DesiredState::from_series(base.v_series());
  const OptimizationResult r = optimize(small_config(), p);
  CHECK(r.baseline_J == 0.0);
  CHECK(r.best_J.total() == 0.0);
  CHECK(r.trace.size() == 1);
  CHECK(control_norm(r.best, 3.0) == 0.0);
}

TEST_CASE("ordering over M") {
  const OptimizationProblem p = small_problem();
  OptimizerConfig c = small_config();
  c.max_iters = 15;
  const std::vector<double> Ms{0.25, 0.5, 0.5, 1.0, 2.0};
  const OrderingTable t = ordering_experiment(Ms, c, p);
  REQUIRE(t.rows.size() == 5);
  CHECK(t.monotone);
  CHECK(t.rows[1].J == t.rows[2].J);
  for (std::size_t k = 1; k < t.rows.size(); ++k) CHECK(t.rows[k].J <= t.rows[k - 1].J);
  for (const OrderingRow& row : t.rows) CHECK(row.control_norm <= row.M + 1e-12);
  CHECK(t.to_csv().rfind("M,J,control_norm,threshold_ok\n", 0) == 0);
  const std::vector<double> unsorted{1.0, 0.5};
  CHECK_THROWS(ordering_experiment(unsorted, c, p));
}
