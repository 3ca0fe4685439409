#include <benchmark/benchmark.h>

#include <cmath>

#include "chemo/linear_solver.hpp"
#include "chemo/opt.hpp"
#include "chemo/sim.hpp"

using namespace chemo;

namespace {

GridPtr square(std::size_t n) { return make_grid(Grid::box({n, n}, {1.0, 1.0})); }

Field bump(const GridPtr& g, double base, double amp) {
  Field f(g);
  for (std::size_t i = 0; i < g->size(); ++i) {
    f[i] = base + amp * std::cos(M_PI * g->center(i, 0)) * std::cos(M_PI * g->center(i, 1));
  }
  return f;
}

void BM_Step(benchmark::State& st) {
  const GridPtr g = square(static_cast<std::size_t>(st.range(0)));
  const State s0{bump(g, 1.0, 0.5), bump(g, 1.0, -0.3), 0.0};
  const Field f(g, 0.5);
  ModelParams p;
  for (auto _ : st) benchmark::DoNotOptimize(step(s0, f, p, 1e-3));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(g->size()));
}
BENCHMARK(BM_Step)->Arg(16)->Arg(32)->Arg(64);

void BM_Solve(benchmark::State& st) {
  const GridPtr g = square(static_cast<std::size_t>(st.range(0)));
  const DiffusionSystem sys(g, 1e-3, std::vector<double>(g->size(), 1.0));
  const Field rhs = bump(g, 1.0, 0.5);
  SolverOptions o;
  o.kind = st.range(1) == 0 ? SolverKind::cholesky : SolverKind::conjugate_gradient;
  for (auto _ : st) benchmark::DoNotOptimize(sys.solve(rhs, o));
}
BENCHMARK(BM_Solve)->ArgsProduct({{16, 32, 64}, {0, 1}})->ArgNames({"n", "cg"});

void BM_Simulate(benchmark::State& st) {
  const GridPtr g = square(32);
  ModelParams p;
  p.T_final = 0.1;
  SimOptions o;
  o.dt_max = 1e-3;
  o.save_every = 10;
  const Field u0 = bump(g, 1.0, 0.5), v0 = bump(g, 1.0, -0.3);
  const Control f = Control::constant(g, p.T_final, 2, 0.5);
  for (auto _ : st) benchmark::DoNotOptimize(simulate(u0, v0, f, p, o));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

void BM_ReducedObjective(benchmark::State& st) {
  const GridPtr g = make_grid(Grid::box({16}, {1.0}));
  OptimizationProblem prob;
  prob.u0 = Field(g, 0.5);
  prob.v0 = Field(g, 0.5);
  prob.model.T_final = 0.5;
  prob.sim.dt_max = 0.5 / 7;
  prob.cost.u_d = DesiredState::constant(0.5);
  prob.cost.v_d = DesiredState::gaussian(0.6, {0.25}, 0.15, 0.3);
  prob.control_levels = 8;
  const CoarseBasis basis{2, {2}};
  const std::vector<double> c{0.1, -0.2, 0.3, 0.0};
  for (auto _ : st) benchmark::DoNotOptimize(reduced_objective(c, prob, basis));
}
BENCHMARK(BM_ReducedObjective);

}  // namespace

BENCHMARK_MAIN();
