#include "chemo/opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "chemo/errors.hpp"
#include "chemo/field_io.hpp"

namespace chemo {

std::size_t CoarseBasis::size() const {
  std::size_t n = time_nodes;
  for (std::size_t s : space_nodes) n *= s;
  return n;
}

void OptimizerConfig::validate() const {
  if (max_iters < 1) throw DomainError("optimizer.max_iters must be >= 1");
  if (!(step0 > 0.0)) throw DomainError("optimizer.step0 must be > 0");
  if (!(shrink > 0.0 && shrink < 1.0)) throw DomainError("optimizer.shrink must lie in (0, 1)");
  if (!(fd_epsilon > 0.0)) throw DomainError("optimizer.fd_epsilon must be > 0");
  if (!(stop_tol >= 0.0)) throw DomainError("optimizer.stop_tol must be >= 0");
  if (basis.time_nodes < 1) throw DomainError("optimizer.basis needs >= 1 time node");
  for (std::size_t s : basis.space_nodes) {
    if (s < 1) throw DomainError("optimizer.basis needs >= 1 node per axis");
  }
  if (starts < 1) throw DomainError("optimizer.starts must be >= 1");
}

namespace {

struct HatWeights {
  std::size_t index = 0;
  double lower = 1.0;  // weight of node `index`; node index+1 gets 1 - lower
};

HatWeights hat(double x, double length, std::size_t nodes) {
  if (nodes <= 1 || length <= 0.0) return {0, 1.0};
  const double p = std::clamp(x / length, 0.0, 1.0) * static_cast<double>(nodes - 1);
  std::size_t j = static_cast<std::size_t>(std::floor(p));
  if (j >= nodes - 1) j = nodes - 2;
  return {j, 1.0 - (p - static_cast<double>(j))};
}

std::vector<double> fine_times(const OptimizationProblem& problem) {
  const double T = problem.model.T_final;
  const std::size_t K = problem.control_levels;
  if (K < 1) throw DomainError("control_levels must be >= 1");
  if (K == 1 || T == 0.0) return {0.0};
  std::vector<double> t(K);
  for (std::size_t k = 0; k < K; ++k) t[k] = T * static_cast<double>(k) / static_cast<double>(K - 1);
  t.back() = T;
  return t;
}

}  // namespace

Control prolong(std::span<const double> coefficients, const OptimizationProblem& problem,
                const CoarseBasis& basis) {
  const GridPtr& grid = problem.u0.grid_ptr();
  const Grid& g = *grid;
  if (basis.space_nodes.size() != g.dimension()) {
    throw StructuralError("coarse basis has " + std::to_string(basis.space_nodes.size()) +
                          " space axes for a " + std::to_string(g.dimension()) + "D grid");
  }
  if (coefficients.size() != basis.size()) {
    throw StructuralError("expected " + std::to_string(basis.size()) + " coefficients, got " +
                          std::to_string(coefficients.size()));
  }
  const std::vector<double> times = fine_times(problem);
  const double T = problem.model.T_final;
  const std::size_t dim = g.dimension();

  // Per-cell spatial stencil: up to 2^dim (node offset, weight) pairs.
  std::vector<std::vector<std::pair<std::size_t, double>>> stencil(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::vector<std::pair<std::size_t, double>> terms{{0, 1.0}};
    std::size_t stride = basis.time_nodes;
    for (std::size_t a = 0; a < dim; ++a) {
      const HatWeights w = hat(g.center(i, a), g.length(a), basis.space_nodes[a]);
      std::vector<std::pair<std::size_t, double>> next;
      for (const auto& [off, wt] : terms) {
        next.emplace_back(off + w.index * stride, wt * w.lower);
        if (basis.space_nodes[a] > 1) {
          next.emplace_back(off + (w.index + 1) * stride, wt * (1.0 - w.lower));
        }
      }
      terms = std::move(next);
      stride *= basis.space_nodes[a];
    }
    stencil[i] = std::move(terms);
  }

  std::vector<Field> levels;
  for (double t : times) {
    const HatWeights wt = hat(t, T, basis.time_nodes);
    Field f(grid, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.in_control(i)) continue;
      double value = 0.0;
      for (const auto& [off, w] : stencil[i]) {
        value += w * wt.lower * coefficients[off + wt.index];
        if (basis.time_nodes > 1) value += w * (1.0 - wt.lower) * coefficients[off + wt.index + 1];
      }
      f[i] = value;
    }
    levels.push_back(std::move(f));
  }
  return Control(times, std::move(levels));
}

std::vector<double> project_coefficients(std::span<const double> coefficients,
                                         const OptimizationProblem& problem,
                                         const CoarseBasis& basis) {
  std::vector<double> c(coefficients.begin(), coefficients.end());
  const double M = problem.cost.M;
  const double q = problem.cost.q;
  double norm = control_norm(prolong(c, problem, basis), q);
  if (norm <= M) return c;
  double factor = M / norm;
  for (int guard = 0; guard < 8; ++guard) {
    std::vector<double> scaled = c;
    for (auto& x : scaled) x *= factor;
    if (control_norm(prolong(scaled, problem, basis), q) <= M) return scaled;
    factor *= 1.0 - 1e-15;
  }
  throw Error("project_coefficients: could not restore feasibility");
}

double Evaluation::value() const {
  return feasible ? J.total() : std::numeric_limits<double>::infinity();
}

Evaluation reduced_objective(std::span<const double> coefficients,
                             const OptimizationProblem& problem, const CoarseBasis& basis) {
  const Control control =
      project_ball(prolong(coefficients, problem, basis), problem.cost.M, problem.cost.q);
  Evaluation e;
  e.control_norm = control_norm(control, problem.cost.q);
  try {
    const Trajectory traj = simulate(problem.u0, problem.v0, control, problem.model, problem.sim);
    e.J = evaluate_J(traj, control, problem.cost, problem.model.s);
  } catch (const StiffnessFailure&) {
    e.feasible = false;
  }
  return e;
}

Gradient fd_gradient(std::span<const double> coefficients, const OptimizationProblem& problem,
                     const OptimizerConfig& config) {
  const double center = reduced_objective(coefficients, problem, config.basis).value();
  return fd_gradient_of(
      [&](std::span<const double> c) {
        return reduced_objective(c, problem, config.basis).value();
      },
      coefficients, center, config.fd_epsilon, config.threads);
}

std::string OptimizationResult::trace_csv() const {
  std::ostringstream out;
  out << "start,iteration,J,J_state_u,J_state_v,J_control,control_norm,step,accepted\n";
  for (const auto& r : trace) {
    out << r.start << ',' << r.iteration << ',' << format_number(r.objective) << ','
        << format_number(r.J.state_u) << ',' << format_number(r.J.state_v) << ','
        << format_number(r.J.control) << ',' << format_number(r.control_norm) << ','
        << format_number(r.step) << ',' << (r.accepted ? 1 : 0) << '\n';
  }
  return out.str();
}

namespace {

struct DescentOutcome {
  OptimizeStatus status;
  std::vector<double> coefficients;
  Evaluation eval;
};

DescentOutcome descend(const OptimizerConfig& config, const OptimizationProblem& problem,
                       std::vector<double> c, Evaluation current, std::size_t start,
                       std::vector<IterationRecord>& trace) {
  auto objective = [&](std::span<const double> x) {
    return reduced_objective(x, problem, config.basis).value();
  };
  trace.push_back({start, 0, current.J, current.value(), current.control_norm, 0.0, true});
  if (current.value() == 0.0) return {OptimizeStatus::converged, c, current};

  double step = config.step0;
  const double step_cap = config.step0 * 1e6;
  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    const Gradient g =
        fd_gradient_of(objective, c, current.value(), config.fd_epsilon, config.threads);
    double gnorm = 0.0;
    for (double x : g.values) gnorm += x * x;
    if (gnorm == 0.0) return {OptimizeStatus::stationary, c, current};

    bool accepted = false;
    for (std::size_t bt = 0; bt < config.max_backtracks; ++bt) {
      std::vector<double> trial(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) trial[i] = c[i] - step * g.values[i];
      trial = project_coefficients(trial, problem, config.basis);
      if (trial == c) break;
      double decrease = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) decrease += g.values[i] * (c[i] - trial[i]);
      const Evaluation e = reduced_objective(trial, problem, config.basis);
      const bool ok = e.feasible && e.value() < current.value() &&
                      e.value() <= current.value() - config.armijo * decrease;
      trace.push_back({start, it, e.J, e.value(), e.control_norm, step, ok});
      if (ok) {
        const double rel = (current.value() - e.value()) / std::abs(current.value());
        c = std::move(trial);
        current = e;
        accepted = true;
        step = std::min(step / config.shrink, step_cap);
        if (rel < config.stop_tol) return {OptimizeStatus::converged, c, current};
        break;
      }
      step *= config.shrink;
    }
    if (!accepted) return {OptimizeStatus::stationary, c, current};
  }
  return {OptimizeStatus::max_iters, c, current};
}

}  // namespace

OptimizationResult optimize(const OptimizerConfig& config, const OptimizationProblem& problem,
                            std::span<const double> initial) {
  config.validate();
  problem.model.validate();
  problem.cost.validate();
  const std::size_t n = config.basis.size();

  OptimizationResult result;
  const std::vector<double> zeros(n, 0.0);
  const Evaluation baseline = reduced_objective(zeros, problem, config.basis);
  if (!baseline.feasible) {
    result.status = OptimizeStatus::infeasible_baseline;
    result.coefficients = zeros;
    result.best = prolong(zeros, problem, config.basis);
    return result;
  }
  result.baseline_J = baseline.value();

  std::vector<double> start0 = initial.empty() ? zeros
                                               : std::vector<double>(initial.begin(), initial.end());
  if (start0.size() != n) throw StructuralError("optimize: initial guess has the wrong size");
  start0 = project_coefficients(start0, problem, config.basis);

  std::mt19937_64 rng(config.seed);
  bool have_best = false;
  DescentOutcome best{};
  for (std::size_t s = 0; s < config.starts; ++s) {
    std::vector<double> c = start0;
    if (s > 0) {
      for (auto& x : c) {
        const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        x = (2.0 * unit - 1.0) * problem.cost.M;
      }
      c = project_coefficients(c, problem, config.basis);
    }
    Evaluation e = initial.empty() && s == 0 ? baseline : reduced_objective(c, problem, config.basis);
    if (!e.feasible) continue;
    DescentOutcome out = descend(config, problem, std::move(c), e, s, result.trace);
    if (!have_best || out.eval.value() < best.eval.value()) {
      best = std::move(out);
      have_best = true;
    }
    if (best.eval.value() == 0.0) break;  // J >= 0, nothing left to gain
  }
  if (!have_best) {
    result.status = OptimizeStatus::infeasible_baseline;
    result.coefficients = zeros;
    result.best = prolong(zeros, problem, config.basis);
    return result;
  }
  // f = 0 is always admissible; never return anything worse.
  if (best.eval.value() > baseline.value()) {
    best.coefficients = zeros;
    best.eval = baseline;
  }
  result.status = best.status;
  result.coefficients = best.coefficients;
  result.best = project_ball(prolong(best.coefficients, problem, config.basis), problem.cost.M,
                             problem.cost.q);
  result.best_J = best.eval.J;
  return result;
}

std::string OrderingTable::to_csv() const {
  std::ostringstream out;
  out << "M,J,control_norm,threshold_ok\n";
  for (const auto& r : rows) {
    out << format_number(r.M) << ',' << format_number(r.J) << ',' << format_number(r.control_norm)
        << ',' << (r.threshold_ok ? 1 : 0) << '\n';
  }
  return out.str();
}

OrderingTable ordering_experiment(std::span<const double> M_values, const OptimizerConfig& config,
                                  const OptimizationProblem& problem) {
  if (M_values.size() < 2) throw DomainError("ordering_experiment needs at least two M values");
  for (std::size_t k = 1; k < M_values.size(); ++k) {
    if (M_values[k] < M_values[k - 1]) {
      throw DomainError("ordering_experiment: M values must be nondecreasing");
    }
  }
  OrderingTable table;
  std::vector<double> warm;
  std::map<double, OrderingRow> done;
  for (double M : M_values) {
    if (auto it = done.find(M); it != done.end()) {
      table.rows.push_back(it->second);
      continue;
    }
    OptimizationProblem p = problem;
    p.cost.M = M;
    const OptimizationResult r = optimize(config, p, warm);
    if (r.status == OptimizeStatus::infeasible_baseline) {
      throw StiffnessFailure("ordering_experiment: infeasible baseline at M = " + std::to_string(M),
                             0.0, 0);
    }
    warm = r.coefficients;
    OrderingRow row;
    row.M = M;
    row.J = r.best_J.total();
    row.control_norm = control_norm(r.best, p.cost.q);
    row.threshold_ok = M >= p.cost.q / p.cost.gamma_f * row.J;
    done[M] = row;
    table.rows.push_back(row);
  }
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    const double prev = table.rows[k - 1].J, cur = table.rows[k].J;
    if (cur > prev + config.stop_tol * std::abs(prev)) table.monotone = false;
  }
  for (const auto& row : table.rows) {
    for (const auto& other : table.rows) {
      if (std::abs(other.M - 2.0 * row.M) <= 1e-12 * other.M &&
          row.J - other.J < config.stop_tol * row.J) {
        if (!table.plateau_M || row.M < *table.plateau_M) table.plateau_M = row.M;
      }
    }
  }
  return table;
}

}  // namespace chemo
