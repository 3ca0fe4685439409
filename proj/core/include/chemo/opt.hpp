#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chemo/cost.hpp"
#include "chemo/sim.hpp"

namespace chemo {

/// Coarse space-time lattice carrying the control coefficients. Nodes are
/// uniform over [0, T] in time and [0, L_a] on each axis; a single node
/// means constant along that direction.
struct CoarseBasis {
  std::size_t time_nodes = 2;
  std::vector<std::size_t> space_nodes;  ///< one entry per grid axis

  std::size_t size() const;
};

struct OptimizerConfig {
  std::size_t max_iters = 50;
  double step0 = 1.0;
  double shrink = 0.5;        ///< backtracking factor in (0, 1)
  double armijo = 1e-4;       ///< sufficient-decrease constant
  std::size_t max_backtracks = 30;
  double fd_epsilon = 1e-4;
  CoarseBasis basis;
  double stop_tol = 1e-6;     ///< relative J decrease that ends the descent
  std::uint64_t seed = 0;
  std::size_t starts = 1;     ///< 1 = start from the initial guess only
  unsigned threads = 0;       ///< 0 = worker_count()

  void validate() const;
};

/// Everything the reduced objective needs besides the coefficients.
struct OptimizationProblem {
  Field u0;
  Field v0;
  ModelParams model;
  CostParams cost;
  SimOptions sim;
  std::size_t control_levels = 9;  ///< fine control time levels on [0, T]
};

/// Multilinear prolongation of coarse coefficients to a fine control (masked).
Control prolong(std::span<const double> coefficients, const OptimizationProblem& problem,
                const CoarseBasis& basis);

/// Coefficients scaled so the prolonged control lies in B_q(M).
std::vector<double> project_coefficients(std::span<const double> coefficients,
                                         const OptimizationProblem& problem,
                                         const CoarseBasis& basis);

struct Evaluation {
  bool feasible = true;
  CostBreakdown J;
  double control_norm = 0.0;
  double value() const;  ///< J total, +inf when infeasible
};

/// Prolong, project onto B_q(M), simulate, evaluate J. A stiffness failure
/// marks the candidate infeasible with +inf objective. Deterministic.
Evaluation reduced_objective(std::span<const double> coefficients,
                             const OptimizationProblem& problem, const CoarseBasis& basis);

struct Gradient {
  std::vector<double> values;
  std::vector<bool> one_sided;  ///< a probe was infeasible for this coordinate
};

/// Central differences of `objective` per coordinate (probes may run
/// concurrently). `center` is the objective at x; an infeasible probe falls
/// back to a one-sided difference against it.
template <class Objective>
Gradient fd_gradient_of(Objective&& objective, std::span<const double> x, double center,
                        double epsilon, unsigned threads);

Gradient fd_gradient(std::span<const double> coefficients, const OptimizationProblem& problem,
                     const OptimizerConfig& config);

struct IterationRecord {
  std::size_t start = 0;
  std::size_t iteration = 0;
  CostBreakdown J;
  double objective = 0.0;
  double control_norm = 0.0;
  double step = 0.0;
  bool accepted = false;
};

enum class OptimizeStatus { converged, max_iters, stationary, infeasible_baseline };

struct OptimizationResult {
  OptimizeStatus status = OptimizeStatus::converged;
  std::vector<double> coefficients;
  Control best;
  CostBreakdown best_J;
  double baseline_J = 0.0;  ///< J at f = 0
  std::vector<IterationRecord> trace;

  /// iteration rows as CSV, byte-stable for identical inputs
  std::string trace_csv() const;
};

/// Projected gradient descent with Armijo backtracking over the coarse
/// coefficients; every iterate is projected into B_q(M) and an iterate is
/// accepted only on strict decrease. Extra starts (config.starts > 1) draw
/// random coefficients from config.seed.
OptimizationResult optimize(const OptimizerConfig& config, const OptimizationProblem& problem,
                            std::span<const double> initial = {});

struct OrderingRow {
  double M = 0.0;
  double J = 0.0;
  double control_norm = 0.0;
  bool threshold_ok = false;  ///< M >= (q / gamma_f) J
};

struct OrderingTable {
  std::vector<OrderingRow> rows;
  bool monotone = true;             ///< J nonincreasing in M within stop_tol * J
  std::optional<double> plateau_M;  ///< smallest M with J(M) - J(2M) < stop_tol J(M)

  std::string to_csv() const;
};

/// optimize for each M (nondecreasing), warm-started from the previous
/// minimizer; repeated M values reuse the previous result.
OrderingTable ordering_experiment(std::span<const double> M_values, const OptimizerConfig& config,
                                  const OptimizationProblem& problem);

}  // namespace chemo

#include "chemo/parallel.hpp"

namespace chemo {

template <class Objective>
Gradient fd_gradient_of(Objective&& objective, std::span<const double> x, double center,
                        double epsilon, unsigned threads) {
  const std::size_t n = x.size();
  std::vector<double> plus(n), minus(n);
  parallel_for(
      2 * n,
      [&](std::size_t job) {
        const std::size_t i = job / 2;
        std::vector<double> probe(x.begin(), x.end());
        probe[i] += (job % 2 == 0) ? epsilon : -epsilon;
        (job % 2 == 0 ? plus : minus)[i] = objective(std::span<const double>(probe));
      },
      threads);
  Gradient g;
  g.values.resize(n);
  g.one_sided.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const bool up = std::isfinite(plus[i]), down = std::isfinite(minus[i]);
    if (up && down) {
      g.values[i] = (plus[i] - minus[i]) / (2.0 * epsilon);
    } else if (up) {
      g.values[i] = (plus[i] - center) / epsilon;
      g.one_sided[i] = true;
    } else if (down) {
      g.values[i] = (center - minus[i]) / epsilon;
      g.one_sided[i] = true;
    } else {
      g.values[i] = 0.0;
      g.one_sided[i] = true;
    }
  }
  return g;
}

}  // namespace chemo
