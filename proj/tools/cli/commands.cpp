#include "cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "chemo/energy.hpp"
#include "chemo/errors.hpp"
#include "chemo/field_io.hpp"
#include "chemo/opt.hpp"
#include "chemo/trajectory_io.hpp"
#include "cli/config.hpp"

namespace chemo::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::vector<std::string> overrides;
  std::string out;
  bool no_timestamp = false;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  auto* config = cmd->add_option("-c,--config", c.config, "run configuration (.json or .toml)");
  auto* preset = cmd->add_option("-p,--preset", c.preset, "built-in configuration")
                     ->check(CLI::IsMember(preset_names()));
  config->excludes(preset);
  cmd->add_option("-s,--set", c.overrides, "override a scalar field, e.g. model.s=2");
  cmd->add_option("-o,--out", c.out, "output directory (overrides the config)");
  cmd->add_flag("--no-timestamp", c.no_timestamp, "omit the creation time from manifests");
  cmd->add_option("--threads", c.threads, "worker threads for finite-difference probes");
}

RunConfig load(const Common& c) {
  nlohmann::json doc;
  fs::path base = fs::current_path();
  if (!c.config.empty()) {
    doc = load_document(c.config);
    base = fs::absolute(c.config).parent_path();
  } else if (!c.preset.empty()) {
    doc = preset_document(c.preset);
  } else {
    throw ConfigError("give --config FILE or --preset NAME");
  }
  for (const auto& o : c.overrides) apply_override(doc, o);
  RunConfig rc = parse_config(doc, base);
  if (!c.out.empty()) rc.output_dir = c.out;
  if (c.threads > 0) rc.optimizer.threads = c.threads;
  return rc;
}

std::string timestamp(const Common& c) {
  if (c.no_timestamp) return {};
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void write_text(const fs::path& path, const std::string& body) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << body;
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

ojson breakdown_json(const CostBreakdown& b) {
  return {{"state_u", b.state_u}, {"state_v", b.state_v}, {"control", b.control},
          {"total", b.total()}};
}

const char* status_name(OptimizeStatus s) {
  switch (s) {
    case OptimizeStatus::converged: return "converged";
    case OptimizeStatus::max_iters: return "max_iters";
    case OptimizeStatus::stationary: return "stationary";
    case OptimizeStatus::infeasible_baseline: return "infeasible_baseline";
  }
  return "unknown";
}

// simulate / compare

int cmd_simulate(const Common& c, bool force_compare, std::ostream& out) {
  const RunConfig rc = load(c);
  const Trajectory traj = simulate(rc.u0, rc.v0, rc.control, rc.model, rc.sim);
  const fs::path dir = rc.output_dir;
  write_trajectory(dir / "trajectory", traj, timestamp(c));

  const double mass0 = integrate(traj.states.front().u);
  double max_drift = 0.0;
  std::size_t neg_u = 0, neg_v = 0;
  double min_u = traj.states.front().u.min(), min_v = traj.states.front().v.min(), max_v = 0.0;
  std::string mass_csv = "t,mass_u,min_u,min_v,max_v,mean_v\n";
  for (const State& s : traj.states) {
    const double mass = integrate(s.u);
    const double scale = std::max(std::abs(mass0), 1e-300);
    max_drift = std::max(max_drift, std::abs(mass - mass0) / scale);
    for (double x : s.u) neg_u += x < 0.0;
    for (double x : s.v) neg_v += x < 0.0;
    min_u = std::min(min_u, s.u.min());
    min_v = std::min(min_v, s.v.min());
    max_v = std::max(max_v, s.v.max());
    mass_csv += format_number(s.t) + "," + format_number(mass) + "," + format_number(s.u.min()) +
                "," + format_number(s.v.min()) + "," + format_number(s.v.max()) + "," +
                format_number(integrate(s.v) / s.v.grid().measure()) + "\n";
  }
  write_text(dir / "mass.csv", mass_csv);
  if (mass0 == 0.0) max_drift = std::abs(integrate(traj.states.back().u));
  const std::size_t mass_violations = max_drift > 1e-10 ? 1 : 0;

  ojson summary;
  summary["steps"] = traj.steps.size();
  summary["rejected_steps"] = traj.rejected_steps;
  summary["saved_levels"] = traj.states.size();
  summary["final_time"] = traj.states.back().t;
  summary["mass"] = {{"initial", mass0},
                     {"final", integrate(traj.states.back().u)},
                     {"max_relative_drift", max_drift}};
  summary["min_u"] = min_u;
  summary["min_v"] = min_v;
  summary["max_v"] = max_v;
  ojson violations = {{"negative_u_cells", neg_u},
                      {"negative_v_cells", neg_v},
                      {"mass_drift", mass_violations}};
  std::size_t total = neg_u + neg_v + mass_violations;

  if (rc.compare || force_compare) {
    const TimeSeries w =
        solve_comparison(rc.v0, rc.control, rc.model, rc.sim, traj.step_times());
    write_series(dir / "comparison", w, "w");
    std::size_t excess_cells = 0;
    double max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < traj.states.size() && k < w.size(); ++k) {
      const Field& v = traj.states[k].v;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double e = v[i] - w.fields[k][i];
        max_excess = std::max(max_excess, e);
        excess_cells += e > 1e-10;
      }
    }
    violations["comparison"] = excess_cells;
    summary["comparison"] = {{"levels", w.size()}, {"max_v_minus_w", max_excess}};
    total += excess_cells;
  }

  if (rc.control_is_uniform && rc.u0.max() == 0.0) {
    // u = 0 and f = lambda everywhere: v' = lambda v, v = v0 exp(lambda t).
    const double lambda = rc.control_value;
    double discrete = 1.0;
    std::size_t step_index = 0;
    double worst_observed = 0.0, worst_scheme = 0.0;
    std::string trace = "t,mean_v,exact,backward_euler\n";
    const double v0 = integrate(rc.v0) / rc.grid->measure();
    for (const State& s : traj.states) {
      while (step_index < traj.steps.size() && traj.steps[step_index].t <= s.t) {
        discrete /= 1.0 - traj.steps[step_index].dt * lambda;
        ++step_index;
      }
      const double mean = integrate(s.v) / s.v.grid().measure();
      const double exact = v0 * std::exp(lambda * s.t);
      if (exact > 0.0) {
        worst_observed = std::max(worst_observed, std::abs(mean - exact) / exact);
        worst_scheme = std::max(worst_scheme, std::abs(v0 * discrete - exact) / exact);
      }
      trace += format_number(s.t) + "," + format_number(mean) + "," + format_number(exact) +
               "," + format_number(v0 * discrete) + "\n";
    }
    write_text(dir / "exponential.csv", trace);
    const bool within = worst_observed <= worst_scheme * (1.0 + 1e-6) + 1e-12;
    summary["exponential_reference"] = {{"lambda", lambda},
                                        {"max_relative_error", worst_observed},
                                        {"scheme_error", worst_scheme},
                                        {"within_scheme_error", within}};
    violations["exponential_reference"] = within ? 0 : 1;
    total += within ? 0 : 1;
  }
  summary["violations"] = violations;
  write_json(dir / "summary.json", summary);
  out << "simulated " << traj.steps.size() << " steps to t = " << format_number(traj.states.back().t)
      << "; violations: " << total << "; wrote " << dir.string() << "\n";
  return total == 0 ? kOk : kAuditFail;
}

// energy-audit

struct AuditArgs {
  std::string trajectory;
  std::optional<double> beta;
  std::optional<double> K;
  bool truncated = false;
};

int cmd_energy_audit(const Common& c, const AuditArgs& a, std::ostream& out) {
  double beta = 1e-3, K = 0.0;
  fs::path dir = "out";
  if (!c.config.empty() || !c.preset.empty()) {
    const RunConfig rc = load(c);
    beta = rc.audit_beta;
    K = rc.audit_K.value_or(0.0);
    dir = rc.output_dir;
  }
  if (!c.out.empty()) dir = c.out;
  if (a.beta) beta = *a.beta;
  if (a.K) K = *a.K;
  if (!(beta > 0.0)) throw ConfigError("--beta must be > 0");

  const Trajectory traj = read_trajectory(a.trajectory);
  EnergyReport report = energy_report(traj, a.truncated);
  report.beta_used = beta;
  report.K_used = K;
  const AuditResult result = energy_inequality_audit(report, beta, K);

  std::string csv = "t1,t2,residual\n";
  for (const auto& p : audit_pairs(report, beta, K)) {
    csv += format_number(p.t1) + "," + format_number(p.t2) + "," + format_number(p.residual) + "\n";
  }
  write_text(dir / "energy_residuals.csv", csv);
  write_text(dir / "energy_report.json", to_json(report) + "\n");
  const bool pass = result.worst_residual <= 0.0;
  out << "worst residual " << format_number(result.worst_residual) << " at beta "
      << format_number(beta) << ", K " << format_number(K) << ": " << (pass ? "pass" : "fail")
      << "\n";
  return pass ? kOk : kAuditFail;
}

// optimize

struct AdmissibleConstants {
  double beta;
  double K;
};

AdmissibleConstants admissibility_constants(const RunConfig& rc, const Control& best) {
  if (rc.audit_K) return {rc.audit_beta, *rc.audit_K};
  // Fit beta and K(.) on the ray through the returned control, evaluated at M.
  std::vector<Trajectory> runs;
  runs.push_back(simulate(rc.u0, rc.v0, best.scaled(0.0), rc.model, rc.sim));
  const double norm = control_norm(best, rc.cost.q);
  if (norm > 0.0) {
    runs.push_back(simulate(rc.u0, rc.v0, best.scaled(rc.cost.M / norm), rc.model, rc.sim));
  }
  const ConstantsFit fit = fit_constants(runs);
  if (!fit.feasible) return {rc.audit_beta, std::numeric_limits<double>::infinity()};
  return {fit.beta, fit.K_at(rc.cost.M)};
}

int cmd_optimize(const Common& c, const std::vector<double>& sweep_M, bool m_sweep,
                 std::ostream& out) {
  const RunConfig rc = load(c);
  const OptimizationProblem problem = rc.problem();
  const OptimizationResult r = optimize(rc.optimizer, problem);
  const fs::path dir = rc.output_dir;
  if (r.status == OptimizeStatus::infeasible_baseline) {
    out << "baseline (f = 0) simulation is infeasible\n";
    return kInfeasible;
  }
  write_text(dir / "trace.csv", r.trace_csv());
  write_series(dir / "control", r.best.series(), "f");
  const Trajectory traj = simulate(rc.u0, rc.v0, r.best, rc.model, rc.sim);
  write_trajectory(dir / "trajectory", traj, timestamp(c));

  ojson cost;
  cost["status"] = status_name(r.status);
  cost["baseline_J"] = r.baseline_J;
  cost["J"] = breakdown_json(r.best_J);
  cost["control_norm"] = control_norm(r.best, rc.cost.q);
  cost["M"] = rc.cost.M;
  cost["coefficients"] = r.coefficients;
  cost["iterations"] = r.trace.size();
  write_json(dir / "cost.json", cost);

  const AdmissibleConstants k = admissibility_constants(rc, r.best);
  const double weak_tol = rc.weak_tol.value_or(default_weak_tolerance(traj));
  const AdmissibilityReport adm =
      check_admissible(traj, r.best, rc.cost, rc.model, k.beta, k.K, weak_tol);
  write_text(dir / "admissibility.json", adm.to_json() + "\n");

  out << "J = " << format_number(r.best_J.total()) << " (baseline "
      << format_number(r.baseline_J) << ", " << status_name(r.status) << "); admissibility "
      << (adm.pass ? "pass" : "fail") << "\n";

  if (m_sweep) {
    std::vector<double> Ms = sweep_M.empty() ? rc.M_values : sweep_M;
    if (Ms.size() < 2) throw ConfigError("the M sweep needs at least two values (sweep.M_values)");
    std::sort(Ms.begin(), Ms.end());
    const OrderingTable table = ordering_experiment(Ms, rc.optimizer, problem);
    write_text(dir / "ordering.csv", table.to_csv());
    ojson summary = {{"monotone", table.monotone}};
    summary["plateau_M"] = table.plateau_M ? ojson(*table.plateau_M) : ojson(nullptr);
    write_json(dir / "ordering.json", summary);
    out << "M sweep: J " << (table.monotone ? "nonincreasing" : "NOT monotone") << " over "
        << Ms.size() << " values\n";
    if (!table.monotone) return kAuditFail;
  }
  return adm.pass ? kOk : kAuditFail;
}

// sweep

int cmd_sweep(const Common& c, const std::string& kind, std::ostream& out) {
  const RunConfig rc = load(c);
  const fs::path dir = rc.output_dir;
  if (kind == "constants") {
    if (control_norm(rc.control, rc.model.q) == 0.0) {
      throw ConfigError("sweep constants: control is zero, nothing to scale");
    }
    std::vector<Trajectory> runs;
    for (double lambda : rc.lambdas) {
      runs.push_back(simulate(rc.u0, rc.v0, rc.control.scaled(lambda), rc.model, rc.sim));
    }
    const ConstantsFit fit = fit_constants(runs);
    write_text(dir / "constants.json", to_json(fit) + "\n");
    std::string csv = "control_norm,K\n";
    for (std::size_t k = 0; k < fit.K.size(); ++k) {
      csv += format_number(fit.control_norms[k]) + "," + format_number(fit.K[k]) + "\n";
    }
    write_text(dir / "constants.csv", csv);
    if (!fit.feasible) {
      out << "constant fit infeasible: " << fit.message << "\n";
      return kInfeasible;
    }
    out << "beta* = " << format_number(fit.beta) << "; K " << (fit.monotone ? "nondecreasing" : "NOT monotone")
        << " in ||f||_q\n";
    return fit.monotone ? kOk : kAuditFail;
  }
  if (kind == "m") {
    std::string csv = "m,max_v_inf,max_u_inf\n";
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double m : rc.m_values) {
      ModelParams p = rc.model;
      p.m = m;
      const Trajectory t = simulate(rc.u0, rc.v0, rc.control, p, rc.sim);
      double vmax = 0.0, umax = 0.0;
      for (const State& s : t.states) {
        vmax = std::max(vmax, s.v.max());
        umax = std::max(umax, s.u.max());
      }
      lo = std::min(lo, vmax);
      hi = std::max(hi, vmax);
      csv += format_number(m) + "," + format_number(vmax) + "," + format_number(umax) + "\n";
    }
    write_text(dir / "m_sweep.csv", csv);
    out << "max_t ||v||_inf relative variation over m: " << format_number(hi > 0 ? (hi - lo) / hi : 0.0)
        << "\n";
    return kOk;
  }
  if (kind == "alpha") {
    std::string csv = "alpha,worst_residual,monotone_energy\n";
    for (double alpha : rc.alpha_values) {
      ModelParams p = rc.model;
      p.alpha = alpha;
      const Trajectory t = simulate(rc.u0, rc.v0, rc.control, p, rc.sim);
      const EnergyReport rep = energy_report(t);
      bool monotone = true;
      for (std::size_t k = 1; k < rep.energy.size(); ++k) {
        monotone = monotone && rep.energy[k] <= rep.energy[k - 1] + 1e-8 * rep.energy.front();
      }
      const double res = energy_inequality_audit(rep, rc.audit_beta, rc.audit_K.value_or(0.0))
                             .worst_residual;
      csv += format_number(alpha) + "," + format_number(res) + "," + (monotone ? "1" : "0") + "\n";
    }
    write_text(dir / "alpha_sweep.csv", csv);
    out << "wrote " << (dir / "alpha_sweep.csv").string() << "\n";
    return kOk;
  }
  if (kind == "M") {
    std::vector<double> Ms = rc.M_values;
    if (Ms.size() < 2) throw ConfigError("sweep.M_values needs at least two values");
    std::sort(Ms.begin(), Ms.end());
    const OrderingTable table = ordering_experiment(Ms, rc.optimizer, rc.problem());
    write_text(dir / "ordering.csv", table.to_csv());
    out << "M sweep: J " << (table.monotone ? "nonincreasing" : "NOT monotone") << "\n";
    return table.monotone ? kOk : kAuditFail;
  }
  throw ConfigError("unknown sweep kind '" + kind + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Controlled chemotaxis-consumption simulator, energy auditor and optimizer",
               "chemo"};
  app.require_subcommand(1);
  Common common;

  auto* sim = app.add_subcommand("simulate", "run the truncated controlled system");
  add_common(sim, common);
  auto* cmp = app.add_subcommand("compare", "simulate and audit v <= w against the comparison problem");
  add_common(cmp, common);

  AuditArgs audit;
  auto* aud = app.add_subcommand("energy-audit", "audit the energy inequality on a trajectory");
  add_common(aud, common);
  aud->add_option("-t,--trajectory", audit.trajectory, "trajectory directory")->required();
  aud->add_option("--beta", audit.beta, "dissipation weight beta > 0");
  aud->add_option("--K", audit.K, "slack constant K");
  aud->add_flag("--truncated", audit.truncated, "use the truncated energy g_m");

  std::vector<double> sweep_M;
  bool m_sweep = false;
  auto* opt = app.add_subcommand("optimize", "minimize J over the control ball");
  add_common(opt, common);
  opt->add_flag("--m-sweep", m_sweep, "also run the M ordering experiment");
  opt->add_option("--M-values", sweep_M, "M values for --m-sweep (default sweep.M_values)");

  std::string kind = "constants";
  auto* swp = app.add_subcommand("sweep", "parameter sweeps: constants, m, alpha, M");
  add_common(swp, common);
  swp->add_option("-k,--kind", kind, "constants | m | alpha | M")
      ->check(CLI::IsMember({"constants", "m", "alpha", "M"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (sim->parsed()) return cmd_simulate(common, false, out);
    if (cmp->parsed()) return cmd_simulate(common, true, out);
    if (aud->parsed()) return cmd_energy_audit(common, audit, out);
    if (opt->parsed()) return cmd_optimize(common, sweep_M, m_sweep, out);
    if (swp->parsed()) return cmd_sweep(common, kind, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const StiffnessFailure& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kConfigError;
}

}  // namespace chemo::cli
