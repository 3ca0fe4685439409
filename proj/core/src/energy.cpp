#include "chemo/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "chemo/cost.hpp"
#include "chemo/errors.hpp"

namespace chemo {

double energy_value(const State& state, const ModelParams& params, bool truncated) {
  const Field z = z_transform(state.v, params.alpha);
  double entropy = 0.0;
  for (double u : state.u) {
    entropy += truncated ? g_m_energy(u, params.s, params.m) : g_energy(u, params.s);
  }
  entropy *= state.u.grid().cell_volume();
  const double grad = h1_seminorm(z);
  return params.s / 4.0 * entropy + 0.5 * grad * grad;
}

DissipationTerms& DissipationTerms::operator+=(const DissipationTerms& o) {
  entropy += o.entropy;
  cross += o.cross;
  hessian += o.hessian;
  quartic += o.quartic;
  control_forcing += o.control_forcing;
  return *this;
}

DissipationTerms dissipation_rates(const State& state, const Field& control_slice,
                                   const ModelParams& params, bool truncated) {
  const Field density = truncated ? truncate(state.u, params.m) : state.u;
  const Field z = z_transform(state.v, params.alpha);
  const Field grad_z = gradient_norm_sq(z);
  const double vol = density.grid().cell_volume();

  Field lifted = density;
  for (auto& x : lifted) x = std::pow(x + 1.0, params.s / 2.0);

  DissipationTerms d;
  d.entropy = integrate(gradient_norm_sq(lifted));
  d.hessian = hessian_norm_sq(z);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double us = params.s == 1.0 ? density[i] : std::pow(density[i], params.s);
    d.cross += us * grad_z[i];
    d.quartic += grad_z[i] * grad_z[i] / (z[i] * z[i]);
  }
  d.cross *= vol;
  d.quartic *= vol;
  const double f2 = lp_norm(control_slice, 2.0);
  d.control_forcing = f2 * f2;
  return d;
}

namespace {

DissipationTerms trapezoid(const DissipationTerms& a, const DissipationTerms& b, double dt) {
  DissipationTerms r;
  r.entropy = 0.5 * dt * (a.entropy + b.entropy);
  r.cross = 0.5 * dt * (a.cross + b.cross);
  r.hessian = 0.5 * dt * (a.hessian + b.hessian);
  r.quartic = 0.5 * dt * (a.quartic + b.quartic);
  r.control_forcing = 0.5 * dt * (a.control_forcing + b.control_forcing);
  return r;
}

std::size_t level_index(const std::vector<double>& times, double t) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(times[k] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return k;
  }
  throw StructuralError("time " + std::to_string(t) + " is not a saved level; no interpolation");
}

}  // namespace

EnergyReport energy_report(const Trajectory& trajectory, bool truncated) {
  EnergyReport report;
  report.truncated = truncated;
  std::vector<DissipationTerms> rates;
  for (const auto& st : trajectory.states) {
    report.times.push_back(st.t);
    report.energy.push_back(energy_value(st, trajectory.params, truncated));
    rates.push_back(dissipation_rates(st, trajectory.control.at(st.t), trajectory.params, truncated));
  }
  for (std::size_t k = 0; k + 1 < rates.size(); ++k) {
    report.intervals.push_back(
        trapezoid(rates[k], rates[k + 1], report.times[k + 1] - report.times[k]));
  }
  return report;
}

DissipationTerms dissipation_terms(const Trajectory& trajectory, double t1, double t2,
                                   bool truncated) {
  if (!(t1 < t2)) throw DomainError("dissipation_terms: need t1 < t2");
  const auto times = trajectory.times();
  const std::size_t i = level_index(times, t1);
  const std::size_t j = level_index(times, t2);
  DissipationTerms total;
  DissipationTerms prev = dissipation_rates(trajectory.states[i], trajectory.control.at(times[i]),
                                            trajectory.params, truncated);
  for (std::size_t k = i; k < j; ++k) {
    const DissipationTerms next =
        dissipation_rates(trajectory.states[k + 1], trajectory.control.at(times[k + 1]),
                          trajectory.params, truncated);
    total += trapezoid(prev, next, times[k + 1] - times[k]);
    prev = next;
  }
  return total;
}

namespace {

// Running value A_k = E_k + beta * (entropy + hessian + quartic) + cross/4,
// accumulated from level 0; the pair residual is A_j - A_i - K.
std::vector<double> accumulated(const EnergyReport& report, double beta) {
  std::vector<double> a(report.energy.size());
  double dissipated = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (k > 0) {
      const auto& d = report.intervals[k - 1];
      dissipated += beta * (d.entropy + d.hessian + d.quartic) + 0.25 * d.cross;
    }
    a[k] = report.energy[k] + dissipated;
  }
  return a;
}

}  // namespace

AuditResult energy_inequality_audit(const EnergyReport& report, double beta, double K) {
  if (report.intervals.size() + 1 != report.energy.size()) {
    throw StructuralError("energy_inequality_audit: inconsistent report");
  }
  AuditResult result;
  result.worst_residual = -K;
  if (report.energy.size() < 2) return result;
  const std::vector<double> a = accumulated(report, beta);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  for (std::size_t j = 1; j < a.size(); ++j) {
    if (a[j - 1] < a[argmin]) argmin = j - 1;
    const double r = a[j] - a[argmin];
    if (r > best) {
      best = r;
      result.first = argmin;
      result.second = j;
    }
  }
  result.worst_residual = best - K;
  return result;
}

AuditResult energy_inequality_audit(const Trajectory& trajectory, double beta, double K,
                                    bool truncated) {
  return energy_inequality_audit(energy_report(trajectory, truncated), beta, K);
}

std::vector<PairResidual> audit_pairs(const EnergyReport& report, double beta, double K) {
  const std::vector<double> a = accumulated(report, beta);
  std::vector<PairResidual> pairs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      pairs.push_back({report.times[i], report.times[j], a[j] - a[i] - K});
    }
  }
  return pairs;
}

double ConstantsFit::K_at(double norm) const {
  if (K.empty()) return 0.0;
  if (K.size() == 1 || norm <= control_norms.front()) return K.front();
  for (std::size_t k = 0; k + 1 < K.size(); ++k) {
    if (norm <= control_norms[k + 1]) {
      const double span = control_norms[k + 1] - control_norms[k];
      if (span <= 0.0) return std::max(K[k], K[k + 1]);
      const double w = (norm - control_norms[k]) / span;
      return (1.0 - w) * K[k] + w * K[k + 1];
    }
  }
  const std::size_t n = K.size();
  const double span = control_norms[n - 1] - control_norms[n - 2];
  const double slope = span > 0.0 ? std::max(0.0, (K[n - 1] - K[n - 2]) / span) : 0.0;
  return K[n - 1] + slope * (norm - control_norms[n - 1]);
}

ConstantsFit fit_constants(std::span<const Trajectory> trajectories, bool truncated) {
  if (trajectories.empty()) throw DomainError("fit_constants: no trajectories");
  struct Entry {
    double norm;
    EnergyReport report;
  };
  std::vector<Entry> entries;
  for (const auto& t : trajectories) {
    entries.push_back({control_norm(t.control, t.params.q), energy_report(t, truncated)});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.norm < b.norm; });
  if (entries.size() >= 2 && entries.front().norm == entries.back().norm) {
    throw DomainError("fit_constants: trajectories need distinct control norms");
  }

  ConstantsFit fit;
  auto slack = [](const EnergyReport& r, double beta) {
    return std::max(0.0, energy_inequality_audit(r, beta, 0.0).worst_residual);
  };
  constexpr double kBetaMin = 1e-6, kBetaMax = 1.0, kTol = 1e-8;
  for (const auto& e : entries) {
    const double k = slack(e.report, kBetaMin);
    if (!std::isfinite(k)) {
      fit.feasible = false;
      fit.message = "audit-infeasible: no finite K at beta = 1e-6 for ||f||_q = " +
                    std::to_string(e.norm);
      return fit;
    }
  }

  const EnergyReport& base = entries.front().report;
  const double base_slack = slack(base, kBetaMin);
  auto admissible = [&](double beta) { return slack(base, beta) <= base_slack + kTol; };
  if (admissible(kBetaMax)) {
    fit.beta = kBetaMax;
  } else {
    double lo = std::log(kBetaMin), hi = std::log(kBetaMax);
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (admissible(std::exp(mid)) ? lo : hi) = mid;
    }
    fit.beta = std::exp(lo);
  }

  for (const auto& e : entries) {
    fit.control_norms.push_back(e.norm);
    fit.K.push_back(slack(e.report, fit.beta));
  }
  for (std::size_t k = 1; k < fit.K.size(); ++k) {
    if (fit.K[k] + kTol < fit.K[k - 1]) fit.monotone = false;
  }
  fit.message = fit.monotone ? "ok" : "fitted K is not nondecreasing in the control norm";
  return fit;
}

std::string to_json(const EnergyReport& report) {
  nlohmann::json j;
  j["times"] = report.times;
  j["energy"] = report.energy;
  j["truncated"] = report.truncated;
  j["beta_used"] = report.beta_used;
  j["K_used"] = report.K_used;
  nlohmann::json intervals = nlohmann::json::array();
  for (const auto& d : report.intervals) {
    intervals.push_back({{"dissipation_entropy", d.entropy},
                         {"dissipation_cross", d.cross},
                         {"dissipation_hessian", d.hessian},
                         {"dissipation_quartic", d.quartic},
                         {"control_forcing", d.control_forcing}});
  }
  j["intervals"] = intervals;
  return j.dump(2);
}

std::string to_json(const ConstantsFit& fit) {
  nlohmann::json j;
  j["feasible"] = fit.feasible;
  j["message"] = fit.message;
  j["beta"] = fit.beta;
  j["control_norms"] = fit.control_norms;
  j["K"] = fit.K;
  j["monotone"] = fit.monotone;
  return j.dump(2);
}

}  // namespace chemo
