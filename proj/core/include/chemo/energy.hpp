#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "chemo/sim.hpp"

namespace chemo {

/// E(u,z) = s/4 * int g(u) + 1/2 * |grad z|^2 with z = sqrt(v + alpha^2).
/// `truncated` swaps g for the truncated entropy g_m.
double energy_value(const State& state, const ModelParams& params, bool truncated);

/// Space integrals of the dissipation densities (at one level) or their time
/// integrals (over an interval).
struct DissipationTerms {
  double entropy = 0.0;          ///< |grad (u+1)^(s/2)|^2
  double cross = 0.0;            ///< u^s |grad z|^2
  double hessian = 0.0;          ///< |D^2 z|^2
  double quartic = 0.0;          ///< |grad z|^4 / z^2
  double control_forcing = 0.0;  ///< |f|^2

  DissipationTerms& operator+=(const DissipationTerms& o);
};

/// Densities integrated over the domain at one state. With `truncated` the
/// density enters through T^m(u).
DissipationTerms dissipation_rates(const State& state, const Field& control_slice,
                                   const ModelParams& params, bool truncated = false);

struct EnergyReport {
  std::vector<double> times;
  std::vector<double> energy;
  std::vector<DissipationTerms> intervals;  ///< trapezoid over [times[k], times[k+1]]
  double beta_used = 0.0;
  double K_used = 0.0;
  bool truncated = false;
};

EnergyReport energy_report(const Trajectory& trajectory, bool truncated = false);

/// Trapezoidal dissipation integrals over [t1, t2]; both must be saved levels,
/// otherwise StructuralError.
DissipationTerms dissipation_terms(const Trajectory& trajectory, double t1, double t2,
                                   bool truncated = false);

struct AuditResult {
  double worst_residual = 0.0;
  std::size_t first = 0;   ///< saved-level index of t1 at the worst pair
  std::size_t second = 0;  ///< saved-level index of t2 at the worst pair
};

struct PairResidual {
  double t1 = 0.0;
  double t2 = 0.0;
  double residual = 0.0;
};

/// max over saved pairs t1 < t2 of
///   E(t2) + beta (entropy + hessian + quartic) + cross / 4 - E(t1) - K.
/// Positive means the inequality fails at this (beta, K). A report with a
/// single level has no pairs and returns -K.
AuditResult energy_inequality_audit(const EnergyReport& report, double beta, double K);
AuditResult energy_inequality_audit(const Trajectory& trajectory, double beta, double K,
                                    bool truncated = false);
std::vector<PairResidual> audit_pairs(const EnergyReport& report, double beta, double K);

struct ConstantsFit {
  bool feasible = true;
  std::string message;
  double beta = 0.0;
  std::vector<double> control_norms;  ///< ||f||_q, ascending
  std::vector<double> K;              ///< minimal admissible K per control norm
  bool monotone = true;               ///< K nondecreasing in ||f||_q within 1e-8

  /// Piecewise linear in ||f||_q, extended with the last nonnegative slope.
  double K_at(double control_norm) const;
};

/// Picks the largest beta in [1e-6, 1] (bisection in log beta) at which the
/// least-forced trajectory needs no more slack K than at beta = 1e-6, then
/// reports per trajectory K = max(0, audit residual at K = 0) and whether K
/// grows with the control norm.
ConstantsFit fit_constants(std::span<const Trajectory> trajectories, bool truncated = false);

std::string to_json(const EnergyReport& report);
std::string to_json(const ConstantsFit& fit);

}  // namespace chemo
