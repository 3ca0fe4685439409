#pragma once

#include <string>
#include <vector>

#include "chemo/sim.hpp"

namespace chemo {

/// (sum_k trapezoid weight_k * ||field_k||_p^p)^(1/p). A single-level series
/// has zero length in time and norm 0. p < 1 is a DomainError.
double spacetime_lp_norm(const TimeSeries& series, double p);

/// ||f||_{L^q(Q)} of a control.
double control_norm(const Control& control, double q);

/// Desired state (u_d or v_d): an analytic preset or a sampled series.
class DesiredState {
 public:
  enum class Kind { constant, gaussian, decaying, series };

  DesiredState() = default;
  static DesiredState constant(double value);
  /// base + amplitude * exp(-|x - center|^2 / (2 width^2))
  static DesiredState gaussian(double amplitude, std::vector<double> center, double width,
                               double base = 0.0);
  /// gaussian profile scaled by exp(-rate * t)
  static DesiredState decaying(double amplitude, std::vector<double> center, double width,
                               double rate, double base = 0.0);
  static DesiredState from_series(TimeSeries series);

  Kind kind() const noexcept { return kind_; }
  Field sample(double t, const GridPtr& grid) const;

 private:
  Kind kind_ = Kind::constant;
  double amplitude_ = 0.0;
  double base_ = 0.0;
  double width_ = 1.0;
  double rate_ = 0.0;
  std::vector<double> center_;
  TimeSeries series_;
};

struct CostParams {
  double gamma_u = 1.0;
  double gamma_v = 1.0;
  double gamma_f = 1.0;
  double q = 3.0;
  double M = 1.0;
  DesiredState u_d;
  DesiredState v_d;

  void validate() const;
};

struct CostBreakdown {
  double state_u = 0.0;  ///< 3 gamma_u / (5s) * int ||u - u_d||_{5s/3}^{5s/3}
  double state_v = 0.0;  ///< gamma_v / 2 * int ||v - v_d||_2^2
  double control = 0.0;  ///< gamma_f / q * int ||f||_q^q
  double total() const noexcept { return state_u + state_v + control; }
};

/// J on the trajectory's saved levels (trapezoid in time) and the control's
/// own time levels.
CostBreakdown evaluate_J(const Trajectory& trajectory, const Control& control,
                         const CostParams& cost, double s);

/// Radial retraction onto B_q(M): unchanged inside, scaled by M / ||f||_q outside.
Control project_ball(const Control& control, double M, double q);

struct AdmissibilityReport {
  double control_norm = 0.0;
  bool in_ball = false;
  double weak_residual = 0.0;
  bool weak_ok = false;
  double energy_residual = 0.0;
  bool energy_ok = false;
  double beta = 0.0;
  double K = 0.0;
  bool pass = false;

  std::string to_json() const;
};

/// Time-constant test functions used for the weak-form check: the constant
/// and cos(k pi x_a / L_a) for k = 1, 2 on every axis.
std::vector<TimeSeries> weak_test_functions(const Trajectory& trajectory);

/// Default weak-residual tolerance 10 (dt_max + h_max^2) scale, scale =
/// max(1, max_t ||u||_inf * max(1, max_t ||v||_inf)).
double default_weak_tolerance(const Trajectory& trajectory);

/// S_ad^M audit: ||f||_q <= M (1e-12 slack), worst weak residual over
/// weak_test_functions() <= weak_tol, and the energy audit with K = K_of_M
/// at <= energy_tol.
AdmissibilityReport check_admissible(const Trajectory& trajectory, const Control& control,
                                     const CostParams& cost, const ModelParams& params,
                                     double beta, double K_of_M, double weak_tol,
                                     double energy_tol = 0.0);

}  // namespace chemo
