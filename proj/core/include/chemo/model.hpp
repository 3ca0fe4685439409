#pragma once

#include "chemo/grid.hpp"

namespace chemo {

/// Parameters of the controlled truncated chemotaxis-consumption system.
struct ModelParams {
  double s = 1.0;        ///< consumption exponent, s >= 1
  double alpha = 0.1;    ///< shift in z = sqrt(v + alpha^2)
  double m = 1.0e6;      ///< truncation level
  double q = 3.0;        ///< control integrability exponent, q > 5/2
  double T_final = 1.0;  ///< time horizon

  /// Throws DomainError naming the first violated constraint.
  void validate() const;
};

/// Smooth cap T^m: identity up to m, then m + 1 - exp(-(r - m)).
/// C^1, nondecreasing, 1-Lipschitz, bounded by min(r, m + 1).
double truncate(double r, double m);
double truncate_derivative(double r, double m);
Field truncate(const Field& u, double m);

/// Entropy density g: (u+1)ln(u+1) - u for s = 1, u^s / (s(s-1)) for s > 1.
/// For s slightly above 1 the 1/(s-1) factor is evaluated as written.
double g_energy(double u, double s);

/// Truncated entropy g_m(u) = int_0^u g_m'(theta) dtheta with
/// g_m' = ln(T^m + 1) (s = 1) or T^m^(s-1)/(s-1) (s > 1). Exact on [0, min(u, m)],
/// adaptive Gauss-Kronrod on the tail (relative tolerance 1e-13).
double g_m_energy(double u, double s, double m);

/// Cellwise sqrt(v + alpha^2); DomainError naming the cell if v < 0.
Field z_transform(const Field& v, double alpha);
/// Cellwise z^2 - alpha^2; DomainError naming the cell if z < alpha.
Field z_inverse(const Field& z, double alpha);

/// |w2^s - w1^s| <= s |w2 + w1|^(s-1) |w2 - w1|, checked with 1e-12 slack.
bool power_difference_bound_holds(double w1, double w2, double s);

}  // namespace chemo
