#include "chemo/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "chemo/errors.hpp"

namespace chemo {

void ModelParams::validate() const {
  if (!(s >= 1.0)) throw DomainError("model.s must be >= 1");
  if (!(alpha > 0.0)) throw DomainError("model.alpha must be > 0");
  if (!(m > 0.0)) throw DomainError("model.m must be > 0");
  if (!(q > 2.5)) throw DomainError("model.q must be > 5/2");
  if (!(T_final >= 0.0) || !std::isfinite(T_final)) {
    throw DomainError("model.T_final must be finite and >= 0");
  }
}

double truncate(double r, double m) {
  if (r < 0.0) throw DomainError("truncate: negative argument " + std::to_string(r));
  if (r <= m) return r;
  return m + 1.0 - std::exp(-(r - m));
}

double truncate_derivative(double r, double m) {
  if (r < 0.0) throw DomainError("truncate_derivative: negative argument " + std::to_string(r));
  if (r <= m) return 1.0;
  return std::exp(-(r - m));
}

Field truncate(const Field& u, double m) {
  Field out = u;
  for (auto& x : out) x = truncate(x, m);
  return out;
}

double g_energy(double u, double s) {
  if (s < 1.0) throw DomainError("g_energy: s must be >= 1");
  if (u < 0.0) throw DomainError("g_energy: negative density");
  if (s == 1.0) return (u + 1.0) * std::log1p(u) - u;
  return std::pow(u, s) / (s * (s - 1.0));
}

double g_m_energy(double u, double s, double m) {
  if (s < 1.0) throw DomainError("g_m_energy: s must be >= 1");
  if (u < 0.0) throw DomainError("g_m_energy: negative density");
  const double knee = std::min(u, m);
  double value = g_energy(knee, s);
  if (u <= m) return value;

  auto integrand = [s, m](double theta) {
    const double t = truncate(theta, m);
    return s == 1.0 ? std::log1p(t) : std::pow(t, s - 1.0) / (s - 1.0);
  };
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  const double tail = gauss_kronrod<double, 31>::integrate(integrand, m, u, 12, 1e-13, &error);
  if (error > 1e-10 * std::max(1.0, std::abs(tail))) {
    throw Error("g_m_energy: tail quadrature did not reach tolerance");
  }
  return value + tail;
}

Field z_transform(const Field& v, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("z_transform: alpha must be > 0");
  Field z = v;
  const double a2 = alpha * alpha;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (v[i] < 0.0) {
      throw DomainError("z_transform: negative concentration " + std::to_string(v[i]) +
                        " at cell " + std::to_string(i));
    }
    z[i] = std::sqrt(v[i] + a2);
  }
  return z;
}

Field z_inverse(const Field& z, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("z_inverse: alpha must be > 0");
  Field v = z;
  const double a2 = alpha * alpha;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (z[i] < alpha) {
      throw DomainError("z_inverse: value " + std::to_string(z[i]) + " below alpha at cell " +
                        std::to_string(i));
    }
    v[i] = z[i] * z[i] - a2;
  }
  return v;
}

bool power_difference_bound_holds(double w1, double w2, double s) {
  const double lhs = std::abs(std::pow(w2, s) - std::pow(w1, s));
  const double rhs = s * std::pow(std::abs(w2 + w1), s - 1.0) * std::abs(w2 - w1);
  // Slack scales with the magnitude of the powers (cancellation in lhs).
  const double scale = std::max({1.0, std::pow(w1, s), std::pow(w2, s)});
  return lhs <= rhs + 1e-12 * scale;
}

}  // namespace chemo
