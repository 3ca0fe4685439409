#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "chemo/grid.hpp"

namespace chemo::test {

inline GridPtr line(std::size_t n, double length = 1.0) {
  return make_grid(Grid::box({n}, {length}));
}

inline GridPtr square(std::size_t n, double length = 1.0) {
  return make_grid(Grid::box({n, n}, {length, length}));
}

inline Field random_field(const GridPtr& g, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Field f(g);
  for (auto& x : f) x = dist(rng);
  return f;
}

template <class F>
Field sample(const GridPtr& g, F&& fn) {
  Field f(g);
  for (std::size_t i = 0; i < g->size(); ++i) {
    double x[3] = {0, 0, 0};
    for (std::size_t a = 0; a < g->dimension(); ++a) x[a] = g->center(i, a);
    f[i] = fn(x[0], x[1], x[2]);
  }
  return f;
}

inline double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double dot(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid().cell_volume();
}

}  // namespace chemo::test
