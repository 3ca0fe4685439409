#include <doctest.h>

#include <random>

#include "chemo/errors.hpp"
#include "chemo/linear_solver.hpp"
#include "helpers.hpp"

using namespace chemo;
using namespace chemo::test;

namespace {

std::vector<double> random_diagonal(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.5, 3.0);
  std::vector<double> out(n);
  for (auto& x : out) x = d(rng);
  return out;
}

double residual(const DiffusionSystem& sys, const Field& x, const Field& b) {
  std::vector<double> y(x.size());
  sys.apply(x.values(), y);
  double r = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    r += (y[i] - b[i]) * (y[i] - b[i]);
    nb += b[i] * b[i];
  }
  return std::sqrt(r / nb);
}

}  // namespace

TEST_CASE("apply matches diag - dt * laplacian") {
  std::mt19937_64 rng(1);
  auto g = square(7);
  const auto d = random_diagonal(g->size(), rng);
  const DiffusionSystem sys(g, 0.3, d);
  const Field x = random_field(g, rng);
  std::vector<double> y(x.size());
  sys.apply(x.values(), y);
  const Field lap = laplacian_neumann(x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(d[i] * x[i] - 0.3 * lap[i]));
}

TEST_CASE("cholesky and conjugate gradient agree") {
  std::mt19937_64 rng(2);
  for (auto g : {line(50), square(12), make_grid(Grid::box({5, 4, 6}, {1.0, 2.0, 0.5}))}) {
    const DiffusionSystem sys(g, 0.05, random_diagonal(g->size(), rng));
    const Field b = random_field(g, rng, -1, 1);
    const Field xc = sys.solve(b, {SolverKind::cholesky});
    const Field xg = sys.solve(b, {SolverKind::conjugate_gradient, 1e-12, 0});
    CHECK(residual(sys, xc, b) < 1e-13);
    CHECK(residual(sys, xg, b) < 1e-11);
    CHECK(max_abs_diff(xc, xg) < 1e-9);
  }
}

TEST_CASE("cholesky keeps nonnegative data nonnegative") {
  std::mt19937_64 rng(3);
  auto g = square(20);
  for (int rep = 0; rep < 20; ++rep) {
    const DiffusionSystem sys(g, 10.0, random_diagonal(g->size(), rng));
    Field b(g);
    std::uniform_int_distribution<std::size_t> cell(0, g->size() - 1);
    b[cell(rng)] = 1e-300;  // a single tiny spike
    b[cell(rng)] = 5.0;
    const Field x = sys.solve(b);
    CHECK(x.min() >= 0.0);
  }
}

TEST_CASE("steady guesses are returned exactly") {
  auto g = square(6);
  const DiffusionSystem sys(g, 0.5, std::vector<double>(g->size(), 1.0));
  const Field c(g, 0.7);
  const Field x = sys.solve(c, {}, &c);
  for (double v : x) CHECK(v == 0.7);
}

TEST_CASE("indefinite systems are rejected") {
  auto g = line(4);
  std::vector<double> d(4, 1.0);
  d[2] = -5.0;
  const DiffusionSystem sys(g, 0.1, d);
  CHECK_THROWS_AS(sys.solve(Field(g, 1.0)), DomainError);
}
