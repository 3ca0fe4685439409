#include "chemo/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chemo/errors.hpp"

namespace chemo {

DiffusionSystem::DiffusionSystem(GridPtr grid, double dt, std::vector<double> diagonal)
    : grid_(std::move(grid)), dt_(dt), base_(std::move(diagonal)) {
  if (!grid_) throw StructuralError("DiffusionSystem without a grid");
  diag_ = base_;
  if (diag_.size() != grid_->size()) {
    throw StructuralError("DiffusionSystem diagonal does not match the grid");
  }
  const Grid& g = *grid_;
  for (std::size_t a = 0; a < g.dimension(); ++a) {
    const double c = dt_ / (g.spacing()[a] * g.spacing()[a]);
    const std::size_t n = g.dims()[a];
    const std::size_t stride = g.stride(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::size_t k = (i / stride) % n;
      if (k > 0) diag_[i] += c;
      if (k + 1 < n) diag_[i] += c;
    }
  }
}

void DiffusionSystem::apply(std::span<const double> x, std::span<double> y) const {
  const Grid& g = *grid_;
  // flux form: a constant x gives exactly base * x
  for (std::size_t i = 0; i < g.size(); ++i) y[i] = base_[i] * x[i];
  for (std::size_t a = 0; a < g.dimension(); ++a) {
    const double c = dt_ / (g.spacing()[a] * g.spacing()[a]);
    const std::size_t n = g.dims()[a];
    const std::size_t stride = g.stride(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if ((i / stride) % n + 1 < n) {
        const double flux = c * (x[i + stride] - x[i]);
        y[i] -= flux;
        y[i + stride] += flux;
      }
    }
  }
}

Field DiffusionSystem::solve(const Field& rhs, const SolverOptions& options,
                             const Field* guess) const {
  if (!(rhs.grid() == *grid_)) throw StructuralError("DiffusionSystem::solve: grid mismatch");
  if (guess) {
    if (!(guess->grid() == *grid_)) throw StructuralError("DiffusionSystem::solve: guess grid mismatch");
    std::vector<double> y(rhs.size());
    apply(guess->values(), y);
    if (std::equal(y.begin(), y.end(), rhs.begin())) return *guess;
  }
  Field x = rhs;
  if (options.kind == SolverKind::cholesky) {
    BandedCholesky(*this).solve_in_place(x.values());
    return x;
  }
  if (guess) {
    x = *guess;
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rhs[i] / diag_[i];
  }
  const std::size_t max_it =
      options.cg_max_iterations ? options.cg_max_iterations : 10 * grid_->size();
  const CgResult r = conjugate_gradient(*this, rhs.values(), x.values(), options.cg_tolerance, max_it);
  if (!r.converged) {
    throw Error("conjugate gradient stalled at relative residual " +
                std::to_string(r.relative_residual));
  }
  return x;
}

BandedCholesky::BandedCholesky(const DiffusionSystem& system)
    : n_(system.grid().size()),
      bw_(system.grid().stride(system.grid().dimension() - 1)),
      band_(n_ * (bw_ + 1), 0.0) {
  const Grid& g = system.grid();
  const auto& diag = system.matrix_diagonal();
  for (std::size_t i = 0; i < n_; ++i) at(i, i) = diag[i];
  for (std::size_t a = 0; a < g.dimension(); ++a) {
    const double c = system.dt() / (g.spacing()[a] * g.spacing()[a]);
    const std::size_t n = g.dims()[a];
    const std::size_t stride = g.stride(a);
    for (std::size_t i = 0; i < n_; ++i) {
      if ((i / stride) % n + 1 < n) at(i + stride, i) = -c;
    }
  }
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t lo = i > bw_ ? i - bw_ : 0;
    for (std::size_t j = lo; j <= i; ++j) {
      double sum = at(i, j);
      const std::size_t klo = std::max(lo, j > bw_ ? j - bw_ : 0);
      for (std::size_t k = klo; k < j; ++k) sum -= at(i, k) * at(j, k);
      if (j == i) {
        if (!(sum > 0.0)) {
          throw DomainError("BandedCholesky: matrix not positive definite at row " +
                            std::to_string(i));
        }
        at(i, i) = std::sqrt(sum);
      } else {
        at(i, j) = sum / at(j, j);
      }
    }
  }
}

void BandedCholesky::solve_in_place(std::span<double> x) const {
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t lo = i > bw_ ? i - bw_ : 0;
    double sum = x[i];
    for (std::size_t k = lo; k < i; ++k) sum -= at(i, k) * x[k];
    x[i] = sum / at(i, i);
  }
  for (std::size_t i = n_; i-- > 0;) {
    const std::size_t hi = std::min(n_ - 1, i + bw_);
    double sum = x[i];
    for (std::size_t k = i + 1; k <= hi; ++k) sum -= at(k, i) * x[k];
    x[i] = sum / at(i, i);
  }
}

CgResult conjugate_gradient(const DiffusionSystem& system, std::span<const double> b,
                            std::span<double> x, double tolerance, std::size_t max_iterations) {
  const std::size_t n = b.size();
  const auto& diag = system.matrix_diagonal();
  std::vector<double> r(n), z(n), p(n), ap(n);
  system.apply(x, ap);
  double bnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = b[i] - ap[i];
    bnorm += b[i] * b[i];
  }
  bnorm = std::sqrt(bnorm);
  CgResult result;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.converged = true;
    return result;
  }
  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
  };
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = r[i] / diag[i];
    p[i] = z[i];
    rz += r[i] * z[i];
  }
  result.relative_residual = norm(r) / bnorm;
  while (result.relative_residual > tolerance && result.iterations < max_iterations) {
    system.apply(p, ap);
    double pap = 0.0;
    for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    const double step = rz / pap;
    double rz_next = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * ap[i];
      z[i] = r[i] / diag[i];
      rz_next += r[i] * z[i];
    }
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    ++result.iterations;
    result.relative_residual = norm(r) / bnorm;
  }
  result.converged = result.relative_residual <= tolerance;
  return result;
}

}  // namespace chemo
