#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chemo/grid.hpp"

namespace chemo {

enum class SolverKind {
  /// Banded Cholesky. For these Stieltjes matrices every factor entry and
  /// substitution step keeps its sign, so nonnegative right-hand sides give
  /// exactly nonnegative solutions in floating point.
  cholesky,
  /// Jacobi-preconditioned conjugate gradient to a relative residual.
  conjugate_gradient,
};

struct SolverOptions {
  SolverKind kind = SolverKind::cholesky;
  double cg_tolerance = 1e-10;
  std::size_t cg_max_iterations = 0;  ///< 0 means 10 * unknowns
};

/// The symmetric system (diag(d) - dt * Laplacian) x = b with Neumann closure.
/// Positive definite whenever every d_i > 0.
class DiffusionSystem {
 public:
  DiffusionSystem(GridPtr grid, double dt, std::vector<double> diagonal);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  double dt() const noexcept { return dt_; }
  /// Full diagonal of the assembled matrix (d_i plus the Laplacian part).
  const std::vector<double>& matrix_diagonal() const noexcept { return diag_; }

  void apply(std::span<const double> x, std::span<double> y) const;

  /// With a `guess` that already satisfies the system exactly (a steady
  /// state), the guess is returned unchanged; CG also starts from it.
  Field solve(const Field& rhs, const SolverOptions& options = {},
              const Field* guess = nullptr) const;

 private:
  GridPtr grid_;
  double dt_;
  std::vector<double> base_;  ///< diagonal without the Laplacian part
  std::vector<double> diag_;
};

class BandedCholesky {
 public:
  explicit BandedCholesky(const DiffusionSystem& system);

  std::size_t bandwidth() const noexcept { return bw_; }
  void solve_in_place(std::span<double> x) const;

 private:
  double& at(std::size_t i, std::size_t j) { return band_[i * (bw_ + 1) + (bw_ + j - i)]; }
  double at(std::size_t i, std::size_t j) const { return band_[i * (bw_ + 1) + (bw_ + j - i)]; }

  std::size_t n_;
  std::size_t bw_;
  std::vector<double> band_;  // row i holds L(i, i-bw .. i)
};

struct CgResult {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

CgResult conjugate_gradient(const DiffusionSystem& system, std::span<const double> b,
                            std::span<double> x, double tolerance, std::size_t max_iterations);

}  // namespace chemo
