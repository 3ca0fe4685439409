#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace chemo {

/// Uniform cell-centered box grid on [0, L_0] x ... x [0, L_{d-1}], d <= 3,
/// with homogeneous Neumann closure. Cells are numbered lexicographically
/// with axis 0 running fastest. `control_mask` marks the cells of the
/// control region.
class Grid {
 public:
  static constexpr std::size_t kMaxDim = 3;

  Grid(std::vector<std::size_t> dims, std::vector<double> spacing,
       std::vector<bool> control_mask = {});

  /// Box of the given side lengths; an empty mask means the whole domain.
  static Grid box(std::vector<std::size_t> dims, const std::vector<double>& lengths,
                  std::vector<bool> control_mask = {});

  std::size_t dimension() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return size_; }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  const std::vector<double>& spacing() const noexcept { return spacing_; }
  std::size_t stride(std::size_t axis) const noexcept { return strides_[axis]; }
  double cell_volume() const noexcept { return cell_volume_; }
  double measure() const noexcept { return cell_volume_ * static_cast<double>(size_); }
  double length(std::size_t axis) const noexcept {
    return spacing_[axis] * static_cast<double>(dims_[axis]);
  }

  const std::vector<bool>& control_mask() const noexcept { return mask_; }
  bool in_control(std::size_t cell) const { return mask_[cell]; }
  std::size_t control_cell_count() const noexcept;

  std::array<std::size_t, kMaxDim> coords(std::size_t cell) const noexcept;
  double center(std::size_t cell, std::size_t axis) const noexcept;

  /// Copy with the control region replaced by the cells whose centers lie in
  /// the closed box [lo, hi].
  Grid with_control_box(const std::vector<double>& lo, const std::vector<double>& hi) const;
  Grid with_control_mask(std::vector<bool> mask) const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dims_ == b.dims_ && a.spacing_ == b.spacing_ && a.mask_ == b.mask_;
  }

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> spacing_;
  std::vector<bool> mask_;
  std::array<std::size_t, kMaxDim> strides_{};
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(Grid g) { return std::make_shared<const Grid>(std::move(g)); }

/// Scalar cell values on a grid (u, v, w, z samples).
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid, double fill = 0.0);
  Field(GridPtr grid, std::vector<double> values);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  double min() const;
  double max() const;
  bool all_finite() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// True when both fields live on the same (or an identical) grid.
bool same_grid(const Field& a, const Field& b);
/// Throws StructuralError unless same_grid(a, b).
void require_same_grid(const Field& a, const Field& b, const char* where);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double c, const Field& a);

/// Cell-centered Laplacian with mirror (zero normal flux) boundary closure.
Field laplacian_neumann(const Field& phi);

/// Conservative upwind discretization of -div(mobility * grad v). The face
/// flux is mobility[upwind] * (v_right - v_left) / h, where the upwind cell is
/// the one the flux leaves; boundary faces carry no flux.
Field chemotaxis_divergence(const Field& mobility, const Field& v);

/// Largest outflow rate sum_{outgoing faces} |dv| / h^2 over cells with
/// positive mobility, and the cell where it occurs. Explicit upwind transport
/// is positivity preserving whenever dt * rate <= 1.
struct OutflowRate {
  double rate = 0.0;
  std::size_t cell = 0;
};
OutflowRate chemotaxis_outflow_rate(const Field& mobility, const Field& v);

double integrate(const Field& phi);

/// (integral |phi|^p)^(1/p); p = +inf gives the max norm. p < 1 is a DomainError.
double lp_norm(const Field& phi, double p);

/// L2 norm of the face-difference gradient.
double h1_seminorm(const Field& phi);

/// Cell-centered |grad phi|^2: each axis contributes the mean of the squared
/// differences on its two faces (zero on boundary faces). Its integral equals
/// h1_seminorm(phi)^2.
Field gradient_norm_sq(const Field& phi);

/// Integral of the discrete |D^2 phi|^2: squared second differences per axis
/// (mirrored ghosts) plus twice the squared mixed differences on interior
/// grid corners.
double hessian_norm_sq(const Field& phi);

}  // namespace chemo
