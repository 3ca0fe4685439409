#include "chemo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chemo/errors.hpp"

namespace chemo {

Grid::Grid(std::vector<std::size_t> dims, std::vector<double> spacing,
           std::vector<bool> control_mask)
    : dims_(std::move(dims)), spacing_(std::move(spacing)), mask_(std::move(control_mask)) {
  if (dims_.empty() || dims_.size() > kMaxDim) {
    throw DomainError("grid dimension must be 1, 2 or 3");
  }
  if (spacing_.size() != dims_.size()) {
    throw StructuralError("grid spacing has " + std::to_string(spacing_.size()) +
                          " entries for " + std::to_string(dims_.size()) + " axes");
  }
  size_ = 1;
  cell_volume_ = 1.0;
  for (std::size_t a = 0; a < dims_.size(); ++a) {
    if (dims_[a] < 2) {
      throw DomainError("grid axis " + std::to_string(a) + " needs at least 2 cells");
    }
    if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a])) {
      throw DomainError("grid spacing on axis " + std::to_string(a) + " must be positive");
    }
    strides_[a] = size_;
    size_ *= dims_[a];
    cell_volume_ *= spacing_[a];
  }
  if (mask_.empty()) {
    mask_.assign(size_, true);
  } else if (mask_.size() != size_) {
    throw StructuralError("control mask has " + std::to_string(mask_.size()) +
                          " entries for " + std::to_string(size_) + " cells");
  }
}

Grid Grid::box(std::vector<std::size_t> dims, const std::vector<double>& lengths,
               std::vector<bool> control_mask) {
  if (lengths.size() != dims.size()) {
    throw StructuralError("box lengths do not match the number of axes");
  }
  std::vector<double> spacing(dims.size());
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (dims[a] == 0) throw DomainError("grid axis with zero cells");
    spacing[a] = lengths[a] / static_cast<double>(dims[a]);
  }
  return Grid(std::move(dims), std::move(spacing), std::move(control_mask));
}

std::size_t Grid::control_cell_count() const noexcept {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), true));
}

std::array<std::size_t, Grid::kMaxDim> Grid::coords(std::size_t cell) const noexcept {
  std::array<std::size_t, kMaxDim> c{};
  for (std::size_t a = 0; a < dims_.size(); ++a) {
    c[a] = cell % dims_[a];
    cell /= dims_[a];
  }
  return c;
}

double Grid::center(std::size_t cell, std::size_t axis) const noexcept {
  return (static_cast<double>(coords(cell)[axis]) + 0.5) * spacing_[axis];
}

Grid Grid::with_control_box(const std::vector<double>& lo, const std::vector<double>& hi) const {
  if (lo.size() != dimension() || hi.size() != dimension()) {
    throw StructuralError("control box bounds do not match the grid dimension");
  }
  std::vector<bool> mask(size_, false);
  for (std::size_t i = 0; i < size_; ++i) {
    bool inside = true;
    for (std::size_t a = 0; a < dimension(); ++a) {
      const double x = center(i, a);
      inside = inside && x >= lo[a] && x <= hi[a];
    }
    mask[i] = inside;
  }
  return with_control_mask(std::move(mask));
}

Grid Grid::with_control_mask(std::vector<bool> mask) const {
  return Grid(dims_, spacing_, std::move(mask));
}

Field::Field(GridPtr grid, double fill) : grid_(std::move(grid)) {
  if (!grid_) throw StructuralError("field without a grid");
  if (!std::isfinite(fill)) throw DomainError("field fill value is not finite");
  values_.assign(grid_->size(), fill);
}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw StructuralError("field without a grid");
  if (values_.size() != grid_->size()) {
    throw StructuralError("field has " + std::to_string(values_.size()) + " values for " +
                          std::to_string(grid_->size()) + " cells");
  }
  if (!all_finite()) throw DomainError("field has non-finite values");
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

bool same_grid(const Field& a, const Field& b) {
  if (!a.grid_ptr() || !b.grid_ptr()) return false;
  return a.grid_ptr() == b.grid_ptr() || a.grid() == b.grid();
}

void require_same_grid(const Field& a, const Field& b, const char* where) {
  if (!same_grid(a, b)) {
    throw StructuralError(std::string(where) + ": fields live on different grids");
  }
}

Field operator+(const Field& a, const Field& b) {
  require_same_grid(a, b, "operator+");
  Field r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

Field operator-(const Field& a, const Field& b) {
  require_same_grid(a, b, "operator-");
  Field r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

Field operator*(double c, const Field& a) {
  Field r = a;
  for (auto& x : r) x *= c;
  return r;
}

namespace {

// Calls fn(left, right, axis) once per interior face.
template <class Fn>
void for_each_face(const Grid& g, Fn&& fn) {
  for (std::size_t a = 0; a < g.dimension(); ++a) {
    const std::size_t n = g.dims()[a];
    const std::size_t stride = g.stride(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if ((i / stride) % n + 1 < n) fn(i, i + stride, a);
    }
  }
}

}  // namespace

Field laplacian_neumann(const Field& phi) {
  const Grid& g = phi.grid();
  Field out(phi.grid_ptr(), 0.0);
  for_each_face(g, [&](std::size_t l, std::size_t r, std::size_t a) {
    const double h = g.spacing()[a];
    const double flux = (phi[r] - phi[l]) / (h * h);
    out[l] += flux;
    out[r] -= flux;
  });
  return out;
}

Field chemotaxis_divergence(const Field& mobility, const Field& v) {
  require_same_grid(mobility, v, "chemotaxis_divergence");
  const Grid& g = v.grid();
  Field out(v.grid_ptr(), 0.0);
  for_each_face(g, [&](std::size_t l, std::size_t r, std::size_t a) {
    const double h = g.spacing()[a];
    const double dv = (v[r] - v[l]) / h;
    // Positive dv moves mass from l to r.
    const double flux = dv >= 0.0 ? mobility[l] * dv : mobility[r] * dv;
    out[l] -= flux / h;
    out[r] += flux / h;
  });
  return out;
}

OutflowRate chemotaxis_outflow_rate(const Field& mobility, const Field& v) {
  require_same_grid(mobility, v, "chemotaxis_outflow_rate");
  const Grid& g = v.grid();
  std::vector<double> rate(g.size(), 0.0);
  for_each_face(g, [&](std::size_t l, std::size_t r, std::size_t a) {
    const double h = g.spacing()[a];
    const double dv = v[r] - v[l];
    if (dv > 0.0) {
      rate[l] += dv / (h * h);
    } else {
      rate[r] -= dv / (h * h);
    }
  });
  OutflowRate worst;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (mobility[i] > 0.0 && rate[i] > worst.rate) {
      worst.rate = rate[i];
      worst.cell = i;
    }
  }
  return worst;
}

double integrate(const Field& phi) {
  double sum = 0.0;
  for (double x : phi) sum += x;
  return sum * phi.grid().cell_volume();
}

double lp_norm(const Field& phi, double p) {
  if (std::isnan(p) || p < 1.0) throw DomainError("lp_norm requires p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : phi) m = std::max(m, std::abs(x));
    return m;
  }
  double sum = 0.0;
  if (p == 2.0) {
    for (double x : phi) sum += x * x;
    return std::sqrt(sum * phi.grid().cell_volume());
  }
  for (double x : phi) sum += std::pow(std::abs(x), p);
  return std::pow(sum * phi.grid().cell_volume(), 1.0 / p);
}

double h1_seminorm(const Field& phi) {
  const Grid& g = phi.grid();
  double sum = 0.0;
  for_each_face(g, [&](std::size_t l, std::size_t r, std::size_t a) {
    const double d = (phi[r] - phi[l]) / g.spacing()[a];
    sum += d * d;
  });
  return std::sqrt(sum * g.cell_volume());
}

Field gradient_norm_sq(const Field& phi) {
  const Grid& g = phi.grid();
  Field out(phi.grid_ptr(), 0.0);
  for_each_face(g, [&](std::size_t l, std::size_t r, std::size_t a) {
    const double d = (phi[r] - phi[l]) / g.spacing()[a];
    out[l] += 0.5 * d * d;
    out[r] += 0.5 * d * d;
  });
  return out;
}

double hessian_norm_sq(const Field& phi) {
  const Grid& g = phi.grid();
  const std::size_t dim = g.dimension();
  double sum = 0.0;
  // Pure second differences with mirrored ghosts.
  for (std::size_t a = 0; a < dim; ++a) {
    const std::size_t n = g.dims()[a];
    const std::size_t stride = g.stride(a);
    const double h2 = g.spacing()[a] * g.spacing()[a];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::size_t c = (i / stride) % n;
      const double left = c > 0 ? phi[i - stride] : phi[i];
      const double right = c + 1 < n ? phi[i + stride] : phi[i];
      const double d2 = (right - 2.0 * phi[i] + left) / h2;
      sum += d2 * d2;
    }
  }
  // Mixed differences on interior corners, counted for (a,b) and (b,a).
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = a + 1; b < dim; ++b) {
      const std::size_t na = g.dims()[a], nb = g.dims()[b];
      const std::size_t sa = g.stride(a), sb = g.stride(b);
      const double hab = g.spacing()[a] * g.spacing()[b];
      for (std::size_t i = 0; i < g.size(); ++i) {
        if ((i / sa) % na + 1 >= na || (i / sb) % nb + 1 >= nb) continue;
        const double d = (phi[i + sa + sb] - phi[i + sa] - phi[i + sb] + phi[i]) / hab;
        sum += 2.0 * d * d;
      }
    }
  }
  return sum * g.cell_volume();
}

}  // namespace chemo
