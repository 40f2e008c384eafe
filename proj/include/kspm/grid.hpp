#ifndef KSPM_GRID_HPP
#define KSPM_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kspm/errors.hpp"

namespace kspm {

/// Uniform cell-centered grid on the unit square [0,1]^2.
///
/// Cell (i, j) has its center at ((i + 1/2) hx, (j + 1/2) hy); fields are
/// stored row-major with i running fastest, i.e. index = j * nx + i.
class Grid {
 public:
  static constexpr int kMinCells = 4;

  Grid(int nx, int ny) : nx_(nx), ny_(ny) {
    if (nx < kMinCells || ny < kMinCells) {
      throw InvalidArgument("grid needs at least " + std::to_string(kMinCells) +
                            " cells per axis, got " + std::to_string(nx) + "x" +
                            std::to_string(ny));
    }
    hx_ = 1.0 / nx;
    hy_ = 1.0 / ny;
  }

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double hx() const noexcept { return hx_; }
  double hy() const noexcept { return hy_; }
  double cell_area() const noexcept { return hx_ * hy_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) +
           static_cast<std::size_t>(i);
  }
  double x(int i) const noexcept { return (i + 0.5) * hx_; }
  double y(int j) const noexcept { return (j + 0.5) * hy_; }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.nx_ == b.nx_ && a.ny_ == b.ny_;
  }

 private:
  int nx_;
  int ny_;
  double hx_;
  double hy_;
};

inline Grid make_grid(int nx, int ny) { return Grid(nx, ny); }

/// Real scalar sample on a Grid (cell densities, concentrations, noise).
class Field {
 public:
  explicit Field(const Grid& grid, double value = 0.0)
      : grid_(grid), values_(grid.size(), value) {}

  Field(const Grid& grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw InvalidArgument("field has " + std::to_string(values_.size()) +
                            " values, grid needs " +
                            std::to_string(grid_.size()));
    }
  }

  /// Samples fn(x, y) at the cell centers.
  template <class Fn>
  static Field sample(const Grid& grid, Fn&& fn) {
    Field f(grid);
    for (int j = 0; j < grid.ny(); ++j) {
      for (int i = 0; i < grid.nx(); ++i) {
        f(i, j) = fn(grid.x(i), grid.y(j));
      }
    }
    return f;
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator[](std::size_t k) noexcept { return values_[k]; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }
  double& operator()(int i, int j) noexcept { return values_[grid_.index(i, j)]; }
  double operator()(int i, int j) const noexcept {
    return values_[grid_.index(i, j)];
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Index of the first non-finite value, or size() if all are finite.
  std::size_t first_non_finite() const noexcept {
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!std::isfinite(values_[k])) return k;
    }
    return values_.size();
  }
  bool all_finite() const noexcept { return first_non_finite() == values_.size(); }

  Field& operator+=(const Field& o) {
    check_same_grid(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same_grid(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
  }
  Field& operator*=(double a) noexcept {
    for (double& v : values_) v *= a;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }

  friend bool operator==(const Field& a, const Field& b) {
    return a.grid_ == b.grid_ && a.values_ == b.values_;
  }

  void check_same_grid(const Field& o) const {
    if (!(grid_ == o.grid_)) {
      throw InvalidArgument("fields live on different grids");
    }
  }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Discrete L2 inner product sum f g hx hy.
inline double inner(const Field& f, const Field& g) {
  f.check_same_grid(g);
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += f[k] * g[k];
  return s * f.grid().cell_area();
}

/// Midpoint-rule integral over the unit square.
inline double integral(const Field& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_area();
}

/// Five-point Neumann Laplacian with mirrored ghost cells.
///
/// Written as a difference of face gradients so the grid sum telescopes to
/// zero; the wall faces carry no flux.
inline Field laplacian(const Field& f) {
  const Grid& g = f.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  Field out(g);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double c = f(i, j);
      const double east = i + 1 < nx ? f(i + 1, j) - c : 0.0;
      const double west = i > 0 ? c - f(i - 1, j) : 0.0;
      const double north = j + 1 < ny ? f(i, j + 1) - c : 0.0;
      const double south = j > 0 ? c - f(i, j - 1) : 0.0;
      out(i, j) = (east - west) * ihx2 + (north - south) * ihy2;
    }
  }
  return out;
}

/// Central-difference gradient with mirrored ghost cells.
///
/// Equivalent to averaging the two adjacent face gradients with a zero wall
/// gradient, so boundary cells see half of the one-sided difference.
inline std::pair<Field, Field> gradient(const Field& f) {
  const Grid& g = f.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  const double i2hx = 0.5 / g.hx();
  const double i2hy = 0.5 / g.hy();
  Field dx(g);
  Field dy(g);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double e = f(std::min(i + 1, nx - 1), j);
      const double w = f(std::max(i - 1, 0), j);
      const double n = f(i, std::min(j + 1, ny - 1));
      const double s = f(i, std::max(j - 1, 0));
      dx(i, j) = (e - w) * i2hx;
      dy(i, j) = (n - s) * i2hy;
    }
  }
  return {std::move(dx), std::move(dy)};
}

}  // namespace kspm

#endif  // KSPM_GRID_HPP
