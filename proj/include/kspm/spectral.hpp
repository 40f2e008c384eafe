#ifndef KSPM_SPECTRAL_HPP
#define KSPM_SPECTRAL_HPP

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "kspm/errors.hpp"
#include "kspm/grid.hpp"

namespace kspm {

enum class BasisKind {
  neumann,   ///< cos(pi m1 x) cos(pi m2 y) on [0,1]^2, the PDE's basis
  periodic,  ///< sine/cosine tensor basis on [0, 2pi]^2, eigenvalues only
};

enum class TransformKind {
  fast,    ///< FFTW REDFT10 / REDFT01
  direct,  ///< separable O(N^3) sums, kept as the reference path
};

/// Magnitude of the Laplacian eigenvalue of mode (m1, m2).
inline double eigenvalue(int m1, int m2, BasisKind kind = BasisKind::neumann) {
  if (m1 < 0 || m2 < 0) throw InvalidArgument("mode indices must be nonnegative");
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  const double m2sum = static_cast<double>(m1) * m1 + static_cast<double>(m2) * m2;
  return kind == BasisKind::neumann ? pi2 * m2sum : 4.0 * pi2 * m2sum;
}

/// Cosine coefficients of a Field, indexed like the field: k = m2 * nx + m1.
class Spectrum {
 public:
  explicit Spectrum(const Grid& grid) : grid_(grid), c_(grid.size(), 0.0) {}

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return c_.size(); }
  double& operator()(int m1, int m2) noexcept { return c_[grid_.index(m1, m2)]; }
  double operator()(int m1, int m2) const noexcept { return c_[grid_.index(m1, m2)]; }
  double& operator[](std::size_t k) noexcept { return c_[k]; }
  double operator[](std::size_t k) const noexcept { return c_[k]; }
  std::vector<double>& data() noexcept { return c_; }
  const std::vector<double>& data() const noexcept { return c_; }

 private:
  Grid grid_;
  std::vector<double> c_;
};

namespace detail {

enum class DctDirection { forward, inverse };

// FFTW's planner is not re-entrant; plans are created once per shape under a
// lock and then executed concurrently through the new-array interface.
inline fftw_plan cached_dct_plan(int nx, int ny, DctDirection dir) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, DctDirection>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_tuple(nx, ny, dir);
  if (auto it = plans.find(key); it != plans.end()) return it->second;
  std::vector<double> in(static_cast<std::size_t>(nx) * ny, 0.0);
  std::vector<double> out(in.size(), 0.0);
  const fftw_r2r_kind kind = dir == DctDirection::forward ? FFTW_REDFT10 : FFTW_REDFT01;
  fftw_plan plan = fftw_plan_r2r_2d(ny, nx, in.data(), out.data(), kind, kind,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (plan == nullptr) throw std::runtime_error("FFTW could not plan a cosine transform");
  plans.emplace(key, plan);
  return plan;
}

struct BasisTables {
  std::vector<double> lambda;          // continuous eigenvalue per mode
  std::vector<double> stencil_lambda;  // eigenvalue of the 5-point stencil
  std::vector<double> norm;            // L2 normalization per mode
  std::vector<double> norm_x, norm_y;  // 1 or sqrt(2) per axis
  std::vector<double> cos_x, cos_y;    // cos(pi m x_i), [m * n + i]
};

}  // namespace detail

/// Neumann-Laplacian eigenbasis sampled on a Grid.
///
/// The discrete functions phi_k(x_i) = n(m1) n(m2) cos(pi m1 x_i) cos(pi m2 y_j)
/// with n(0) = 1, n(m > 0) = sqrt(2) are orthonormal for the cell-area
/// weighted inner product, which makes to_spectral / from_spectral an exact
/// discrete cosine transform pair. Cheap to copy; tables are shared.
class SpectralBasis {
 public:
  explicit SpectralBasis(const Grid& grid, BasisKind kind = BasisKind::neumann,
                         TransformKind transform = TransformKind::fast)
      : grid_(grid), kind_(kind), transform_(transform) {
    auto t = std::make_shared<detail::BasisTables>();
    const int nx = grid.nx();
    const int ny = grid.ny();
    t->lambda.resize(grid.size());
    t->stencil_lambda.resize(grid.size());
    t->norm.resize(grid.size());
    t->norm_x.resize(nx);
    t->norm_y.resize(ny);
    for (int m = 0; m < nx; ++m) t->norm_x[m] = m == 0 ? 1.0 : std::numbers::sqrt2;
    for (int m = 0; m < ny; ++m) t->norm_y[m] = m == 0 ? 1.0 : std::numbers::sqrt2;
    const double pi = std::numbers::pi;
    for (int m2 = 0; m2 < ny; ++m2) {
      for (int m1 = 0; m1 < nx; ++m1) {
        const std::size_t k = grid.index(m1, m2);
        t->lambda[k] = eigenvalue(m1, m2, kind);
        const double sx = std::sin(0.5 * pi * m1 * grid.hx());
        const double sy = std::sin(0.5 * pi * m2 * grid.hy());
        t->stencil_lambda[k] = 4.0 * sx * sx / (grid.hx() * grid.hx()) +
                               4.0 * sy * sy / (grid.hy() * grid.hy());
        t->norm[k] = t->norm_x[m1] * t->norm_y[m2];
      }
    }
    t->cos_x.resize(static_cast<std::size_t>(nx) * nx);
    t->cos_y.resize(static_cast<std::size_t>(ny) * ny);
    for (int m = 0; m < nx; ++m)
      for (int i = 0; i < nx; ++i) t->cos_x[m * nx + i] = std::cos(pi * m * grid.x(i));
    for (int m = 0; m < ny; ++m)
      for (int j = 0; j < ny; ++j) t->cos_y[m * ny + j] = std::cos(pi * m * grid.y(j));
    tables_ = std::move(t);
  }

  const Grid& grid() const noexcept { return grid_; }
  BasisKind kind() const noexcept { return kind_; }
  TransformKind transform() const noexcept { return transform_; }
  SpectralBasis with_transform(TransformKind t) const {
    SpectralBasis b(*this);
    b.transform_ = t;
    return b;
  }

  /// Per-axis mode counts (m1 < modes_x(), m2 < modes_y()).
  int modes_x() const noexcept { return grid_.nx(); }
  int modes_y() const noexcept { return grid_.ny(); }

  double lambda(int m1, int m2) const noexcept { return tables_->lambda[grid_.index(m1, m2)]; }
  double lambda(std::size_t k) const noexcept { return tables_->lambda[k]; }
  /// Eigenvalue magnitude of the five-point Neumann stencil for mode k.
  double stencil_lambda(std::size_t k) const noexcept { return tables_->stencil_lambda[k]; }
  double norm_factor(int m1, int m2) const noexcept { return tables_->norm[grid_.index(m1, m2)]; }

  /// Value of the normalized eigenfunction phi_(m1,m2) at cell (i, j).
  double mode_value(int m1, int m2, int i, int j) const noexcept {
    return tables_->norm_x[m1] * tables_->cos_x[m1 * grid_.nx() + i] *
           tables_->norm_y[m2] * tables_->cos_y[m2 * grid_.ny() + j];
  }

  /// The eigenfunction phi_(m1,m2) as a Field.
  Field unit_mode(int m1, int m2) const {
    check_mode(m1, m2);
    Field f(grid_);
    for (int j = 0; j < grid_.ny(); ++j)
      for (int i = 0; i < grid_.nx(); ++i) f(i, j) = mode_value(m1, m2, i, j);
    return f;
  }

  Spectrum to_spectral(const Field& f) const {
    require_transformable(f.grid());
    return transform_ == TransformKind::fast ? forward_fast(f) : forward_direct(f);
  }

  Field from_spectral(const Spectrum& c) const {
    require_transformable(c.grid());
    return transform_ == TransformKind::fast ? inverse_fast(c) : inverse_direct(c);
  }

  /// Applies the diagonal multiplier symbol(lambda_k) in the cosine basis.
  template <class Symbol>
  Field apply_multiplier(const Field& f, Symbol&& symbol) const {
    Spectrum c = to_spectral(f);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= symbol(tables_->lambda[k]);
    return from_spectral(c);
  }

 private:
  void check_mode(int m1, int m2) const {
    if (m1 < 0 || m2 < 0 || m1 >= modes_x() || m2 >= modes_y()) {
      throw InvalidArgument("mode (" + std::to_string(m1) + "," + std::to_string(m2) +
                            ") outside the basis");
    }
  }

  void require_transformable(const Grid& g) const {
    if (!(g == grid_)) throw InvalidArgument("field size does not match the spectral basis");
    if (kind_ != BasisKind::neumann) {
      throw InvalidArgument("only the Neumann basis supports grid transforms");
    }
  }

  Spectrum forward_fast(const Field& f) const {
    Spectrum c(grid_);
    std::vector<double> in(f.values().begin(), f.values().end());
    fftw_execute_r2r(detail::cached_dct_plan(grid_.nx(), grid_.ny(), detail::DctDirection::forward),
                     in.data(), c.data().data());
    const double scale = 0.25 * grid_.cell_area();
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= scale * tables_->norm[k];
    return c;
  }

  Field inverse_fast(const Spectrum& c) const {
    std::vector<double> in(c.size());
    for (int m2 = 0; m2 < grid_.ny(); ++m2) {
      for (int m1 = 0; m1 < grid_.nx(); ++m1) {
        const std::size_t k = grid_.index(m1, m2);
        // REDFT01 weights every non-constant term by 2.
        const double w = (m1 == 0 ? 1.0 : 2.0) * (m2 == 0 ? 1.0 : 2.0);
        in[k] = c[k] * tables_->norm[k] / w;
      }
    }
    Field f(grid_);
    fftw_execute_r2r(detail::cached_dct_plan(grid_.nx(), grid_.ny(), detail::DctDirection::inverse),
                     in.data(), f.values().data());
    return f;
  }

  Spectrum forward_direct(const Field& f) const {
    const int nx = grid_.nx();
    const int ny = grid_.ny();
    const auto& t = *tables_;
    std::vector<double> rows(grid_.size(), 0.0);  // [j * nx + m1]
    for (int j = 0; j < ny; ++j) {
      for (int m1 = 0; m1 < nx; ++m1) {
        double s = 0.0;
        for (int i = 0; i < nx; ++i) s += f(i, j) * t.cos_x[m1 * nx + i];
        rows[static_cast<std::size_t>(j) * nx + m1] = s * t.norm_x[m1] * grid_.hx();
      }
    }
    Spectrum c(grid_);
    for (int m2 = 0; m2 < ny; ++m2) {
      for (int m1 = 0; m1 < nx; ++m1) {
        double s = 0.0;
        for (int j = 0; j < ny; ++j) s += rows[static_cast<std::size_t>(j) * nx + m1] * t.cos_y[m2 * ny + j];
        c(m1, m2) = s * t.norm_y[m2] * grid_.hy();
      }
    }
    return c;
  }

  Field inverse_direct(const Spectrum& c) const {
    const int nx = grid_.nx();
    const int ny = grid_.ny();
    const auto& t = *tables_;
    std::vector<double> cols(grid_.size(), 0.0);  // [j * nx + m1]
    for (int j = 0; j < ny; ++j) {
      for (int m1 = 0; m1 < nx; ++m1) {
        double s = 0.0;
        for (int m2 = 0; m2 < ny; ++m2) s += c(m1, m2) * t.norm_y[m2] * t.cos_y[m2 * ny + j];
        cols[static_cast<std::size_t>(j) * nx + m1] = s;
      }
    }
    Field f(grid_);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        double s = 0.0;
        for (int m1 = 0; m1 < nx; ++m1)
          s += cols[static_cast<std::size_t>(j) * nx + m1] * t.norm_x[m1] * t.cos_x[m1 * nx + i];
        f(i, j) = s;
      }
    }
    return f;
  }

  Grid grid_;
  BasisKind kind_;
  TransformKind transform_;
  std::shared_ptr<const detail::BasisTables> tables_;
};

}  // namespace kspm

#endif  // KSPM_SPECTRAL_HPP
