#ifndef KSPM_BARENBLATT_HPP
#define KSPM_BARENBLATT_HPP

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kspm/errors.hpp"
#include "kspm/grid.hpp"

namespace kspm {

/// Closed-form self-similar solution of u_t = r lap(u^m) in two dimensions:
///   u(x, t) = s^-a (C - k |x - x0|^2 s^-a)_+^(1/(m-1)),  s = r t,
/// with a = 1/m and k = (m - 1) / (4 m^2). The mass is conserved.
class Barenblatt {
 public:
  Barenblatt(double m, double diffusivity, double profile_constant, double cx = 0.5,
             double cy = 0.5)
      : m_(m), r_(diffusivity), c_(profile_constant), cx_(cx), cy_(cy) {
    if (!(m > 1.0)) throw InvalidArgument("Barenblatt profile needs exponent m > 1");
    if (!(diffusivity > 0.0) || !(profile_constant > 0.0)) {
      throw InvalidArgument("Barenblatt profile needs positive diffusivity and constant");
    }
  }

  /// Profile carrying total mass `mass`.
  static Barenblatt with_mass(double mass, double m, double diffusivity, double cx = 0.5,
                              double cy = 0.5) {
    if (!(mass > 0.0)) throw InvalidArgument("Barenblatt mass must be positive");
    const double k = (m - 1.0) / (4.0 * m * m);
    const double c = std::pow(mass * k * m / (std::numbers::pi * (m - 1.0)), (m - 1.0) / m);
    return Barenblatt(m, diffusivity, c, cx, cy);
  }

  double exponent() const noexcept { return m_; }
  double mass() const noexcept {
    const double k = (m_ - 1.0) / (4.0 * m_ * m_);
    return std::numbers::pi / k * std::pow(c_, m_ / (m_ - 1.0)) * (m_ - 1.0) / m_;
  }

  double value(double x, double y, double t) const {
    const double s = r_ * t;
    const double a = 1.0 / m_;
    const double k = (m_ - 1.0) / (4.0 * m_ * m_);
    const double r2 = (x - cx_) * (x - cx_) + (y - cy_) * (y - cy_);
    const double core = c_ - k * r2 * std::pow(s, -a);
    return core > 0.0 ? std::pow(s, -a) * std::pow(core, 1.0 / (m_ - 1.0)) : 0.0;
  }

  double support_radius(double t) const {
    const double k = (m_ - 1.0) / (4.0 * m_ * m_);
    return std::sqrt(c_ * std::pow(r_ * t, 1.0 / m_) / k);
  }

  Field sample(const Grid& g, double t) const {
    return Field::sample(g, [&](double x, double y) { return value(x, y, t); });
  }

  /// L1 distance between f and the profile sampled at time t.
  double l1_error(const Field& f, double t) const {
    const Field exact = sample(f.grid(), t);
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += std::abs(f[k] - exact[k]);
    return s * f.grid().cell_area();
  }

 private:
  double m_;
  double r_;
  double c_;
  double cx_;
  double cy_;
};

}  // namespace kspm

#endif  // KSPM_BARENBLATT_HPP
