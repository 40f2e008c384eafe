#ifndef KSPM_NORMS_HPP
#define KSPM_NORMS_HPP

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "kspm/errors.hpp"
#include "kspm/format.hpp"
#include "kspm/grid.hpp"
#include "kspm/spectral.hpp"

namespace kspm {

namespace detail {
inline void require_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw InvalidArgument("integrability exponent must satisfy p >= 1, got " + std::to_string(p));
  }
}
}  // namespace detail

/// (sum |f|^p hx hy)^(1/p)
inline double lp_norm(const Field& f, double p) {
  detail::require_p(p);
  double s = 0.0;
  if (p == 2.0) {
    for (double v : f.values()) s += v * v;
    return std::sqrt(s * f.grid().cell_area());
  }
  if (p == 1.0) {
    for (double v : f.values()) s += std::abs(v);
    return s * f.grid().cell_area();
  }
  for (double v : f.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * f.grid().cell_area(), 1.0 / p);
}

/// H^s_2 norm in the cosine basis: (sum_k (1 + lambda_k)^s c_k^2)^(1/2).
inline double sobolev2_norm(const SpectralBasis& basis, const Field& f, double s) {
  const Spectrum c = basis.to_spectral(f);
  double acc = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    acc += std::pow(1.0 + basis.lambda(k), s) * c[k] * c[k];
  }
  return std::sqrt(acc);
}

/// Bessel-potential H^s_p norm: multiplier (1 + lambda_k)^(s/2), then L^p.
///
/// This is the norm of the cosine (even) extension; the infimum over all
/// extensions is not computed.
inline double bessel_lp_norm(const SpectralBasis& basis, const Field& f, double s, double p) {
  detail::require_p(p);
  if (s == 0.0) return lp_norm(f, p);
  const Field g = basis.apply_multiplier(f, [s](double lam) { return std::pow(1.0 + lam, 0.5 * s); });
  return lp_norm(g, p);
}

/// L^p norm of the pointwise Euclidean gradient magnitude.
inline double grad_lp_norm(const Field& f, double p) {
  detail::require_p(p);
  const auto [gx, gy] = gradient(f);
  Field mag(f.grid());
  for (std::size_t k = 0; k < f.size(); ++k) mag[k] = std::hypot(gx[k], gy[k]);
  return lp_norm(mag, p);
}

/// H^1_p norm assembled from the shared gradient stencil:
/// (|f|_Lp^p + |grad f|_Lp^p)^(1/p).
inline double h1p_norm(const Field& f, double p) {
  const double a = lp_norm(f, p);
  const double b = grad_lp_norm(f, p);
  return std::pow(std::pow(a, p) + std::pow(b, p), 1.0 / p);
}

/// Ratio |w|_{H^theta_{2 gamma}}^gamma / | |w|^gamma |_{H^1_2}.
///
/// Bounded uniformly in w for 0 < theta < 1/gamma; both sides are
/// homogeneous of degree gamma in w.
inline double runst_ratio(const SpectralBasis& basis, const Field& w, double gamma, double theta) {
  if (!(gamma > 1.0)) throw InvalidArgument("runst_ratio needs gamma > 1");
  if (!(theta > 0.0 && theta < 1.0 / gamma)) {
    throw InvalidArgument("runst_ratio needs 0 < theta < 1/gamma");
  }
  Field wg(w.grid());
  for (std::size_t k = 0; k < w.size(); ++k) wg[k] = std::pow(std::abs(w[k]), gamma);
  const double denominator = h1p_norm(wg, 2.0);
  if (!(denominator > 0.0)) throw InvalidArgument("runst_ratio of the zero field is undefined");
  const double numerator = std::pow(bessel_lp_norm(basis, w, theta, 2.0 * gamma), gamma);
  return numerator / denominator;
}

/// One norm evaluation: kind plus smoothness s and integrability p.
struct NormRequest {
  enum class Kind { lp, h_s_2, bessel_s_p, grad_lp, h1_p };

  Kind kind = Kind::lp;
  double s = 0.0;
  double p = 2.0;

  /// Text forms: lp:P, hs:S, bessel:S:P, grad:P, h1:P.
  static NormRequest parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    for (std::string part; std::getline(in, part, ':');) parts.push_back(part);
    auto number = [&](std::size_t k) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(parts[k], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != parts[k].size() || !std::isfinite(v)) {
        throw InvalidArgument("norm request '" + text + "': '" + parts[k] + "' is not a number");
      }
      return v;
    };
    auto arity = [&](std::size_t n) {
      if (parts.size() != n + 1) {
        throw InvalidArgument("norm request '" + text + "' expects " + std::to_string(n) + " argument(s)");
      }
    };
    if (parts.empty()) throw InvalidArgument("empty norm request");
    NormRequest r;
    const std::string& head = parts[0];
    if (head == "lp") {
      arity(1);
      r.p = number(1);
    } else if (head == "hs") {
      arity(1);
      r.kind = Kind::h_s_2;
      r.s = number(1);
    } else if (head == "bessel") {
      arity(2);
      r.kind = Kind::bessel_s_p;
      r.s = number(1);
      r.p = number(2);
    } else if (head == "grad") {
      arity(1);
      r.kind = Kind::grad_lp;
      r.p = number(1);
    } else if (head == "h1") {
      arity(1);
      r.kind = Kind::h1_p;
      r.s = 1.0;
      r.p = number(1);
    } else {
      throw InvalidArgument("unknown norm kind '" + head + "' (expected lp, hs, bessel, grad or h1)");
    }
    detail::require_p(r.p);
    return r;
  }

  std::string label() const {
    using detail::format_double;
    switch (kind) {
      case Kind::lp: return "lp:" + format_double(p);
      case Kind::h_s_2: return "hs:" + format_double(s);
      case Kind::bessel_s_p: return "bessel:" + format_double(s) + ':' + format_double(p);
      case Kind::grad_lp: return "grad:" + format_double(p);
      case Kind::h1_p: return "h1:" + format_double(p);
    }
    return {};
  }

  double evaluate(const SpectralBasis& basis, const Field& f) const {
    switch (kind) {
      case Kind::lp: return lp_norm(f, p);
      case Kind::h_s_2: return sobolev2_norm(basis, f, s);
      case Kind::bessel_s_p: return bessel_lp_norm(basis, f, s, p);
      case Kind::grad_lp: return grad_lp_norm(f, p);
      case Kind::h1_p: return h1p_norm(f, p);
    }
    throw InvalidArgument("unhandled norm kind");
  }
};

}  // namespace kspm

#endif  // KSPM_NORMS_HPP
