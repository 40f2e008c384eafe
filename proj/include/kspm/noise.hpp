#ifndef KSPM_NOISE_HPP
#define KSPM_NOISE_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "kspm/errors.hpp"
#include "kspm/grid.hpp"
#include "kspm/rng.hpp"
#include "kspm/spectral.hpp"

namespace kspm {

/// Parameters of one spatially correlated Wiener process.
struct NoiseSpec {
  double sigma = 0.0;   ///< intensity (sigma_u or sigma_v)
  double delta = 2.5;   ///< Bessel-potential regularity of the covariance
  int kmax = 8;         ///< modes with m1, m2 <= kmax are retained
  std::uint64_t seed = 0;
  BasisKind basis_kind = BasisKind::neumann;
};

/// In 2D the embedding H^delta -> H^1 is Hilbert-Schmidt only for delta > 2.
inline constexpr double kHilbertSchmidtH1Threshold = 2.0;

/// Truncated Q-Wiener process W(t, x) = sum_k q_k phi_k(x) beta_k(t) with
/// q_k = (1 + lambda_k)^(-delta/2) over the box m1, m2 <= kmax.
///
/// Increments are drawn from a counter-based stream keyed by (seed, step
/// index, mode), so reset() replays the exact same realization.
class WienerSampler {
 public:
  struct Mode {
    int m1;
    int m2;
    double lambda;
    double q;
  };

  WienerSampler(const NoiseSpec& spec, const SpectralBasis& basis)
      : spec_(spec), basis_(basis) {
    if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) {
      throw InvalidArgument("noise intensity must be finite and nonnegative");
    }
    if (!(spec.delta > 1.0) || !std::isfinite(spec.delta)) {
      throw InvalidArgument("noise regularity delta must exceed 1");
    }
    if (spec.kmax < 0) throw InvalidArgument("kmax must be nonnegative");
    if (spec.kmax >= basis.modes_x() || spec.kmax >= basis.modes_y()) {
      throw InvalidArgument("kmax = " + std::to_string(spec.kmax) +
                            " exceeds the basis resolution");
    }
    if (spec.basis_kind != basis.kind()) {
      throw InvalidArgument("noise basis kind differs from the spectral basis");
    }
    below_h1_threshold_ = spec.delta <= kHilbertSchmidtH1Threshold;
    const int n = spec.kmax + 1;
    modes_.reserve(static_cast<std::size_t>(n) * n);
    for (int m2 = 0; m2 < n; ++m2) {
      for (int m1 = 0; m1 < n; ++m1) {
        const double lam = basis.lambda(m1, m2);
        modes_.push_back({m1, m2, lam, std::pow(1.0 + lam, -0.5 * spec.delta)});
      }
    }
    const Grid& g = basis.grid();
    phi_x_.resize(static_cast<std::size_t>(n) * g.nx());
    phi_y_.resize(static_cast<std::size_t>(n) * g.ny());
    for (int m = 0; m < n; ++m) {
      for (int i = 0; i < g.nx(); ++i) phi_x_[m * g.nx() + i] = basis.mode_value(m, 0, i, 0);
      for (int j = 0; j < g.ny(); ++j) phi_y_[m * g.ny() + j] = basis.mode_value(0, m, 0, j);
    }
  }

  const NoiseSpec& spec() const noexcept { return spec_; }
  const SpectralBasis& basis() const noexcept { return basis_; }
  const Grid& grid() const noexcept { return basis_.grid(); }
  const std::vector<Mode>& modes() const noexcept { return modes_; }
  /// Set when delta <= 2: the H^1 Hilbert-Schmidt sum is not expected to converge.
  bool below_h1_threshold() const noexcept { return below_h1_threshold_; }

  std::uint64_t step() const noexcept { return step_; }
  void reset() noexcept { step_ = 0; }
  void seek(std::uint64_t step) noexcept { step_ = step; }

  /// Standard normals xi_k for increment number `step`, one per retained mode.
  std::vector<double> normals(std::uint64_t step) const {
    std::vector<double> xi(modes_.size());
    for (std::size_t k = 0; k < modes_.size(); k += 2) {
      const auto [a, b] = normal_pair(spec_.seed, step, static_cast<std::uint32_t>(k / 2), 0u);
      xi[k] = a;
      if (k + 1 < xi.size()) xi[k + 1] = b;
    }
    return xi;
  }

  /// dW(x) = sqrt(dt) sum_k q_k phi_k(x) xi_k; advances the step counter.
  Field sample_increment(double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("noise increment needs dt > 0");
    const std::vector<double> xi = normals(step_++);
    std::vector<double> amp(xi.size());
    const double sdt = std::sqrt(dt);
    for (std::size_t k = 0; k < xi.size(); ++k) amp[k] = modes_[k].q * xi[k] * sdt;
    return synthesize(amp);
  }

  /// Field sum_k c_k phi_k over the retained modes (coefficients in modes() order).
  Field synthesize(const std::vector<double>& coeff) const {
    const Grid& g = grid();
    const int n = spec_.kmax + 1;
    // Contract over m1 first: row[m2][i] = sum_m1 c(m1, m2) phi_m1(x_i).
    std::vector<double> row(static_cast<std::size_t>(n) * g.nx(), 0.0);
    for (int m2 = 0; m2 < n; ++m2) {
      for (int m1 = 0; m1 < n; ++m1) {
        const double c = coeff[static_cast<std::size_t>(m2) * n + m1];
        if (c == 0.0) continue;
        const double* px = &phi_x_[static_cast<std::size_t>(m1) * g.nx()];
        double* r = &row[static_cast<std::size_t>(m2) * g.nx()];
        for (int i = 0; i < g.nx(); ++i) r[i] += c * px[i];
      }
    }
    Field f(g);
    double* out = f.values().data();
    const int nx = g.nx();
    for (int j = 0; j < g.ny(); ++j) {
      double* dst = out + static_cast<std::size_t>(j) * nx;
      for (int m2 = 0; m2 < n; ++m2) {
        const double py = phi_y_[static_cast<std::size_t>(m2) * g.ny() + j];
        const double* r = &row[static_cast<std::size_t>(m2) * nx];
        for (int i = 0; i < nx; ++i) dst[i] += py * r[i];
      }
    }
    return f;
  }

  /// sum_k q_k^2 phi_k(x)^2, the pointwise variance of W(1, x).
  Field pointwise_variance() const {
    const Grid& g = grid();
    const int n = spec_.kmax + 1;
    Field f(g);
    for (int j = 0; j < g.ny(); ++j) {
      for (int i = 0; i < g.nx(); ++i) {
        double s = 0.0;
        for (int m2 = 0; m2 < n; ++m2) {
          const double py = phi_y_[static_cast<std::size_t>(m2) * g.ny() + j];
          double sx = 0.0;
          for (int m1 = 0; m1 < n; ++m1) {
            const double px = phi_x_[static_cast<std::size_t>(m1) * g.nx() + i];
            const double q = modes_[static_cast<std::size_t>(m2) * n + m1].q;
            sx += q * q * px * px;
          }
          s += sx * py * py;
        }
        f(i, j) = s;
      }
    }
    return f;
  }

 private:
  NoiseSpec spec_;
  SpectralBasis basis_;
  std::vector<Mode> modes_;
  std::vector<double> phi_x_;  // [m * nx + i]
  std::vector<double> phi_y_;  // [m * ny + j]
  std::uint64_t step_ = 0;
  bool below_h1_threshold_ = false;
};

/// Ito drift that replaces a Stratonovich product sigma f o dW:
/// mu(x) = 1/2 sigma^2 sum_k q_k^2 phi_k(x)^2.
inline Field correction_mu(const WienerSampler& s, double sigma) {
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be nonnegative");
  Field mu = s.pointwise_variance();
  mu *= 0.5 * sigma * sigma;
  return mu;
}

/// Function space in which the Hilbert-Schmidt sum of the noise basis is taken.
struct NormSpace {
  enum class Kind { l2, h1, linf, lp };
  Kind kind = Kind::l2;
  double p = 2.0;

  static NormSpace l2() { return {Kind::l2, 2.0}; }
  static NormSpace h1() { return {Kind::h1, 2.0}; }
  static NormSpace linf() { return {Kind::linf, 2.0}; }
  static NormSpace lp(double p) { return {Kind::lp, p}; }
};

struct HsReport {
  NormSpace space;
  /// partial_sums[K] = sum over max(m1, m2) <= K of q_k^2 |phi_k|^2_space.
  std::vector<double> partial_sums;
  bool converged = false;
};

namespace detail {

// |sqrt(2) cos(pi m x)|^2_{L^p(0,1)} for m >= 1.
inline double cosine_lp_norm_sq(double p) {
  const double mean_abs_pow =
      std::tgamma(0.5 * (p + 1.0)) / (std::sqrt(std::numbers::pi) * std::tgamma(0.5 * p + 1.0));
  return 2.0 * std::pow(mean_abs_pow, 2.0 / p);
}

inline double mode_norm_sq(const WienerSampler::Mode& m, const NormSpace& space) {
  const int nonconstant = (m.m1 > 0 ? 1 : 0) + (m.m2 > 0 ? 1 : 0);
  switch (space.kind) {
    case NormSpace::Kind::l2:
      return 1.0;
    case NormSpace::Kind::h1:
      return 1.0 + m.lambda;
    case NormSpace::Kind::linf:
      return std::pow(2.0, nonconstant);
    case NormSpace::Kind::lp:
      return std::pow(cosine_lp_norm_sq(space.p), nonconstant);
  }
  return 0.0;
}

}  // namespace detail

/// Partial Hilbert-Schmidt sums of the retained noise basis in `space`.
///
/// Converged when the outer half-shell S_K - S_{K/2} is below 1% of S_K at
/// K = kmax.
inline HsReport hs_diagnostic(const WienerSampler& s, const NormSpace& space) {
  if (space.kind == NormSpace::Kind::lp && !(space.p >= 1.0)) {
    throw InvalidArgument("L^p space needs p >= 1");
  }
  const int kmax = s.spec().kmax;
  std::vector<double> shell(static_cast<std::size_t>(kmax) + 1, 0.0);
  for (const auto& m : s.modes()) {
    shell[std::max(m.m1, m.m2)] += m.q * m.q * detail::mode_norm_sq(m, space);
  }
  HsReport r;
  r.space = space;
  r.partial_sums.resize(shell.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < shell.size(); ++k) {
    acc += shell[k];
    r.partial_sums[k] = acc;
  }
  const double full = r.partial_sums.back();
  const double half = r.partial_sums[static_cast<std::size_t>(kmax / 2)];
  r.converged = kmax == 0 || full - half < 0.01 * full;
  return r;
}

}  // namespace kspm

#endif  // KSPM_NOISE_HPP
