#ifndef KSPM_V_STEP_HPP
#define KSPM_V_STEP_HPP

#include <cmath>
#include <string>
#include <vector>

#include "kspm/errors.hpp"
#include "kspm/grid.hpp"
#include "kspm/noise.hpp"
#include "kspm/params.hpp"
#include "kspm/schedule.hpp"
#include "kspm/spectral.hpp"

namespace kspm {

namespace detail {

inline void require_finite(const Field& f, const char* what, std::size_t step) {
  const std::size_t bad = f.first_non_finite();
  if (bad != f.size()) throw NumericalFailure(std::string("non-finite ") + what, step, bad);
}

/// Solves (I - dt r lap_h) x = rhs in the cosine basis, where lap_h is the
/// five-point Neumann stencil; the inverse is entrywise nonnegative.
inline Field implicit_diffusion(const SpectralBasis& basis, const Field& rhs, double dt, double r) {
  Spectrum c = basis.to_spectral(rhs);
  const double a = dt * r;
  for (std::size_t k = 0; k < c.size(); ++k) c[k] /= 1.0 + a * basis.stencil_lambda(k);
  return basis.from_spectral(c);
}

}  // namespace detail

namespace detail {

/// v step with a precomputed stochastic increment `noise` (already
/// multiplied by sigma_v and the state).
inline Field advance_v(const SpectralBasis& basis, const Field& v, const Field& eta,
                       const ModelParams& p, const Field& noise, double dt, const Field* mu,
                       std::size_t step_index) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("step_v needs dt > 0");
  v.check_same_grid(eta);
  v.check_same_grid(noise);
  require_finite(v, "v", step_index);
  require_finite(eta, "eta", step_index);
  require_finite(noise, "noise increment", step_index);
  if (mu != nullptr) v.check_same_grid(*mu);

  Field rhs(v.grid());
  for (std::size_t k = 0; k < v.size(); ++k) {
    double drift = p.beta * eta[k] - p.alpha * v[k];
    if (mu != nullptr) drift += (*mu)[k] * v[k];
    rhs[k] = v[k] + dt * drift + noise[k];
  }
  return implicit_diffusion(basis, rhs, dt, p.r_v);
}

}  // namespace detail

/// One step of dv = (r_v lap v + beta eta - alpha v) dt + sigma_v v dW2.
///
/// Reaction and noise are explicit (Euler-Maruyama), diffusion implicit:
///   (I - dt r_v lap_h) v' = v + dt (beta eta - alpha v + mu v) + sigma_v v dW2.
/// `mu` is the optional Stratonovich correction drift; pass nullptr for Ito.
inline Field step_v(const SpectralBasis& basis, const Field& v, const Field& eta,
                    const ModelParams& p, const Field& dW2, double dt,
                    const Field* mu = nullptr, std::size_t step_index = 0) {
  v.check_same_grid(dW2);
  Field noise(v.grid());
  for (std::size_t k = 0; k < v.size(); ++k) noise[k] = p.sigma_v * v[k] * dW2[k];
  return detail::advance_v(basis, v, eta, p, noise, dt, mu, step_index);
}

/// Integrates v over `times`, driven by eta_path[n] on step n.
///
/// Returns times.steps() + 1 fields and draws exactly times.steps()
/// increments from W2.
inline std::vector<Field> solve_v_path(const SpectralBasis& basis, const Field& v0,
                                       const std::vector<Field>& eta_path, WienerSampler& W2,
                                       const ModelParams& p, const TimeGrid& times,
                                       const Field* mu = nullptr) {
  const std::size_t n = times.steps();
  if (eta_path.size() < n) {
    throw InvalidArgument("eta path has " + std::to_string(eta_path.size()) +
                          " entries, schedule needs " + std::to_string(n));
  }
  detail::require_finite(v0, "initial v", 0);
  std::vector<Field> path;
  path.reserve(n + 1);
  path.push_back(v0);
  for (std::size_t s = 0; s < n; ++s) {
    const double dt = times.dt(s);
    const Field dW = W2.sample_increment(dt);
    Field next = step_v(basis, path.back(), eta_path[s], p, dW, dt, mu, s + 1);
    const std::size_t bad = next.first_non_finite();
    if (bad != next.size()) throw NumericalFailure("v became non-finite", s + 1, bad);
    path.push_back(std::move(next));
  }
  return path;
}

}  // namespace kspm

#endif  // KSPM_V_STEP_HPP
