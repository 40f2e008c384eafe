#ifndef KSPM_U_STEP_HPP
#define KSPM_U_STEP_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "kspm/errors.hpp"
#include "kspm/grid.hpp"
#include "kspm/noise.hpp"
#include "kspm/params.hpp"
#include "kspm/schedule.hpp"
#include "kspm/v_step.hpp"

namespace kspm {

/// x^[gamma] = x |x|^(gamma - 1); odd in x.
inline double signed_power(double x, double gamma) noexcept {
  if (x == 0.0) return 0.0;
  if (gamma == 2.0) return x * std::abs(x);
  return std::copysign(std::pow(std::abs(x), gamma), x);
}

inline Field signed_power(const Field& f, double gamma) {
  Field out(f.grid());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = signed_power(f[k], gamma);
  return out;
}

/// Conservative divergence of eta grad(v).
///
/// Face fluxes F = eta_up (v_R - v_L) / h, with eta taken from the donor cell
/// on the low-v side (the transport velocity points up the gradient). Wall
/// faces carry no flux, so the grid sum telescopes to zero.
inline Field chemo_flux_div(const Field& eta, const Field& v) {
  eta.check_same_grid(v);
  const Grid& g = v.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  const double ihx = 1.0 / g.hx();
  const double ihy = 1.0 / g.hy();
  Field out(g);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const double dv = (v(i + 1, j) - v(i, j)) * ihx;
      const double donor = dv >= 0.0 ? eta(i, j) : eta(i + 1, j);
      const double flux = donor * dv * ihx;
      out(i, j) += flux;
      out(i + 1, j) -= flux;
    }
  }
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double dv = (v(i, j + 1) - v(i, j)) * ihy;
      const double donor = dv >= 0.0 ? eta(i, j) : eta(i, j + 1);
      const double flux = donor * dv * ihy;
      out(i, j) += flux;
      out(i, j + 1) -= flux;
    }
  }
  return out;
}

/// Largest face-normal difference quotient |v_R - v_L| / h.
inline double max_face_gradient(const Field& v) {
  const Grid& g = v.grid();
  double m = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (i + 1 < g.nx()) m = std::max(m, std::abs(v(i + 1, j) - v(i, j)) / g.hx());
      if (j + 1 < g.ny()) m = std::max(m, std::abs(v(i, j + 1) - v(i, j)) / g.hy());
    }
  }
  return m;
}

struct CflOptions {
  double safety = 0.4;
  double dt_max = 1e-3;
  double epsilon = 1e-300;
};

/// Explicit stability limit of the u-step:
///   safety * min(h^2 / (4 r_u gamma max(u)^(gamma-1)), h / (chi max|grad v|)),
/// capped at dt_max.
inline double cfl_dt(const Field& u, const Field& v, const ModelParams& p,
                     const CflOptions& opt = {}) {
  u.check_same_grid(v);
  const Grid& g = u.grid();
  const double h = std::min(g.hx(), g.hy());
  const double umax = std::max(u.max(), 0.0);
  const double diffusive = h * h / (4.0 * p.r_u * p.gamma * std::pow(umax, p.gamma - 1.0) + opt.epsilon);
  const double transport = h / (p.chi * max_face_gradient(v) + opt.epsilon);
  return std::min(opt.safety * std::min(diffusive, transport), opt.dt_max);
}

struct StepDiagnostics {
  double dt_used = 0.0;
  std::size_t clip_count = 0;
  double mass_before = 0.0;
  double mass_after = 0.0;
  double max_u = 0.0;
  double cfl_ratio = 0.0;  ///< dt_used / cfl_dt; above 1 means the step exceeded the limit
};

namespace detail {

/// u step with a precomputed stochastic increment `noise` (already
/// multiplied by sigma_u and the state).
inline std::pair<Field, StepDiagnostics> advance_u(const Field& u, const Field& v, const Field& eta,
                                                   const ModelParams& p, const Field* mu,
                                                   const Field& noise, double dt,
                                                   std::size_t step_index) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("step_u needs dt > 0");
  u.check_same_grid(v);
  u.check_same_grid(eta);
  u.check_same_grid(noise);
  if (mu != nullptr) u.check_same_grid(*mu);
  require_finite(u, "u", step_index);
  require_finite(v, "v", step_index);
  require_finite(eta, "eta", step_index);

  StepDiagnostics d;
  d.dt_used = dt;
  d.mass_before = integral(u);
  d.cfl_ratio = dt / cfl_dt(u, v, p, {.dt_max = std::numeric_limits<double>::infinity()});

  const Field diffusion = laplacian(signed_power(u, p.gamma));
  const Field transport = chemo_flux_div(eta, v);
  Field next(u.grid());
  for (std::size_t k = 0; k < u.size(); ++k) {
    double drift = p.r_u * diffusion[k] - p.chi * transport[k];
    if (mu != nullptr) drift += (*mu)[k] * u[k];
    double value = u[k] + dt * drift + noise[k];
    if (!std::isfinite(value)) throw NumericalFailure("u became non-finite", step_index, k);
    if (value < 0.0) {
      value = 0.0;
      ++d.clip_count;
    }
    next[k] = value;
  }
  d.mass_after = integral(next);
  d.max_u = next.max();
  return {std::move(next), d};
}

}  // namespace detail

/// One explicit step of
///   du = (r_u lap_h(u^[gamma]) - chi div(eta grad v) + mu u) dt + sigma_u u dW1,
/// followed by clipping of negative cells to zero (counted in clip_count).
/// `mu` may be nullptr (pure Ito run).
inline std::pair<Field, StepDiagnostics> step_u(const Field& u, const Field& v, const Field& eta,
                                                const ModelParams& p, const Field* mu,
                                                const Field& dW1, double dt,
                                                std::size_t step_index = 0) {
  u.check_same_grid(dW1);
  Field noise(u.grid());
  for (std::size_t k = 0; k < u.size(); ++k) noise[k] = p.sigma_u * u[k] * dW1[k];
  return detail::advance_u(u, v, eta, p, mu, noise, dt, step_index);
}

struct PathDiagnostics {
  std::size_t steps = 0;
  std::size_t cells = 0;
  std::size_t clip_count = 0;
  double max_cfl_ratio = 0.0;
  double min_u = std::numeric_limits<double>::infinity();

  double clip_fraction() const noexcept {
    const double denom = static_cast<double>(steps) * static_cast<double>(cells);
    return denom > 0.0 ? static_cast<double>(clip_count) / denom : 0.0;
  }

  void absorb(const StepDiagnostics& d) {
    ++steps;
    clip_count += d.clip_count;
    max_cfl_ratio = std::max(max_cfl_ratio, d.cfl_ratio);
  }
};

/// Integrates u over `times`. Step n uses eta_path[n] and the already
/// advanced concentration v_path[n + 1].
inline std::pair<std::vector<Field>, PathDiagnostics> solve_u_path(
    const Field& u0, const std::vector<Field>& v_path, const std::vector<Field>& eta_path,
    WienerSampler& W1, const ModelParams& p, const TimeGrid& times, const Field* mu = nullptr) {
  const std::size_t n = times.steps();
  if (v_path.size() != n + 1) {
    throw InvalidArgument("v path has " + std::to_string(v_path.size()) +
                          " entries, schedule needs " + std::to_string(n + 1));
  }
  if (eta_path.size() < n) throw InvalidArgument("eta path is shorter than the schedule");
  detail::require_finite(u0, "initial u", 0);

  PathDiagnostics diag;
  diag.cells = u0.size();
  diag.min_u = u0.min();
  std::vector<Field> path;
  path.reserve(n + 1);
  path.push_back(u0);
  for (std::size_t s = 0; s < n; ++s) {
    const double dt = times.dt(s);
    const Field dW = W1.sample_increment(dt);
    auto [next, d] = step_u(path.back(), v_path[s + 1], eta_path[s], p, mu, dW, dt, s + 1);
    diag.absorb(d);
    diag.min_u = std::min(diag.min_u, next.min());
    path.push_back(std::move(next));
  }
  return {std::move(path), diag};
}

}  // namespace kspm

#endif  // KSPM_U_STEP_HPP
