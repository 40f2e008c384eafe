#ifndef KSPM_FIXED_POINT_HPP
#define KSPM_FIXED_POINT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kspm/errors.hpp"
#include "kspm/grid.hpp"
#include "kspm/noise.hpp"
#include "kspm/norms.hpp"
#include "kspm/params.hpp"
#include "kspm/schedule.hpp"
#include "kspm/spectral.hpp"
#include "kspm/u_step.hpp"
#include "kspm/v_step.hpp"

namespace kspm {

/// Extra linear drifts mu_u u and mu_v v. Empty for the Ito system; filled
/// with correction_mu(...) to simulate the Stratonovich system in Ito form.
struct DriftCorrection {
  std::optional<Field> u;
  std::optional<Field> v;

  const Field* u_ptr() const noexcept { return u ? &*u : nullptr; }
  const Field* v_ptr() const noexcept { return v ? &*v : nullptr; }

  static DriftCorrection stratonovich(const WienerSampler& W1, const WienerSampler& W2,
                                      const ModelParams& p) {
    return {correction_mu(W1, p.sigma_u), correction_mu(W2, p.sigma_v)};
  }
};

/// Time discretization of the stochastic terms in the direct solvers.
/// `euler` is Euler-Maruyama (Ito); `heun` averages the noise coefficient
/// over an Euler predictor and converges to the Stratonovich solution.
enum class Scheme { euler, heun };

/// One realization of (u, v) at recorded instants, with the noise needed to
/// regenerate it.
struct PathTrajectory {
  std::vector<double> times;       ///< recorded instants
  std::vector<std::size_t> steps;  ///< integration step index of each record
  std::vector<Field> u_path;
  std::vector<Field> v_path;
  NoiseSpec noise_u;
  NoiseSpec noise_v;
  PathDiagnostics diagnostics;
  double min_v = std::numeric_limits<double>::infinity();
  double max_v = -std::numeric_limits<double>::infinity();
  std::size_t total_steps = 0;
};

struct FixedPointReport {
  std::size_t iterations = 0;
  std::vector<double> distances;  ///< d_n = max_t |eta_{n+1}(t) - eta_n(t)|_{H^-1}
  bool converged = false;
  bool monotone = true;  ///< d_{n+1} < d_n held for every recorded pair
  double tolerance = 0.0;
};

namespace detail {

inline void track_v(PathTrajectory& t, const Field& v) {
  t.min_v = std::min(t.min_v, v.min());
  t.max_v = std::max(t.max_v, v.max());
}

inline std::vector<std::size_t> record_all(std::size_t n) {
  std::vector<std::size_t> idx(n + 1);
  for (std::size_t k = 0; k <= n; ++k) idx[k] = k;
  return idx;
}

inline void check_initial(const Field& u0, const Field& v0) {
  u0.check_same_grid(v0);
  if (!u0.all_finite() || !v0.all_finite()) throw InvalidArgument("initial data must be finite");
  if (u0.min() < 0.0 || v0.min() < 0.0) {
    throw InvalidArgument("initial data must be nonnegative (u0 >= 0 and v0 >= 0)");
  }
}

struct CoupledState {
  Field u;
  Field v;
  StepDiagnostics diag;
};

/// One step of the jointly advanced system: v with eta = u^n, then u with
/// the new v and eta = u^n. Draws one increment from each sampler.
inline CoupledState coupled_step(const SpectralBasis& basis, const Field& u, const Field& v,
                                 WienerSampler& W1, WienerSampler& W2, const ModelParams& p,
                                 const DriftCorrection& corr, Scheme scheme, double dt,
                                 std::size_t step_index) {
  const Field dW2 = W2.sample_increment(dt);
  const Field dW1 = W1.sample_increment(dt);
  Field v_next = step_v(basis, v, u, p, dW2, dt, corr.v_ptr(), step_index);
  if (const std::size_t bad = v_next.first_non_finite(); bad != v_next.size()) {
    throw NumericalFailure("v became non-finite", step_index, bad);
  }
  auto [u_next, d] = step_u(u, v_next, u, p, corr.u_ptr(), dW1, dt, step_index);
  if (scheme == Scheme::euler) return {std::move(u_next), std::move(v_next), d};

  // Heun corrector: the noise coefficient is averaged between the current
  // state and the Euler predictor, which realizes the Stratonovich integral.
  Field noise_v(v.grid());
  for (std::size_t k = 0; k < v.size(); ++k) noise_v[k] = 0.5 * p.sigma_v * (v[k] + v_next[k]) * dW2[k];
  Field v_corr = advance_v(basis, v, u, p, noise_v, dt, corr.v_ptr(), step_index);
  if (const std::size_t bad = v_corr.first_non_finite(); bad != v_corr.size()) {
    throw NumericalFailure("v became non-finite", step_index, bad);
  }
  Field noise_u(u.grid());
  for (std::size_t k = 0; k < u.size(); ++k) noise_u[k] = 0.5 * p.sigma_u * (u[k] + u_next[k]) * dW1[k];
  auto [u_corr, dc] = advance_u(u, v_corr, u, p, corr.u_ptr(), noise_u, dt, step_index);
  dc.clip_count += d.clip_count;
  return {std::move(u_corr), std::move(v_corr), dc};
}

}  // namespace detail

/// Solution operator: eta -> (u, v) where v solves the eta-driven linear
/// equation and u the cell equation with transport chi div(eta grad v).
///
/// Both samplers are reset first, so every call sees the same realization.
/// The returned trajectory records every step.
inline PathTrajectory apply_T(const SpectralBasis& basis, const std::vector<Field>& eta_path,
                              WienerSampler& W1, WienerSampler& W2, const ModelParams& p,
                              const Field& u0, const Field& v0, const TimeGrid& times,
                              const DriftCorrection& corr = {}) {
  const std::size_t n = times.steps();
  if (eta_path.size() != n + 1 && eta_path.size() != n) {
    throw InvalidArgument("eta path length " + std::to_string(eta_path.size()) +
                          " does not match a schedule of " + std::to_string(n) + " steps");
  }
  W1.reset();
  W2.reset();
  PathTrajectory t;
  t.noise_u = W1.spec();
  t.noise_v = W2.spec();
  t.v_path = solve_v_path(basis, v0, eta_path, W2, p, times, corr.v_ptr());
  auto [u_path, diag] = solve_u_path(u0, t.v_path, eta_path, W1, p, times, corr.u_ptr());
  t.u_path = std::move(u_path);
  t.diagnostics = diag;
  for (const Field& v : t.v_path) detail::track_v(t, v);
  t.times = times.times();
  t.steps = detail::record_all(n);
  t.total_steps = n;
  return t;
}

/// Pathwise sup-in-time H^-1 distance max_t |a(t) - b(t)|_{H^-1_2}.
inline double xnorm_distance(const SpectralBasis& basis, const std::vector<Field>& a,
                             const std::vector<Field>& b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("xnorm_distance: sequences of length " + std::to_string(a.size()) +
                          " and " + std::to_string(b.size()));
  }
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, sobolev2_norm(basis, a[k] - b[k], -1.0));
  return d;
}

/// Default Picard tolerance 1e-6 (1 + |u0|_{H^-1}).
inline double default_picard_tolerance(const SpectralBasis& basis, const Field& u0) {
  return 1e-6 * (1.0 + sobolev2_norm(basis, u0, -1.0));
}

/// Picard iteration eta_{n+1} = T(eta_n) from eta_0(t) = u0 with one fixed
/// noise realization. Stops once d_n < tol; running out of iterations is
/// reported through `converged`, not thrown.
inline std::pair<PathTrajectory, FixedPointReport> picard_iterate(
    const SpectralBasis& basis, const Field& u0, const Field& v0, WienerSampler& W1,
    WienerSampler& W2, const ModelParams& p, const TimeGrid& times, double tol,
    std::size_t max_iter, const DriftCorrection& corr = {}) {
  if (!(tol > 0.0)) throw InvalidArgument("picard tolerance must be positive");
  if (max_iter < 1) throw InvalidArgument("picard needs max_iter >= 1");
  detail::check_initial(u0, v0);

  FixedPointReport report;
  report.tolerance = tol;
  std::vector<Field> eta(times.steps() + 1, u0);
  PathTrajectory current;
  for (std::size_t it = 0; it < max_iter; ++it) {
    current = apply_T(basis, eta, W1, W2, p, u0, v0, times, corr);
    const double d = xnorm_distance(basis, current.u_path, eta);
    if (!report.distances.empty()) {
      const double prev = report.distances.back();
      if (!(d < prev || prev == 0.0)) report.monotone = false;
    }
    report.distances.push_back(d);
    report.iterations = it + 1;
    if (d < tol) {
      report.converged = true;
      break;
    }
    eta = current.u_path;
  }
  return {std::move(current), report};
}

/// Reference integrator of the coupled system on a fixed time grid: each
/// step advances v with eta = u^n, then u with the new v and eta = u^n.
/// `snapshots` = 0 records every step; otherwise that many uniform records.
inline PathTrajectory direct_coupled_solve(const SpectralBasis& basis, const Field& u0,
                                           const Field& v0, WienerSampler& W1, WienerSampler& W2,
                                           const ModelParams& p, const TimeGrid& times,
                                           const DriftCorrection& corr = {},
                                           std::size_t snapshots = 0,
                                           Scheme scheme = Scheme::euler) {
  detail::check_initial(u0, v0);
  W1.reset();
  W2.reset();
  const std::size_t n = times.steps();
  const std::vector<std::size_t> record =
      snapshots == 0 ? detail::record_all(n) : snapshot_steps(times, snapshots);

  PathTrajectory t;
  t.noise_u = W1.spec();
  t.noise_v = W2.spec();
  t.diagnostics.cells = u0.size();
  t.diagnostics.min_u = u0.min();
  t.total_steps = n;
  Field u = u0;
  Field v = v0;
  detail::track_v(t, v);
  std::size_t next_record = 0;
  auto maybe_record = [&](std::size_t step) {
    if (next_record < record.size() && record[next_record] == step) {
      t.times.push_back(times[step]);
      t.steps.push_back(step);
      t.u_path.push_back(u);
      t.v_path.push_back(v);
      ++next_record;
    }
  };
  maybe_record(0);
  for (std::size_t s = 0; s < n; ++s) {
    auto next = detail::coupled_step(basis, u, v, W1, W2, p, corr, scheme, times.dt(s), s + 1);
    t.diagnostics.absorb(next.diag);
    t.diagnostics.min_u = std::min(t.diagnostics.min_u, next.u.min());
    u = std::move(next.u);
    v = std::move(next.v);
    detail::track_v(t, v);
    maybe_record(s + 1);
  }
  return t;
}

/// Direct coupled solve with CFL-adaptive steps that land exactly on the
/// schedule's snapshot instants. The realized instants are returned in
/// `realized` when requested (e.g. to run a Picard solve on the same grid).
inline PathTrajectory direct_adaptive_solve(const SpectralBasis& basis, const Field& u0,
                                            const Field& v0, WienerSampler& W1,
                                            WienerSampler& W2, const ModelParams& p,
                                            const AdaptiveSchedule& schedule,
                                            const DriftCorrection& corr = {},
                                            const CflOptions& cfl = {},
                                            TimeGrid* realized = nullptr,
                                            Scheme scheme = Scheme::euler) {
  detail::check_initial(u0, v0);
  if (!(schedule.t_end > 0.0) || schedule.snapshots == 0) {
    throw InvalidArgument("adaptive schedule needs t_end > 0 and at least one snapshot");
  }
  W1.reset();
  W2.reset();
  CflOptions opt = cfl;
  opt.dt_max = std::min(opt.dt_max, schedule.dt_max);

  PathTrajectory t;
  t.noise_u = W1.spec();
  t.noise_v = W2.spec();
  t.diagnostics.cells = u0.size();
  t.diagnostics.min_u = u0.min();
  Field u = u0;
  Field v = v0;
  detail::track_v(t, v);
  double time = 0.0;
  std::vector<double> instants{0.0};
  t.times.push_back(0.0);
  t.steps.push_back(0);
  t.u_path.push_back(u);
  t.v_path.push_back(v);

  std::size_t s = 0;
  for (std::size_t k = 1; k <= schedule.snapshots; ++k) {
    const double target = schedule.snapshot_time(k);
    while (time < target) {
      double next_time = time + cfl_dt(u, v, p, opt);
      if (next_time >= target || target - next_time < 1e-12 * schedule.t_end) next_time = target;
      // Taking dt as a difference of instants keeps the realized grid exact.
      const double dt = next_time - time;
      auto next = detail::coupled_step(basis, u, v, W1, W2, p, corr, scheme, dt, s + 1);
      t.diagnostics.absorb(next.diag);
      t.diagnostics.min_u = std::min(t.diagnostics.min_u, next.u.min());
      u = std::move(next.u);
      v = std::move(next.v);
      detail::track_v(t, v);
      ++s;
      time = next_time;
      instants.push_back(time);
    }
    t.times.push_back(time);
    t.steps.push_back(s);
    t.u_path.push_back(u);
    t.v_path.push_back(v);
  }
  t.total_steps = s;
  if (realized != nullptr) *realized = TimeGrid(std::move(instants));
  return t;
}

}  // namespace kspm

#endif  // KSPM_FIXED_POINT_HPP
