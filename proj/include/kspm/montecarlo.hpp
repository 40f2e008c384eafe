#ifndef KSPM_MONTECARLO_HPP
#define KSPM_MONTECARLO_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "kspm/errors.hpp"
#include "kspm/fixed_point.hpp"
#include "kspm/grid.hpp"
#include "kspm/initial.hpp"
#include "kspm/noise.hpp"
#include "kspm/norms.hpp"
#include "kspm/params.hpp"
#include "kspm/rng.hpp"
#include "kspm/schedule.hpp"
#include "kspm/spectral.hpp"

namespace kspm {

enum class Method { direct, picard };
enum class DtPolicy { adaptive, fixed };

/// How the stochastic products are interpreted.
///   ito           Euler-Maruyama, no drift correction
///   stratonovich  Euler-Maruyama with correction_mu folded into the drift
///   heun          Heun predictor-corrector (Stratonovich without correction)
enum class Integrator { ito, stratonovich, heun };

inline const char* to_string(Method m) { return m == Method::direct ? "direct" : "picard"; }
inline const char* to_string(DtPolicy d) { return d == DtPolicy::adaptive ? "adaptive" : "fixed"; }
inline const char* to_string(Integrator i) {
  switch (i) {
    case Integrator::ito: return "ito";
    case Integrator::stratonovich: return "stratonovich";
    case Integrator::heun: return "heun";
  }
  return "?";
}

struct EnsembleConfig {
  std::size_t num_paths = 1;
  int resolution = 64;
  double t_end = 0.1;
  DtPolicy dt_policy = DtPolicy::adaptive;
  double dt = 1e-4;  ///< step of the fixed policy
  double dt_max = 1e-3;
  std::size_t snapshots = 100;
  double cfl_safety = 0.4;
  ModelParams params;
  NoiseSpec noise_u;  ///< seed is replaced per path; sigma mirrors params.sigma_u
  NoiseSpec noise_v;
  std::uint64_t base_seed = 1;
  Method method = Method::direct;
  double picard_tol = 0.0;  ///< 0 selects default_picard_tolerance
  std::size_t picard_max_iter = 20;
  Integrator integrator = Integrator::ito;
  InitialCondition u0 = InitialCondition::cosine(1, 1, 0.5, 1.0);
  InitialCondition v0 = InitialCondition::cosine(1, 0, 0.5, 1.0);

  /// Reference stochastic configuration on 64^2 cells up to T = 0.1.
  static EnsembleConfig default_stochastic() {
    EnsembleConfig c;
    c.params.r_u = 0.1;
    c.params.r_v = 1.0;
    c.params.chi = 1.0;
    c.params.alpha = 0.5;
    c.params.beta = 1.0;
    c.params.sigma_u = 0.5;
    c.params.sigma_v = 0.5;
    c.params.gamma = 2.0;
    c.noise_u = {0.5, 2.5, 8, 0};
    c.noise_v = {0.5, 2.5, 8, 0};
    return c;
  }

  Grid grid() const { return Grid(resolution, resolution); }

  CflOptions cfl() const {
    CflOptions o;
    o.safety = cfl_safety;
    o.dt_max = dt_max;
    return o;
  }

  std::vector<std::string> violations() const {
    std::vector<std::string> out = params.violations();
    if (num_paths < 1) out.emplace_back("paths must be at least 1");
    if (resolution < Grid::kMinCells) out.emplace_back("resolution must be at least 4");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) out.emplace_back("t_end must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) out.emplace_back("dt must be positive");
    if (!(dt_max > 0.0) || !std::isfinite(dt_max)) out.emplace_back("dt_max must be positive");
    if (snapshots < 1) out.emplace_back("snapshots must be at least 1");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) out.emplace_back("cfl_safety must lie in (0, 1]");
    if (!(picard_tol >= 0.0)) out.emplace_back("picard_tol must be nonnegative");
    if (picard_max_iter < 1) out.emplace_back("picard_max_iter must be at least 1");
    for (const auto* n : {&noise_u, &noise_v}) {
      const char* which = n == &noise_u ? "u" : "v";
      if (!(n->delta > 1.0)) out.push_back(std::string("delta_") + which + " must exceed 1");
      if (n->kmax < 0 || n->kmax >= resolution) {
        out.push_back(std::string("kmax_") + which + " must lie in [0, resolution)");
      }
    }
    if (integrator == Integrator::heun && method == Method::picard) {
      out.emplace_back("integrator heun requires method direct");
    }
    if (u0.known_negative()) out.emplace_back("u0 must be nonnegative (u0 >= 0)");
    if (v0.known_negative()) out.emplace_back("v0 must be nonnegative (v0 >= 0)");
    return out;
  }

  void validate() const {
    const auto v = violations();
    if (!v.empty()) throw InvalidArgument("invalid configuration: " + v.front());
  }
};

/// Per-path values of the moment functionals and positivity diagnostics.
struct PathFunctionals {
  double q1 = 0.0;      ///< sup |u|_{L^{g+1}}^{g+1} + (g/2)(g+1) g int |u^g grad u|^2
  double q1_alt = 0.0;  ///< same with the integrand u^(2g-2) |grad u|^2
  double q2 = 0.0;      ///< sup |u|_{H^-1}^2 + int |u|_{L^{g+1}}^{g+1}
  double q3 = 0.0;      ///< (int |v|_{H^1_4}^{g+1})^(4/(g+1))
  double q3_alt = 0.0;  ///< int |v|_{H^1_4}^4
  double q4 = 0.0;      ///< sup |v|_{L^4}^4
  double u_l2_final = 0.0;
  double mass_initial = 0.0;
  double mass_final = 0.0;
  double min_u = 0.0;
  double min_v = 0.0;
  double max_v = 0.0;
  std::size_t clip_count = 0;
  std::size_t steps = 0;
  std::size_t cells = 0;
};

namespace detail {

inline double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) s += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
  return s;
}

/// int w(u) |grad u|^2 dx on the shared gradient stencil.
inline double weighted_dirichlet(const Field& u, double exponent) {
  const auto [gx, gy] = gradient(u);
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double w = u[k] > 0.0 ? std::pow(u[k], exponent) : (exponent == 0.0 ? 1.0 : 0.0);
    s += w * (gx[k] * gx[k] + gy[k] * gy[k]);
  }
  return s * u.grid().cell_area();
}

}  // namespace detail

/// Moment functionals of one trajectory. Suprema are maxima over the
/// recorded instants, time integrals use the trapezoid rule on them.
inline PathFunctionals path_functionals(const SpectralBasis& basis, const PathTrajectory& t,
                                        const ModelParams& p) {
  if (t.u_path.empty() || t.u_path.size() != t.v_path.size() || t.u_path.size() != t.times.size()) {
    throw InvalidArgument("path_functionals needs a complete trajectory");
  }
  const double g = p.gamma;
  const std::size_t n = t.times.size();
  std::vector<double> lg(n), energy(n), energy_alt(n), h14(n), h14_4(n);
  PathFunctionals f;
  double sup_lg = 0.0, sup_hm1 = 0.0, sup_l4 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Field& u = t.u_path[k];
    const Field& v = t.v_path[k];
    lg[k] = std::pow(lp_norm(u, g + 1.0), g + 1.0);
    energy[k] = detail::weighted_dirichlet(u, 2.0 * g);
    energy_alt[k] = detail::weighted_dirichlet(u, 2.0 * g - 2.0);
    const double hv = h1p_norm(v, 4.0);
    h14[k] = std::pow(hv, g + 1.0);
    h14_4[k] = std::pow(hv, 4.0);
    sup_lg = std::max(sup_lg, lg[k]);
    const double hm1 = sobolev2_norm(basis, u, -1.0);
    sup_hm1 = std::max(sup_hm1, hm1 * hm1);
    sup_l4 = std::max(sup_l4, std::pow(lp_norm(v, 4.0), 4.0));
  }
  const double c = 0.5 * g * (g + 1.0) * g;
  f.q1 = sup_lg + c * detail::trapezoid(t.times, energy);
  f.q1_alt = sup_lg + c * detail::trapezoid(t.times, energy_alt);
  f.q2 = sup_hm1 + detail::trapezoid(t.times, lg);
  f.q3 = std::pow(detail::trapezoid(t.times, h14), 4.0 / (g + 1.0));
  f.q3_alt = detail::trapezoid(t.times, h14_4);
  f.q4 = sup_l4;
  f.u_l2_final = lp_norm(t.u_path.back(), 2.0);
  f.mass_initial = integral(t.u_path.front());
  f.mass_final = integral(t.u_path.back());
  f.min_u = std::min(t.diagnostics.min_u, t.u_path.front().min());
  f.min_v = t.min_v;
  f.max_v = t.max_v;
  f.clip_count = t.diagnostics.clip_count;
  f.steps = t.diagnostics.steps;
  f.cells = t.u_path.front().size();
  return f;
}

/// Seeds of path `index`: stream 1 drives W1, stream 2 drives W2.
inline std::pair<std::uint64_t, std::uint64_t> path_seeds(std::uint64_t base_seed, std::size_t index) {
  return {derive_seed(base_seed, index, 1), derive_seed(base_seed, index, 2)};
}

struct PathResult {
  PathTrajectory trajectory;  ///< recorded at the snapshot instants
  std::optional<FixedPointReport> fixed_point;
};

namespace detail {

inline PathTrajectory thin(PathTrajectory full, const std::vector<std::size_t>& steps) {
  PathTrajectory out;
  out.noise_u = full.noise_u;
  out.noise_v = full.noise_v;
  out.diagnostics = full.diagnostics;
  out.min_v = full.min_v;
  out.max_v = full.max_v;
  out.total_steps = full.total_steps;
  for (std::size_t s : steps) {
    out.times.push_back(full.times[s]);
    out.steps.push_back(s);
    out.u_path.push_back(std::move(full.u_path[s]));
    out.v_path.push_back(std::move(full.v_path[s]));
  }
  return out;
}

}  // namespace detail

/// Integrates path `index` of the ensemble described by `cfg`.
inline PathResult simulate_path(const EnsembleConfig& cfg, const SpectralBasis& basis, std::size_t index) {
  const Grid& g = basis.grid();
  const ModelParams& p = cfg.params;
  const auto [seed_u, seed_v] = path_seeds(cfg.base_seed, index);
  NoiseSpec nu = cfg.noise_u;
  NoiseSpec nv = cfg.noise_v;
  nu.seed = seed_u;
  nv.seed = seed_v;
  nu.sigma = p.sigma_u;
  nv.sigma = p.sigma_v;
  WienerSampler W1(nu, basis);
  WienerSampler W2(nv, basis);
  const Field u0 = cfg.u0.realize(g, p.gamma, p.r_u);
  const Field v0 = cfg.v0.realize(g, p.gamma, p.r_u);
  const DriftCorrection corr =
      cfg.integrator == Integrator::stratonovich ? DriftCorrection::stratonovich(W1, W2, p) : DriftCorrection{};
  const Scheme scheme = cfg.integrator == Integrator::heun ? Scheme::heun : Scheme::euler;

  PathResult out;
  if (cfg.method == Method::direct) {
    if (cfg.dt_policy == DtPolicy::fixed) {
      const TimeGrid times = TimeGrid::with_max_step(cfg.t_end, cfg.dt);
      out.trajectory = direct_coupled_solve(basis, u0, v0, W1, W2, p, times, corr, cfg.snapshots, scheme);
    } else {
      const AdaptiveSchedule sched{cfg.t_end, cfg.dt_max, cfg.snapshots};
      out.trajectory = direct_adaptive_solve(basis, u0, v0, W1, W2, p, sched, corr, cfg.cfl(), nullptr, scheme);
    }
    return out;
  }

  // Picard runs on a fixed grid; the adaptive policy borrows the grid
  // realized by a direct solve of the same path.
  TimeGrid times;
  std::vector<std::size_t> record;
  if (cfg.dt_policy == DtPolicy::fixed) {
    times = TimeGrid::with_max_step(cfg.t_end, cfg.dt);
    record = snapshot_steps(times, cfg.snapshots);
  } else {
    const AdaptiveSchedule sched{cfg.t_end, cfg.dt_max, cfg.snapshots};
    record = direct_adaptive_solve(basis, u0, v0, W1, W2, p, sched, corr, cfg.cfl(), &times).steps;
  }
  const double tol = cfg.picard_tol > 0.0 ? cfg.picard_tol : default_picard_tolerance(basis, u0);
  auto [full, report] = picard_iterate(basis, u0, v0, W1, W2, p, times, tol, cfg.picard_max_iter, corr);
  out.trajectory = detail::thin(std::move(full), record);
  out.fixed_point = report;
  return out;
}

/// Sum with pairwise splitting; the result depends only on the order of
/// the input, not on how the inputs were produced.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

struct Estimate {
  double mean = 0.0;
  double se = 0.0;  ///< sample standard deviation / sqrt(M)
};

inline Estimate estimate(const std::vector<double>& x) {
  Estimate e;
  if (x.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double m = static_cast<double>(x.size());
  e.mean = pairwise_sum(x) / m;
  if (x.size() < 2) return e;
  std::vector<double> sq(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) sq[k] = (x[k] - e.mean) * (x[k] - e.mean);
  e.se = std::sqrt(pairwise_sum(sq) / (m - 1.0) / m);
  return e;
}

struct MomentEstimates {
  Estimate q1, q1_alt, q2, q3, q3_alt, q4, u_l2_final;
  // Right-hand-side candidates built from the initial data.
  double u0_lg = 0.0;      ///< |u0|_{L^{g+1}}^{g+1}
  double u0_hm1_sq = 0.0;  ///< |u0|_{H^-1}^2
  double v0_l4 = 0.0;      ///< |v0|_{L^4}
  double v0_l4_4 = 0.0;    ///< |v0|_{L^4}^4
  double min_u = std::numeric_limits<double>::infinity();
  double min_v = std::numeric_limits<double>::infinity();
  double max_v = -std::numeric_limits<double>::infinity();
  double clip_fraction = 0.0;
  std::size_t paths_requested = 0;
  std::size_t failures = 0;
  std::vector<std::size_t> accepted;  ///< indices of paths that finished
  std::vector<PathFunctionals> per_path;
  std::vector<std::string> failure_messages;
  std::size_t picard_nonconverged = 0;

  /// More than 5% of the requested paths failed.
  bool failed() const noexcept { return failures * 20 > paths_requested; }
};

/// Worker count: `requested` if positive, else KSPM_THREADS, else the
/// hardware concurrency; never more than `jobs`.
inline unsigned worker_count(std::size_t jobs, unsigned requested = 0) {
  unsigned n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("KSPM_THREADS"); env != nullptr && *env != '\0') {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end != env && *end == '\0' && v > 0) n = static_cast<unsigned>(v);
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

/// Runs every path of `cfg` and reduces the functionals in path order, so
/// the result is independent of the number of workers.
inline MomentEstimates run_ensemble(const EnsembleConfig& cfg, unsigned threads = 0) {
  cfg.validate();
  const SpectralBasis basis(cfg.grid());
  const Grid& g = basis.grid();
  const ModelParams& p = cfg.params;
  // Prepare shared transform plans before any worker starts.
  (void)basis.from_spectral(basis.to_spectral(Field(g)));

  const std::size_t M = cfg.num_paths;
  std::vector<std::optional<PathFunctionals>> slots(M);
  std::vector<std::string> errors(M);
  std::vector<char> nonconverged(M, 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < M; i = next++) {
      try {
        const PathResult r = simulate_path(cfg, basis, i);
        slots[i] = path_functionals(basis, r.trajectory, p);
        if (r.fixed_point && !r.fixed_point->converged) nonconverged[i] = 1;
      } catch (const NumericalFailure& e) {
        errors[i] = "path " + std::to_string(i) + ": " + e.what();
      }
    }
  };
  const unsigned nthreads = worker_count(M, threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    for (unsigned k = 0; k < nthreads; ++k) pool.emplace_back(worker);
  }

  MomentEstimates out;
  out.paths_requested = M;
  const Field u0 = cfg.u0.realize(g, p.gamma, p.r_u);
  const Field v0 = cfg.v0.realize(g, p.gamma, p.r_u);
  out.u0_lg = std::pow(lp_norm(u0, p.gamma + 1.0), p.gamma + 1.0);
  const double hm1 = sobolev2_norm(basis, u0, -1.0);
  out.u0_hm1_sq = hm1 * hm1;
  out.v0_l4 = lp_norm(v0, 4.0);
  out.v0_l4_4 = std::pow(out.v0_l4, 4.0);

  std::vector<double> q1, q1a, q2, q3, q3a, q4, l2;
  std::size_t clips = 0;
  double cell_steps = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    if (!slots[i]) {
      ++out.failures;
      out.failure_messages.push_back(errors[i]);
      continue;
    }
    const PathFunctionals& f = *slots[i];
    out.accepted.push_back(i);
    out.per_path.push_back(f);
    q1.push_back(f.q1);
    q1a.push_back(f.q1_alt);
    q2.push_back(f.q2);
    q3.push_back(f.q3);
    q3a.push_back(f.q3_alt);
    q4.push_back(f.q4);
    l2.push_back(f.u_l2_final);
    out.min_u = std::min(out.min_u, f.min_u);
    out.min_v = std::min(out.min_v, f.min_v);
    out.max_v = std::max(out.max_v, f.max_v);
    clips += f.clip_count;
    cell_steps += static_cast<double>(f.steps) * static_cast<double>(f.cells);
    out.picard_nonconverged += nonconverged[i];
  }
  out.q1 = estimate(q1);
  out.q1_alt = estimate(q1a);
  out.q2 = estimate(q2);
  out.q3 = estimate(q3);
  out.q3_alt = estimate(q3a);
  out.q4 = estimate(q4);
  out.u_l2_final = estimate(l2);
  out.clip_fraction = cell_steps > 0.0 ? static_cast<double>(clips) / cell_steps : 0.0;
  return out;
}

struct RefinementLevel {
  int resolution = 0;
  double dt_max = 0.0;
  double dt = 0.0;
  MomentEstimates estimates;
  /// |Q(level) / Q(level - 1) - 1| for Q1..Q4; zero on the first level.
  double change_q1 = 0.0, change_q2 = 0.0, change_q3 = 0.0, change_q4 = 0.0;

  double max_change() const noexcept { return std::max({change_q1, change_q2, change_q3, change_q4}); }
};

/// Runs the ensemble on `levels` successive halvings of the cell size and
/// the step bounds (the adaptive step also follows the CFL limit).
inline std::vector<RefinementLevel> refinement_study(const EnsembleConfig& cfg, std::size_t levels,
                                                     unsigned threads = 0) {
  if (levels < 2) throw InvalidArgument("refinement study needs at least 2 levels");
  std::vector<RefinementLevel> out;
  EnsembleConfig c = cfg;
  for (std::size_t l = 0; l < levels; ++l) {
    RefinementLevel lev;
    lev.resolution = c.resolution;
    lev.dt_max = c.dt_max;
    lev.dt = c.dt;
    lev.estimates = run_ensemble(c, threads);
    if (!out.empty()) {
      const MomentEstimates& prev = out.back().estimates;
      auto change = [](const Estimate& a, const Estimate& b) {
        if (a.mean == b.mean) return 0.0;
        return std::abs(b.mean / a.mean - 1.0);
      };
      lev.change_q1 = change(prev.q1, lev.estimates.q1);
      lev.change_q2 = change(prev.q2, lev.estimates.q2);
      lev.change_q3 = change(prev.q3, lev.estimates.q3);
      lev.change_q4 = change(prev.q4, lev.estimates.q4);
    }
    out.push_back(std::move(lev));
    c.resolution *= 2;
    c.dt_max *= 0.5;
    c.dt *= 0.5;
  }
  return out;
}

}  // namespace kspm

#endif  // KSPM_MONTECARLO_HPP
