#ifndef KSPM_VERIFICATION_HPP
#define KSPM_VERIFICATION_HPP

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "kspm/barenblatt.hpp"
#include "kspm/field_families.hpp"
#include "kspm/fixed_point.hpp"
#include "kspm/montecarlo.hpp"
#include "kspm/norms.hpp"
#include "kspm/snapshot_io.hpp"

namespace kspm {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace verify {

inline std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

/// Noise-free, transport-free configuration on an n x n grid.
inline EnsembleConfig quiet(int n, double t_end) {
  EnsembleConfig c;
  c.resolution = n;
  c.t_end = t_end;
  c.snapshots = 1;
  c.params.r_u = 1.0;
  c.params.r_v = 1.0;
  c.params.chi = 0.0;
  c.params.alpha = 0.0;
  c.params.beta = 0.0;
  c.params.sigma_u = 0.0;
  c.params.sigma_v = 0.0;
  c.params.gamma = 2.0;
  c.noise_u = {0.0, 2.5, 1, 0};
  c.noise_v = {0.0, 2.5, 1, 0};
  c.dt_max = 1.0;
  c.v0 = InitialCondition::constant(0.0);
  return c;
}

inline double barenblatt_error(int n) {
  constexpr double mass = 0.05, t0 = 0.01, elapsed = 0.05;
  EnsembleConfig c = quiet(n, elapsed);
  c.u0 = InitialCondition::barenblatt(mass, t0);
  const SpectralBasis basis(c.grid());
  const PathResult r = simulate_path(c, basis, 0);
  return Barenblatt::with_mass(mass, 2.0, 1.0).l1_error(r.trajectory.u_path.back(), t0 + elapsed);
}

inline CheckResult barenblatt() {
  const double e32 = barenblatt_error(32), e64 = barenblatt_error(64);
  return {"barenblatt_oracle", e64 < 5e-3 && e32 / e64 >= 1.8,
          fmt("L1 error 32^2 %.3e, 64^2 %.3e, ratio %.2f", e32, e64, e32 / e64)};
}

inline CheckResult v_mode_decay() {
  EnsembleConfig c = quiet(64, 0.1);
  c.params.alpha = 0.5;
  c.dt_policy = DtPolicy::fixed;
  c.dt = 1e-4;
  c.u0 = InitialCondition::constant(0.0);
  c.v0 = InitialCondition::cosine(1, 0, 0.5, 1.0);
  const SpectralBasis basis(c.grid());
  const PathResult r = simulate_path(c, basis, 0);
  const Field& v = r.trajectory.v_path.back();
  const double coef = basis.to_spectral(v)(1, 0) / basis.to_spectral(c.v0.realize(c.grid()))(1, 0);
  const double exact = std::exp(-(std::numbers::pi * std::numbers::pi + 0.5) * 0.1);
  const double rel = std::abs(coef / exact - 1.0);
  return {"v_mode_decay", rel < 1e-3, fmt("relative error %.3e", rel)};
}

inline CheckResult mass_conservation() {
  double worst = 0.0;
  std::size_t clips = 0;
  for (double gamma : {1.5, 2.0, 3.5}) {
    EnsembleConfig c = EnsembleConfig::default_stochastic();
    c.resolution = 32;
    c.t_end = 0.02;
    c.snapshots = 2;
    c.params.gamma = gamma;
    c.params.sigma_u = 0.0;
    c.noise_u.kmax = 8;
    const SpectralBasis basis(c.grid());
    const PathResult r = simulate_path(c, basis, 0);
    const auto f = path_functionals(basis, r.trajectory, c.params);
    worst = std::max(worst, std::abs(f.mass_final / f.mass_initial - 1.0));
    clips += f.clip_count;
  }
  return {"mass_conservation", worst < 1e-10 && clips == 0,
          fmt("max relative drift %.3e, clipped cells %.0f", worst, static_cast<double>(clips))};
}

inline CheckResult positivity() {
  EnsembleConfig c = EnsembleConfig::default_stochastic();
  c.resolution = 32;
  c.t_end = 0.02;
  c.snapshots = 4;
  c.num_paths = 4;
  const MomentEstimates m = run_ensemble(c);
  const bool ok = m.failures == 0 && m.min_u >= 0.0 && m.min_v >= 0.0;
  return {"positivity", ok, fmt("min u %.3e, min v %.3e, clip fraction %.3e", m.min_u, m.min_v, m.clip_fraction)};
}

struct CoupledProblem {
  SpectralBasis basis;
  ModelParams p;
  Field u0, v0;
  WienerSampler W1, W2;
  TimeGrid times;
};

inline CoupledProblem coupled_problem(int n, double chi) {
  EnsembleConfig c = EnsembleConfig::default_stochastic();
  c.params.chi = chi;
  const Grid g(n, n);
  SpectralBasis basis(g);
  const Field u0 = c.u0.realize(g), v0 = c.v0.realize(g);
  const double dt = 0.5 * cfl_dt(u0, v0, c.params);
  return {basis,
          c.params,
          u0,
          v0,
          WienerSampler(NoiseSpec{0.5, 2.5, 4, 21}, basis),
          WienerSampler(NoiseSpec{0.5, 2.5, 4, 22}, basis),
          TimeGrid::with_max_step(0.05, dt)};
}

inline CheckResult picard_decoupled() {
  CoupledProblem s = coupled_problem(16, 0.0);
  const auto [t, r] = picard_iterate(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, s.times, 1e-12, 10);
  const auto d = direct_coupled_solve(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, s.times);
  const double gap = xnorm_distance(s.basis, d.u_path, t.u_path);
  const bool ok = r.converged && r.iterations == 2 && r.distances.back() == 0.0 && gap < 1e-12;
  return {"picard_decoupled", ok,
          fmt("iterations %.0f, last distance %.3e, gap to direct %.3e", static_cast<double>(r.iterations),
              r.distances.back(), gap)};
}

inline CheckResult picard_coupled() {
  CoupledProblem s = coupled_problem(32, 1.0);
  const auto [t, r] = picard_iterate(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, s.times, 1e-6, 20);
  const auto d = direct_coupled_solve(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, s.times);
  const double gap = xnorm_distance(s.basis, d.u_path, t.u_path);
  const bool ok = r.converged && r.monotone && gap < 1e-4;
  return {"picard_coupled", ok,
          fmt("iterations %.0f, monotone %.0f, gap to direct %.3e", static_cast<double>(r.iterations),
              r.monotone ? 1.0 : 0.0, gap)};
}

inline CheckResult norm_identities() {
  const SpectralBasis basis(Grid(32, 32));
  double worst = 0.0;
  bool monotone = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Field f = band_limited_field(basis, seed, 8, 1.0, 0.1);
    const double l2 = lp_norm(f, 2.0);
    worst = std::max(worst, std::abs(sobolev2_norm(basis, f, 0.0) / l2 - 1.0));
    worst = std::max(worst, std::abs(bessel_lp_norm(basis, f, 0.5, 2.0) / sobolev2_norm(basis, f, 0.5) - 1.0));
    double prev = 0.0;
    for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      const double n = sobolev2_norm(basis, f, s);
      monotone = monotone && n >= prev;
      prev = n;
    }
  }
  const Field c(basis.grid(), 1.5);
  for (double p : {1.0, 2.0, 4.0}) worst = std::max(worst, std::abs(bessel_lp_norm(basis, c, 0.7, p) / 1.5 - 1.0));
  return {"norm_identities", worst < 1e-10 && monotone, fmt("max relative defect %.3e", worst)};
}

inline CheckResult runst_scale_invariance() {
  const SpectralBasis basis(Grid(32, 32));
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Field w = band_limited_field(basis, seed, 6);
    const double r = runst_ratio(basis, w, 2.0, 0.4);
    worst = std::max(worst, std::abs(runst_ratio(basis, 37.5 * w, 2.0, 0.4) / r - 1.0));
  }
  return {"runst_scale_invariance", worst < 1e-12, fmt("max relative change %.3e", worst)};
}

inline CheckResult determinism() {
  EnsembleConfig c = EnsembleConfig::default_stochastic();
  c.resolution = 16;
  c.t_end = 0.01;
  c.snapshots = 2;
  c.num_paths = 4;
  c.noise_u.kmax = c.noise_v.kmax = 4;
  const MomentEstimates a = run_ensemble(c, 1);
  const MomentEstimates b = run_ensemble(c, 2);
  bool same = a.per_path.size() == b.per_path.size() && a.q1.mean == b.q1.mean && a.q1.se == b.q1.se &&
              a.q3.mean == b.q3.mean && a.q4.mean == b.q4.mean;
  for (std::size_t i = 0; same && i < a.per_path.size(); ++i) same = a.per_path[i].q2 == b.per_path[i].q2;
  return {"determinism", same, same ? "serial and parallel ensembles identical" : "ensembles differ"};
}

inline CheckResult snapshot_round_trip() {
  const Field f = band_limited_field(SpectralBasis(Grid(16, 8)), 3, 4);
  const auto bytes = encode_snapshot(f);
  const bool exact = decode_snapshot(bytes) == f;
  bool rejects = false;
  try {
    decode_snapshot({bytes.begin(), bytes.end() - 8});
  } catch (const FormatError&) {
    rejects = true;
  }
  return {"snapshot_round_trip", exact && rejects,
          exact ? (rejects ? "bitwise round trip, truncation rejected" : "truncation accepted")
                : "round trip changed values"};
}

}  // namespace verify

/// Quick invariant suite behind the `verify` subcommand.
inline std::vector<CheckResult> run_verification() {
  const std::vector<std::function<CheckResult()>> checks = {
      verify::barenblatt,       verify::v_mode_decay,      verify::mass_conservation,
      verify::positivity,       verify::picard_decoupled,  verify::picard_coupled,
      verify::norm_identities,  verify::runst_scale_invariance, verify::determinism,
      verify::snapshot_round_trip};
  std::vector<CheckResult> out;
  for (const auto& check : checks) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({"exception", false, e.what()});
    }
  }
  return out;
}

}  // namespace kspm

#endif  // KSPM_VERIFICATION_HPP
