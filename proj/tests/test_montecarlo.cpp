#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "kspm/montecarlo.hpp"

namespace {

using namespace kspm;

EnsembleConfig quiet_config(double c) {
  EnsembleConfig cfg;
  cfg.resolution = 16;
  cfg.t_end = 0.02;
  cfg.snapshots = 10;
  cfg.params.r_u = 0.1;
  cfg.params.r_v = 1.0;
  cfg.params.chi = 0.0;
  cfg.params.alpha = 0.0;
  cfg.params.beta = 0.0;
  cfg.params.sigma_u = 0.0;
  cfg.params.sigma_v = 0.0;
  cfg.params.gamma = 2.0;
  cfg.noise_u = {0.0, 2.5, 4, 0};
  cfg.noise_v = {0.0, 2.5, 4, 0};
  cfg.u0 = InitialCondition::constant(c);
  cfg.v0 = InitialCondition::constant(0.0);
  return cfg;
}

EnsembleConfig small_stochastic(std::size_t paths) {
  EnsembleConfig cfg = EnsembleConfig::default_stochastic();
  cfg.resolution = 16;
  cfg.t_end = 0.01;
  cfg.snapshots = 5;
  cfg.noise_u.kmax = 4;
  cfg.noise_v.kmax = 4;
  cfg.num_paths = paths;
  cfg.base_seed = 99;
  return cfg;
}

void expect_same(const MomentEstimates& a, const MomentEstimates& b) {
  ASSERT_EQ(a.per_path.size(), b.per_path.size());
  for (std::size_t i = 0; i < a.per_path.size(); ++i) {
    EXPECT_EQ(a.per_path[i].q1, b.per_path[i].q1);
    EXPECT_EQ(a.per_path[i].q2, b.per_path[i].q2);
    EXPECT_EQ(a.per_path[i].q3, b.per_path[i].q3);
    EXPECT_EQ(a.per_path[i].q4, b.per_path[i].q4);
  }
  EXPECT_EQ(a.q1.mean, b.q1.mean);
  EXPECT_EQ(a.q1.se, b.q1.se);
  EXPECT_EQ(a.q3.mean, b.q3.mean);
  EXPECT_EQ(a.min_u, b.min_u);
}

TEST(PathFunctionals, ConstantStateClosedForm) {
  for (double c : {0.0, 0.5, 2.0}) {
    const EnsembleConfig cfg = quiet_config(c);
    const SpectralBasis basis(cfg.grid());
    const PathResult r = simulate_path(cfg, basis, 0);
    const PathFunctionals f = path_functionals(basis, r.trajectory, cfg.params);
    EXPECT_NEAR(f.q1, c * c * c, 1e-12 * (1 + c * c * c));
    EXPECT_NEAR(f.q1_alt, c * c * c, 1e-12 * (1 + c * c * c));
    EXPECT_NEAR(f.q2, c * c + cfg.t_end * c * c * c, 1e-12 * (1 + c * c * c));
    EXPECT_EQ(f.q3, 0.0);
    EXPECT_EQ(f.q4, 0.0);
    EXPECT_NEAR(f.mass_final, c, 1e-13);
    EXPECT_EQ(f.clip_count, 0u);
  }
}

TEST(PathFunctionals, LinearVDecay) {
  // With u = 0 the v-equation is a linear heat flow with damping; a
  // constant v0 decays like exp(-alpha t).
  EnsembleConfig cfg = quiet_config(0.0);
  cfg.params.alpha = 2.0;
  cfg.v0 = InitialCondition::constant(1.0);
  cfg.dt_policy = DtPolicy::fixed;
  cfg.dt = 1e-4;
  const SpectralBasis basis(cfg.grid());
  const PathResult r = simulate_path(cfg, basis, 0);
  const PathFunctionals f = path_functionals(basis, r.trajectory, cfg.params);
  EXPECT_NEAR(f.q4, 1.0, 1e-14);
  EXPECT_NEAR(integral(r.trajectory.v_path.back()), std::exp(-2.0 * cfg.t_end), 1e-4);
  EXPECT_EQ(f.q1, 0.0);
}

TEST(PathFunctionals, RejectsIncompleteTrajectory) {
  const SpectralBasis basis(Grid(8, 8));
  EXPECT_THROW(path_functionals(basis, PathTrajectory{}, ModelParams{}), InvalidArgument);
}

TEST(Estimate, MeanAndStandardError) {
  const Estimate e = estimate({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  EXPECT_DOUBLE_EQ(e.se, std::sqrt(5.0 / 3.0 / 4.0));
  const Estimate one = estimate({7.0});
  EXPECT_EQ(one.mean, 7.0);
  EXPECT_EQ(one.se, 0.0);
  EXPECT_TRUE(std::isnan(estimate({}).mean));
}

TEST(PairwiseSum, MatchesExactSums) {
  std::vector<double> x(1000);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = static_cast<double>(k + 1);
  EXPECT_EQ(pairwise_sum(x), 500500.0);
  std::vector<double> tiny(1 << 12, 0.1);
  EXPECT_NEAR(pairwise_sum(tiny), 409.6, 1e-12);
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}

TEST(Ensemble, SinglePathWithoutNoiseMatchesSinglePath) {
  EnsembleConfig cfg = quiet_config(1.0);
  cfg.params.chi = 1.0;
  cfg.params.beta = 1.0;
  cfg.u0 = InitialCondition::cosine(1, 1, 0.5, 1.0);
  cfg.v0 = InitialCondition::cosine(1, 0, 0.5, 1.0);
  const SpectralBasis basis(cfg.grid());
  const PathFunctionals f = path_functionals(basis, simulate_path(cfg, basis, 0).trajectory, cfg.params);
  const MomentEstimates m = run_ensemble(cfg, 1);
  EXPECT_EQ(m.q1.mean, f.q1);
  EXPECT_EQ(m.q2.mean, f.q2);
  EXPECT_EQ(m.q3.mean, f.q3);
  EXPECT_EQ(m.q4.mean, f.q4);
  EXPECT_EQ(m.q1.se, 0.0);
  EXPECT_EQ(m.failures, 0u);
  EXPECT_FALSE(m.failed());
}

TEST(Ensemble, PathsWithoutNoiseAgree) {
  EnsembleConfig cfg = quiet_config(1.0);
  cfg.u0 = InitialCondition::cosine(1, 1, 0.5, 1.0);
  cfg.num_paths = 3;
  const MomentEstimates m = run_ensemble(cfg, 1);
  EXPECT_LT(m.q1.se, 1e-14 * m.q1.mean);
  EXPECT_EQ(m.per_path[0].q1, m.per_path[2].q1);
}

TEST(Ensemble, DeterministicAcrossRunsAndThreads) {
  const EnsembleConfig cfg = small_stochastic(6);
  const MomentEstimates a = run_ensemble(cfg, 1);
  const MomentEstimates b = run_ensemble(cfg, 1);
  const MomentEstimates c = run_ensemble(cfg, 3);
  expect_same(a, b);
  expect_same(a, c);
  EXPECT_GT(a.q1.se, 0.0);
  EXPECT_NE(a.per_path[0].q1, a.per_path[1].q1);
}

TEST(Ensemble, SeedChangesPaths) {
  EnsembleConfig cfg = small_stochastic(2);
  const MomentEstimates a = run_ensemble(cfg, 1);
  cfg.base_seed = 100;
  const MomentEstimates b = run_ensemble(cfg, 1);
  EXPECT_NE(a.per_path[0].q1, b.per_path[0].q1);
}

TEST(Ensemble, PathIndexIsStable) {
  // Path i depends only on (seed, i), not on the ensemble size.
  const MomentEstimates a = run_ensemble(small_stochastic(2), 1);
  const MomentEstimates b = run_ensemble(small_stochastic(4), 1);
  EXPECT_EQ(a.per_path[1].q3, b.per_path[1].q3);
}

TEST(Ensemble, PicardMatchesDirect) {
  EnsembleConfig cfg = small_stochastic(2);
  const MomentEstimates direct = run_ensemble(cfg, 1);
  cfg.method = Method::picard;
  const MomentEstimates picard = run_ensemble(cfg, 1);
  EXPECT_EQ(picard.picard_nonconverged, 0u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(picard.per_path[i].q1, direct.per_path[i].q1, 1e-5 * direct.per_path[i].q1);
    EXPECT_NEAR(picard.per_path[i].q3, direct.per_path[i].q3, 1e-5 * direct.per_path[i].q3);
  }
}

TEST(Ensemble, FailedPathsAreCounted) {
  EnsembleConfig cfg = small_stochastic(3);
  cfg.dt_policy = DtPolicy::fixed;
  cfg.dt = 0.05;
  cfg.t_end = 5.0;
  cfg.params.r_u = 1.0;
  const MomentEstimates m = run_ensemble(cfg, 1);
  EXPECT_EQ(m.failures, 3u);
  EXPECT_TRUE(m.failed());
  ASSERT_EQ(m.failure_messages.size(), 3u);
  EXPECT_NE(m.failure_messages[0].find("path 0"), std::string::npos);
  EXPECT_TRUE(std::isnan(m.q1.mean));
}

TEST(Ensemble, FailureThreshold) {
  MomentEstimates m;
  m.paths_requested = 100;
  m.failures = 5;
  EXPECT_FALSE(m.failed());
  m.failures = 6;
  EXPECT_TRUE(m.failed());
}

TEST(Ensemble, RejectsInvalidConfig) {
  EnsembleConfig cfg = small_stochastic(1);
  cfg.params.gamma = 1.0;
  EXPECT_THROW(run_ensemble(cfg, 1), InvalidArgument);
  cfg = small_stochastic(1);
  cfg.u0 = InitialCondition::constant(-1.0);
  const auto v = cfg.violations();
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("nonnegative"), std::string::npos);
  cfg = small_stochastic(1);
  cfg.method = Method::picard;
  cfg.integrator = Integrator::heun;
  EXPECT_EQ(cfg.violations().size(), 1u);
}

TEST(Ensemble, StratonovichRaisesMeanMass) {
  // The Stratonovich correction adds (1/2) sum q_k^2 sigma^2 u, so the mean
  // mass grows faster than under Ito where it is a martingale.
  EnsembleConfig cfg = small_stochastic(8);
  cfg.params.chi = 0.0;
  const MomentEstimates ito = run_ensemble(cfg, 1);
  cfg.integrator = Integrator::stratonovich;
  const MomentEstimates strat = run_ensemble(cfg, 1);
  double mi = 0.0, ms = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    mi += ito.per_path[i].mass_final;
    ms += strat.per_path[i].mass_final;
  }
  EXPECT_GT(ms, mi);
}

TEST(WorkerCount, RespectsRequestEnvironmentAndJobs) {
  EXPECT_EQ(worker_count(10, 3), 3u);
  EXPECT_EQ(worker_count(2, 8), 2u);
  EXPECT_EQ(worker_count(0, 4), 1u);
  ::setenv("KSPM_THREADS", "5", 1);
  EXPECT_EQ(worker_count(100), 5u);
  ::setenv("KSPM_THREADS", "junk", 1);
  EXPECT_GE(worker_count(100), 1u);
  ::unsetenv("KSPM_THREADS");
}

TEST(Refinement, NeedsTwoLevels) {
  EXPECT_THROW(refinement_study(small_stochastic(1), 1, 1), InvalidArgument);
}

TEST(Refinement, DeterministicPorousMediumConverges) {
  EnsembleConfig cfg = quiet_config(0.0);
  cfg.u0 = InitialCondition::cosine(1, 1, 0.5, 1.0);
  cfg.v0 = InitialCondition::cosine(1, 0, 0.5, 1.0);
  cfg.params.chi = 1.0;
  cfg.params.beta = 1.0;
  cfg.params.alpha = 0.5;
  cfg.resolution = 32;
  cfg.t_end = 0.02;
  const auto levels = refinement_study(cfg, 2, 1);
  ASSERT_EQ(levels.size(), 2u);
  EXPECT_EQ(levels[1].resolution, 64);
  EXPECT_DOUBLE_EQ(levels[1].dt_max, 0.5 * cfg.dt_max);
  EXPECT_EQ(levels[0].max_change(), 0.0);
  EXPECT_LT(levels[1].change_q2, 0.02);
  EXPECT_LT(levels[1].max_change(), 0.05);
}

}  // namespace
