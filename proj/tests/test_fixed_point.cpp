#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kspm/fixed_point.hpp"
#include "kspm/initial.hpp"

namespace {

using namespace kspm;

struct Problem {
  SpectralBasis basis;
  ModelParams p;
  Field u0;
  Field v0;
  WienerSampler W1;
  WienerSampler W2;
  TimeGrid times;
};

// The reference stochastic configuration on a coarser grid.
Problem make_setup(int n, double t_end = 0.05) {
  const Grid g(n, n);
  SpectralBasis basis(g);
  ModelParams p;
  p.r_u = 0.1;
  p.r_v = 1.0;
  p.chi = 1.0;
  p.alpha = 0.5;
  p.beta = 1.0;
  p.sigma_u = 0.5;
  p.sigma_v = 0.5;
  p.gamma = 2.0;
  const Field u0 = InitialCondition::cosine(1, 1, 0.5, 1.0).realize(g);
  const Field v0 = InitialCondition::cosine(1, 0, 0.5, 1.0).realize(g);
  const double dt = 0.5 * cfl_dt(u0, v0, p);
  return {basis, p, u0, v0,
          WienerSampler(NoiseSpec{0.5, 2.5, 4, 11}, basis),
          WienerSampler(NoiseSpec{0.5, 2.5, 4, 12}, basis),
          TimeGrid::with_max_step(t_end, dt)};
}

std::vector<Field> random_path(const Grid& g, std::size_t n, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(0.0, 2.0);
  std::vector<Field> out(n, Field(g));
  for (auto& f : out)
    for (auto& v : f.values()) v = dist(gen);
  return out;
}

TEST(ApplyT, DecoupledFlowIgnoresEta) {
  Problem s = make_setup(16);
  s.p.chi = 0.0;
  s.p.sigma_u = s.p.sigma_v = 0.0;
  const std::size_t n = s.times.steps();
  const auto a = apply_T(s.basis, random_path(s.basis.grid(), n + 1, 1), s.W1, s.W2, s.p, s.u0, s.v0, s.times);
  const auto b = apply_T(s.basis, random_path(s.basis.grid(), n + 1, 2), s.W1, s.W2, s.p, s.u0, s.v0, s.times);
  ASSERT_EQ(a.u_path.size(), n + 1);
  EXPECT_EQ(a.u_path, b.u_path);
  EXPECT_NE(a.v_path, b.v_path);
}

TEST(ApplyT, ZeroEtaGivesUnforcedFlows) {
  Problem s = make_setup(16);
  const std::size_t n = s.times.steps();
  const std::vector<Field> zero(n + 1, Field(s.basis.grid()));
  const auto t = apply_T(s.basis, zero, s.W1, s.W2, s.p, s.u0, s.v0, s.times);

  s.W1.reset();
  s.W2.reset();
  const auto v = solve_v_path(s.basis, s.v0, zero, s.W2, s.p, s.times);
  ModelParams no_transport = s.p;
  no_transport.chi = 0.0;
  const auto [u, d] = solve_u_path(s.u0, v, zero, s.W1, no_transport, s.times);
  EXPECT_EQ(t.v_path, v);
  EXPECT_EQ(t.u_path, u);
}

TEST(ApplyT, EqualsHandAssembledPipeline) {
  Problem s = make_setup(32);
  const std::size_t n = s.times.steps();
  const auto eta = random_path(s.basis.grid(), n + 1, 3);
  s.W1.seek(17);  // apply_T must reset the samplers itself
  const auto t = apply_T(s.basis, eta, s.W1, s.W2, s.p, s.u0, s.v0, s.times);

  WienerSampler W1(s.W1.spec(), s.basis), W2(s.W2.spec(), s.basis);
  const auto v = solve_v_path(s.basis, s.v0, eta, W2, s.p, s.times);
  const auto [u, d] = solve_u_path(s.u0, v, eta, W1, s.p, s.times);
  EXPECT_EQ(t.v_path, v);
  EXPECT_EQ(t.u_path, u);
  EXPECT_EQ(t.diagnostics.clip_count, d.clip_count);
  EXPECT_EQ(t.times, s.times.times());
}

TEST(ApplyT, RejectsMisalignedEta) {
  Problem s = make_setup(8);
  EXPECT_THROW(apply_T(s.basis, std::vector<Field>(3, s.u0), s.W1, s.W2, s.p, s.u0, s.v0, s.times),
               InvalidArgument);
}

TEST(XNorm, BasicCases) {
  const SpectralBasis basis(Grid(16, 16));
  const auto a = random_path(basis.grid(), 5, 4);
  EXPECT_EQ(xnorm_distance(basis, a, a), 0.0);
  auto b = a;
  b[2] += Field(basis.grid(), -0.75);
  EXPECT_NEAR(xnorm_distance(basis, a, b), 0.75, 1e-13);
  EXPECT_THROW(xnorm_distance(basis, a, std::vector<Field>(4, a[0])), InvalidArgument);
}

TEST(XNorm, TriangleInequality) {
  const SpectralBasis basis(Grid(8, 8));
  for (std::uint32_t k = 0; k < 100; ++k) {
    const auto a = random_path(basis.grid(), 4, 3 * k);
    const auto b = random_path(basis.grid(), 4, 3 * k + 1);
    const auto c = random_path(basis.grid(), 4, 3 * k + 2);
    const double ab = xnorm_distance(basis, a, b);
    const double bc = xnorm_distance(basis, b, c);
    const double ac = xnorm_distance(basis, a, c);
    EXPECT_LE(ac, ab + bc + 1e-14);
    EXPECT_NEAR(ab, xnorm_distance(basis, b, a), 1e-15);
  }
}

TEST(Picard, DecoupledConvergesInTwoIterations) {
  Problem s = make_setup(16);
  s.p.chi = 0.0;
  s.p.sigma_u = s.p.sigma_v = 0.0;
  const auto [t, r] = picard_iterate(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, s.times, 1e-6, 10);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 2u);
  ASSERT_EQ(r.distances.size(), 2u);
  EXPECT_GT(r.distances[0], 0.0);
  EXPECT_EQ(r.distances[1], 0.0);
}

TEST(Picard, StochasticConfigurationContracts) {
  Problem s = make_setup(32);
  const double tol = 1e-6;
  const auto [t, r] = picard_iterate(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, s.times, tol, 20);
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(r.monotone);
  EXPECT_LE(r.iterations, 20u);
  EXPECT_LT(r.distances.back(), tol);
  for (std::size_t k = 1; k < r.distances.size(); ++k) EXPECT_LT(r.distances[k], r.distances[k - 1]);

  // The converged path is a fixed point of T up to the tolerance.
  const auto again = apply_T(s.basis, t.u_path, s.W1, s.W2, s.p, s.u0, s.v0, s.times);
  EXPECT_LT(xnorm_distance(s.basis, again.u_path, t.u_path), tol);

  // Fresh samplers rebuilt from the recorded specs give the same result.
  WienerSampler W1(t.noise_u, s.basis), W2(t.noise_v, s.basis);
  const auto [t2, r2] = picard_iterate(s.basis, s.u0, s.v0, W1, W2, s.p, s.times, tol, 20);
  EXPECT_EQ(t2.u_path, t.u_path);
  EXPECT_EQ(r2.distances, r.distances);
}

TEST(Picard, TruncationIsReportedNotThrown) {
  Problem s = make_setup(16);
  s.p.chi = 50.0;
  const auto [t, r] = picard_iterate(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, s.times, 1e-6, 1);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 1u);
  ASSERT_EQ(r.distances.size(), 1u);
  EXPECT_GT(r.distances[0], 0.0);
}

TEST(Picard, Preconditions) {
  Problem s = make_setup(8);
  EXPECT_THROW(picard_iterate(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, s.times, 0.0, 5), InvalidArgument);
  EXPECT_THROW(picard_iterate(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, s.times, 1e-6, 0), InvalidArgument);
  const Field negative = s.u0 - Field(s.basis.grid(), 1.0);
  EXPECT_THROW(picard_iterate(s.basis, negative, s.v0, s.W1, s.W2, s.p, s.times, 1e-6, 5), InvalidArgument);
}

TEST(Direct, DecoupledMatchesApplyT) {
  Problem s = make_setup(16);
  s.p.chi = 0.0;
  const auto d = direct_coupled_solve(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, s.times);
  const auto t = apply_T(s.basis, std::vector<Field>(s.times.steps() + 1, s.u0), s.W1, s.W2, s.p, s.u0,
                         s.v0, s.times);
  EXPECT_EQ(d.u_path, t.u_path);
}

TEST(Direct, AgreesWithPicardUnderSharedNoise) {
  Problem s = make_setup(32);
  const auto d = direct_coupled_solve(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, s.times);
  const auto [t, r] = picard_iterate(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, s.times, 1e-6, 20);
  ASSERT_TRUE(r.converged);
  EXPECT_LT(xnorm_distance(s.basis, d.u_path, t.u_path), 1e-4);
}

TEST(Direct, SelfConvergenceIsFirstOrder) {
  Problem s = make_setup(16, 0.05);
  s.p.sigma_u = s.p.sigma_v = 0.0;
  const double dt = s.times.dt(0);
  auto run = [&](double step) {
    const TimeGrid times = TimeGrid::with_max_step(0.05, step);
    return direct_coupled_solve(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, times, {}, 10);
  };
  const auto a = run(dt), b = run(dt / 2), c = run(dt / 4);
  const double e1 = xnorm_distance(s.basis, a.u_path, b.u_path);
  const double e2 = xnorm_distance(s.basis, b.u_path, c.u_path);
  EXPECT_GT(e1, 0.0);
  EXPECT_NEAR(e1 / e2, 2.0, 0.3);
}

TEST(Direct, AdaptiveLandsOnSnapshots) {
  Problem s = make_setup(16);
  TimeGrid realized;
  const AdaptiveSchedule sched{0.02, 1e-3, 8};
  const auto t = direct_adaptive_solve(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, sched, {}, {}, &realized);
  ASSERT_EQ(t.times.size(), 9u);
  for (std::size_t k = 0; k <= 8; ++k) EXPECT_DOUBLE_EQ(t.times[k], sched.snapshot_time(k));
  EXPECT_EQ(realized.steps(), t.total_steps);
  EXPECT_LE(t.diagnostics.max_cfl_ratio, 1.0 + 1e-12);

  // The realized grid reproduces the adaptive run with the fixed-grid solver.
  const auto fixed = direct_coupled_solve(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, realized);
  for (std::size_t k = 0; k < t.steps.size(); ++k) EXPECT_EQ(fixed.u_path[t.steps[k]], t.u_path[k]);
}

TEST(Direct, HeunWithoutNoiseIsEuler) {
  Problem s = make_setup(16);
  s.p.sigma_u = s.p.sigma_v = 0.0;
  const auto e = direct_coupled_solve(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, s.times, {}, 0, Scheme::euler);
  const auto h = direct_coupled_solve(s.basis, s.u0, s.v0, s.W1, s.W2, s.p, s.times, {}, 0, Scheme::heun);
  EXPECT_EQ(e.u_path, h.u_path);
  EXPECT_EQ(e.v_path, h.v_path);
}

TEST(Direct, HeunAddsTheStratonovichDrift) {
  // Pure multiplicative noise on a constant state with a single constant
  // mode: the Heun step multiplies by 1 + s dW + s^2 dW^2 / 2, whose mean
  // rate is the correction s^2 / 2.
  const Grid g(8, 8);
  const SpectralBasis basis(g);
  ModelParams p;
  p.r_u = 1.0;
  p.chi = 0.0;
  p.sigma_u = 0.4;
  p.sigma_v = 0.0;
  const Field u0(g, 1.0), v0(g, 0.0);
  WienerSampler W1(NoiseSpec{0.4, 2.5, 0, 5}, basis), W2(NoiseSpec{0.0, 2.5, 0, 6}, basis);
  const TimeGrid times = TimeGrid::uniform(0.01, 1);
  double mean_heun = 0.0, mean_euler = 0.0;
  const int draws = 4000;
  for (int k = 0; k < draws; ++k) {
    W1 = WienerSampler(NoiseSpec{0.4, 2.5, 0, static_cast<std::uint64_t>(k)}, basis);
    mean_heun += direct_coupled_solve(basis, u0, v0, W1, W2, p, times, {}, 0, Scheme::heun).u_path[1][0];
    mean_euler += direct_coupled_solve(basis, u0, v0, W1, W2, p, times, {}, 0, Scheme::euler).u_path[1][0];
  }
  mean_heun /= draws;
  mean_euler /= draws;
  // Expected gap s^2 dt / 2 = 8e-4; Monte Carlo error of the paired gap is far smaller.
  EXPECT_NEAR(mean_heun - mean_euler, 0.5 * 0.16 * 0.01, 1e-4);
}

}  // namespace
