#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kspm/field_families.hpp"
#include "kspm/norms.hpp"

namespace {

using namespace kspm;
constexpr double kPi = std::numbers::pi;

Field random_field(const Grid& g, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Field f(g);
  for (auto& v : f.values()) v = dist(gen);
  return f;
}

Field cosine_x(const Grid& g) {
  return Field::sample(g, [](double x, double) { return std::cos(kPi * x); });
}

TEST(LpNorm, ConstantsAndMass) {
  const Grid g(16, 8);
  for (double p : {1.0, 1.5, 2.0, 3.0, 7.0}) EXPECT_NEAR(lp_norm(Field(g, -2.5), p), 2.5, 1e-13);
  const Field f = random_field(g, 3);
  Field pos(g);
  for (std::size_t k = 0; k < f.size(); ++k) pos[k] = std::abs(f[k]);
  EXPECT_NEAR(lp_norm(pos, 1.0), integral(pos), 1e-15);
  EXPECT_THROW(lp_norm(f, 0.5), InvalidArgument);
}

TEST(LpNorm, CosineSecondOrder) {
  auto err = [](int n) { return std::abs(lp_norm(cosine_x(Grid(n, n)), 2.0) - std::sqrt(0.5)); };
  // Midpoint rule integrates cos^2 exactly on a uniform cell-centred grid.
  EXPECT_LT(err(32), 1e-12);
  EXPECT_LT(err(64), 1e-12);
}

TEST(Sobolev2, ParsevalAndConstants) {
  const SpectralBasis basis(Grid(24, 20));
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    const Field f = random_field(basis.grid(), seed);
    EXPECT_NEAR(sobolev2_norm(basis, f, 0.0), lp_norm(f, 2.0), 1e-10 * lp_norm(f, 2.0));
  }
  for (double s : {-2.0, -1.0, 0.5, 3.0}) {
    EXPECT_NEAR(sobolev2_norm(basis, Field(basis.grid(), -1.3), s), 1.3, 1e-12);
  }
}

TEST(Sobolev2, SingleModeClosedForm) {
  const SpectralBasis basis(Grid(32, 32));
  const Field phi = basis.unit_mode(1, 0);
  EXPECT_NEAR(sobolev2_norm(basis, phi, -1.0), 1.0 / std::sqrt(1.0 + kPi * kPi), 1e-12);
  const Field psi = basis.unit_mode(2, 3);
  EXPECT_NEAR(sobolev2_norm(basis, psi, 1.5), std::pow(1.0 + 13.0 * kPi * kPi, 0.75), 1e-9);
}

TEST(Sobolev2, MonotoneInSmoothness) {
  const SpectralBasis basis(Grid(16, 16));
  for (std::uint32_t seed = 0; seed < 50; ++seed) {
    const Field f = random_field(basis.grid(), seed);
    double prev = 0.0;
    for (double s : {-2.0, -1.0, -0.5, 0.0, 0.3, 1.0, 2.0}) {
      const double n = sobolev2_norm(basis, f, s);
      EXPECT_GE(n, prev);
      prev = n;
    }
  }
}

TEST(BesselLp, ReducesToKnownNorms) {
  const SpectralBasis basis(Grid(20, 16));
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    const Field f = random_field(basis.grid(), seed);
    for (double p : {1.0, 2.5, 4.0}) EXPECT_EQ(bessel_lp_norm(basis, f, 0.0, p), lp_norm(f, p));
    for (double s : {-1.0, 0.4, 1.0}) {
      const double a = bessel_lp_norm(basis, f, s, 2.0);
      const double b = sobolev2_norm(basis, f, s);
      EXPECT_NEAR(a, b, 1e-10 * b);
    }
  }
  for (double s : {-1.0, 0.7})
    for (double p : {1.0, 3.0}) EXPECT_NEAR(bessel_lp_norm(basis, Field(basis.grid(), 0.4), s, p), 0.4, 1e-12);
  EXPECT_THROW(bessel_lp_norm(basis, Field(basis.grid()), 0.5, 0.9), InvalidArgument);
}

TEST(BesselLp, SingleModeAtGeneralP) {
  const SpectralBasis basis(Grid(64, 64));
  const Field phi = basis.unit_mode(1, 0);
  // multiplier scales the mode, so the norm scales the L^p norm of phi
  const double scale = std::pow(1.0 + kPi * kPi, 0.3);
  EXPECT_NEAR(bessel_lp_norm(basis, phi, 0.6, 3.0), scale * lp_norm(phi, 3.0), 1e-10);
}

TEST(GradLp, ConstantLinearCosine) {
  const Grid g(32, 32);
  EXPECT_EQ(grad_lp_norm(Field(g, 5.0), 2.0), 0.0);
  const auto [gx, gy] = gradient(Field::sample(g, [](double x, double) { return x; }));
  for (int i = 1; i < 31; ++i) EXPECT_NEAR(gx(i, 7), 1.0, 1e-12);

  auto err = [](int n) { return std::abs(grad_lp_norm(cosine_x(Grid(n, n)), 2.0) - kPi / std::sqrt(2.0)); };
  const double e32 = err(32), e64 = err(64);
  EXPECT_LT(e64, 2e-3);
  EXPECT_GT(e32 / e64, 3.5);
  EXPECT_THROW(grad_lp_norm(Field(g), 0.0), InvalidArgument);
}

TEST(H1p, CombinesBothParts) {
  const Grid g(32, 32);
  const Field f = cosine_x(g);
  const double a = lp_norm(f, 4.0), b = grad_lp_norm(f, 4.0);
  EXPECT_NEAR(h1p_norm(f, 4.0), std::pow(std::pow(a, 4) + std::pow(b, 4), 0.25), 1e-13);
  EXPECT_NEAR(h1p_norm(Field(g, 2.0), 2.0), 2.0, 1e-13);
}

TEST(RunstRatio, ConstantFieldIsOne) {
  const SpectralBasis basis(Grid(16, 16));
  EXPECT_NEAR(runst_ratio(basis, Field(basis.grid(), 1.7), 2.0, 0.4), 1.0, 1e-12);
  EXPECT_NEAR(runst_ratio(basis, Field(basis.grid(), 0.3), 4.0, 0.2), 1.0, 1e-12);
}

TEST(RunstRatio, RejectsInvalidArguments) {
  const SpectralBasis basis(Grid(8, 8));
  const Field one(basis.grid(), 1.0);
  EXPECT_THROW(runst_ratio(basis, one, 1.0, 0.4), InvalidArgument);
  EXPECT_THROW(runst_ratio(basis, one, 2.0, 0.5), InvalidArgument);
  EXPECT_THROW(runst_ratio(basis, one, 2.0, 0.0), InvalidArgument);
  EXPECT_THROW(runst_ratio(basis, Field(basis.grid()), 2.0, 0.4), InvalidArgument);
}

TEST(RunstRatio, ScaleInvariance) {
  const SpectralBasis basis(Grid(32, 32));
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Field w = band_limited_field(basis, seed, 6);
    const double a = scale(gen);
    const double r1 = runst_ratio(basis, w, 2.0, 0.4);
    const double r2 = runst_ratio(basis, a * w, 2.0, 0.4);
    EXPECT_NEAR(r2, r1, 1e-12 * r1);
  }
}

TEST(RunstRatio, EmpiricalBoundStableUnderRefinement) {
  double worst[2] = {0.0, 0.0};
  int level = 0;
  for (int n : {32, 64}) {
    const SpectralBasis basis(Grid(n, n));
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const double r = runst_ratio(basis, band_limited_field(basis, seed, 6), 2.0, 0.4);
      EXPECT_TRUE(std::isfinite(r));
      worst[level] = std::max(worst[level], r);
    }
    ++level;
  }
  EXPECT_LT(std::abs(worst[1] / worst[0] - 1.0), 0.1);
}

TEST(BandLimitedField, NonnegativeAndResolutionIndependent) {
  const SpectralBasis coarse(Grid(16, 16));
  const SpectralBasis fine(Grid(32, 32));
  const Field a = band_limited_field(coarse, 5, 4, 1.0, 0.0);
  EXPECT_NEAR(a.min(), 0.0, 1e-15);
  const Field b = band_limited_field(coarse, 5, 4, 1.0, 0.25);
  EXPECT_NEAR(b.min(), 0.25, 1e-15);
  EXPECT_EQ(a, band_limited_field(coarse, 5, 4, 1.0, 0.0));
  // Only the constant shift depends on the grid.
  const Field c = band_limited_field(fine, 5, 4, 1.0, 0.0);
  const Spectrum sa = coarse.to_spectral(a);
  const Spectrum sc = fine.to_spectral(c);
  for (int m2 = 0; m2 <= 4; ++m2) {
    for (int m1 = 0; m1 <= 4; ++m1) {
      if (m1 + m2 > 0) {
        EXPECT_NEAR(sa(m1, m2), sc(m1, m2), 1e-12);
      }
    }
  }
  EXPECT_THROW(band_limited_field(coarse, 1, 16), InvalidArgument);
}

TEST(NormRequest, ParseEvaluateAndLabel) {
  const SpectralBasis basis(Grid(16, 16));
  const Field f = band_limited_field(basis, 2, 4, 1.0, 0.5);
  EXPECT_EQ(NormRequest::parse("lp:3").evaluate(basis, f), lp_norm(f, 3.0));
  EXPECT_EQ(NormRequest::parse("hs:-1").evaluate(basis, f), sobolev2_norm(basis, f, -1.0));
  EXPECT_EQ(NormRequest::parse("bessel:0.5:4").evaluate(basis, f), bessel_lp_norm(basis, f, 0.5, 4.0));
  EXPECT_EQ(NormRequest::parse("grad:2").evaluate(basis, f), grad_lp_norm(f, 2.0));
  EXPECT_EQ(NormRequest::parse("h1:4").evaluate(basis, f), h1p_norm(f, 4.0));
  for (const char* text : {"lp:2", "hs:-1", "bessel:0.5:4", "grad:1.5", "h1:4"}) {
    EXPECT_EQ(NormRequest::parse(text).label(), text);
  }
  for (const char* text : {"", "lp", "lp:0.5", "lp:x", "hs:1:2", "sobolev:1", "bessel:1", "grad:2e"}) {
    EXPECT_THROW(NormRequest::parse(text), InvalidArgument) << text;
  }
}

}  // namespace
