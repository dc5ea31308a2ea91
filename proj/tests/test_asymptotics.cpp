#include <gtest/gtest.h>

#include <cmath>

#include "urnlab/asymptotics.hpp"
#include "urnlab/errors.hpp"
#include "urnlab/quadrature.hpp"

using namespace urnlab;

namespace {

Matrix jordan(double lambda) {
  Matrix a(2, 2);
  a << lambda, -1.0, 0.0, lambda;
  return a;
}

Matrix e11() {
  Matrix g = Matrix::Zero(2, 2);
  g(0, 0) = 1.0;
  return g;
}

}  // namespace

TEST(SpectralProfile, JordanBlock) {
  const SpectralProfile p = spectral_profile(jordan(0.5));
  ASSERT_EQ(p.groups.size(), 1u);
  EXPECT_EQ(p.groups[0].multiplicity, 2);
  EXPECT_EQ(p.groups[0].block_sizes, std::vector<int>{2});
  EXPECT_NEAR(p.rho, 0.5, 1e-12);
  EXPECT_EQ(p.nu, 2);
}

TEST(SpectralProfile, DiagonalRepeated) {
  const SpectralProfile p = spectral_profile(0.5 * Matrix::Identity(3, 3));
  ASSERT_EQ(p.groups.size(), 1u);
  EXPECT_EQ(p.groups[0].block_sizes, (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(p.nu, 1);
}

TEST(SpectralProfile, MixedStructure) {
  Matrix a = Matrix::Zero(4, 4);
  a(0, 0) = a(1, 1) = a(2, 2) = 0.3;
  a(0, 1) = 1.0;
  a(3, 3) = 2.0;
  const SpectralProfile p = spectral_profile(a);
  ASSERT_EQ(p.groups.size(), 2u);
  EXPECT_NEAR(p.groups[0].lambda.real(), 2.0, 1e-10);
  EXPECT_EQ(p.groups[1].block_sizes, (std::vector<int>{2, 1}));
  EXPECT_NEAR(p.rho, 0.3, 1e-10);
  EXPECT_EQ(p.nu, 2);
  ASSERT_TRUE(p.lambda_sec.has_value());
  EXPECT_NEAR(*p.lambda_sec, 0.3, 1e-10);
}

TEST(Regime, Classification) {
  EXPECT_EQ(regime_for(0.8, 1).tag, RegimeTag::Standard);
  EXPECT_EQ(regime_for(0.8, 1).scaling, "sqrt(n)");
  EXPECT_EQ(regime_for(0.5, 1).scaling, "sqrt(n/log n)");
  EXPECT_EQ(regime_for(0.5, 2).scaling, "sqrt(n/(log n)^3)");
  EXPECT_EQ(regime_for(0.3, 1).scaling, "n^0.3");
  EXPECT_EQ(regime_for(0.3, 2).scaling, "n^0.3/log n");
  EXPECT_EQ(regime_for(0.5 + 1e-12, 1).tag, RegimeTag::Critical);
  EXPECT_THROW(regime_for(-0.1, 1), RegimeError);
  EXPECT_THROW(regime_for(0.0, 1), RegimeError);
}

TEST(Regime, ScaleFactor) {
  const double n = 1e4, l = std::log(n);
  EXPECT_DOUBLE_EQ(scale_factor(regime_for(0.9, 1), n), 100.0);
  EXPECT_NEAR(scale_factor(regime_for(0.5, 2), n), std::sqrt(n / (l * l * l)), 1e-12);
  EXPECT_NEAR(scale_factor(regime_for(0.3, 2), n), std::pow(n, 0.3) / l, 1e-12);
}

TEST(CltCovariance, ScalarClosedForm) {
  // 1-d: Sigma = Gamma / (2a - 1).
  const Matrix s = clt_covariance(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0));
  EXPECT_NEAR(s(0, 0), 1.0, 1e-14);
  const Matrix s2 = clt_covariance(Matrix::Constant(1, 1, 0.75), Matrix::Constant(1, 1, 2.0));
  EXPECT_NEAR(s2(0, 0), 4.0, 1e-13);
  EXPECT_THROW(clt_covariance(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0)), RegimeError);
}

TEST(CltCovariance, SymmetricPsd) {
  Matrix dh(2, 2), g(2, 2);
  dh << 1.0, 0.3, -0.2, 0.8;
  g << 1.0, 0.3, 0.3, 0.5;
  const Matrix s = clt_covariance(dh, g);
  EXPECT_LE((s - s.transpose()).norm(), 1e-14);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(s).eigenvalues().minCoeff(), 0.0);
  const Matrix b = dh - 0.5 * Matrix::Identity(2, 2);
  EXPECT_LE((b.transpose() * s + s * b - g).norm(), 1e-12);
}

TEST(CriticalCovariance, JordanExample) {
  Matrix t(2, 2);
  t << 1.0, 0.0, 0.0, -1.0;
  const Matrix s = critical_covariance(jordan(0.5), e11(), t);
  EXPECT_NEAR(s(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(s(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(s(1, 1), 1.0 / 3.0, 1e-12);
}

TEST(CriticalCovariance, ChainBasisRequiredAndValidated) {
  EXPECT_THROW(critical_covariance(jordan(0.5), e11()), NeedsChainBasis);
  EXPECT_THROW(critical_covariance(jordan(0.5), e11(), Matrix(Matrix::Identity(2, 2))), InvalidBasis);
}

TEST(CriticalCovariance, DiagonalHalf) {
  // Dh = I/2, nu = 1: the projector is I, so Sigma~ = Gamma.
  Matrix g(2, 2);
  g << 1.0, 0.2, 0.2, 0.5;
  const Matrix s = critical_covariance(0.5 * Matrix::Identity(2, 2), g);
  EXPECT_TRUE(s.isApprox(g, 1e-12));
}

TEST(CriticalCovariance, MixedLayerOnlyKeepsCriticalPart) {
  Matrix dh = Matrix::Zero(2, 2);
  dh(0, 0) = 0.5;
  dh(1, 1) = 1.0;
  const Matrix s = critical_covariance(dh, Matrix::Identity(2, 2));
  EXPECT_NEAR(s(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(s(1, 1), 0.0, 1e-12);
  EXPECT_THROW(critical_covariance(Matrix(Matrix::Identity(2, 2)), Matrix(Matrix::Identity(2, 2))), RegimeError);
}

TEST(LimitCovariance, ExtrapolatesToCriticalFormula) {
  const Matrix ex = extrapolate_limit_covariance(jordan(0.5), e11(), {50.0, 100.0, 200.0});
  Matrix target = Matrix::Zero(2, 2);
  target(1, 1) = 1.0 / 3.0;
  EXPECT_LE(rel_frobenius(ex, target), 0.01);
}

TEST(LimitCovariance, ScalarNormalization) {
  // Dh = 1/2 in 1-d: integral of Gamma over [0, L], divided by L.
  const Matrix r = limit_covariance_quadrature(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 2.0), 10.0);
  EXPECT_NEAR(r(0, 0), 2.0, 1e-10);
}

TEST(SlowDescriptor, RotationFrequency) {
  Matrix a(2, 2);
  a << 1.0, -1.0, 1.0, 1.0;
  const AsymptoticReport r = analyze(0.3 * a, Matrix::Identity(2, 2));
  EXPECT_EQ(r.regime.tag, RegimeTag::Slow);
  ASSERT_TRUE(r.slow.has_value());
  ASSERT_FALSE(r.slow->components.empty());
  for (const auto& c : r.slow->components) EXPECT_NEAR(std::abs(c.frequency), 0.3, 1e-10);
  EXPECT_FALSE(r.covariance.has_value());
}

TEST(Analyze, JordanSlowHasNuTwo) {
  const AsymptoticReport r = analyze(jordan(0.3), e11());
  EXPECT_EQ(r.regime.tag, RegimeTag::Slow);
  EXPECT_EQ(r.regime.nu, 2);
  EXPECT_EQ(r.regime.scaling, "n^0.3/log n");
}

TEST(Analyze, CriticalWithChainBasis) {
  AnalysisOptions o;
  Matrix t(2, 2);
  t << 1.0, 0.0, 0.0, -1.0;
  o.chain_basis = t;
  const AsymptoticReport r = analyze(jordan(0.5), e11(), o);
  EXPECT_EQ(r.regime.tag, RegimeTag::Critical);
  ASSERT_TRUE(r.covariance.has_value());
  EXPECT_NEAR((*r.covariance)(1, 1), 1.0 / 3.0, 1e-12);
}

TEST(AsRate, Exponent) {
  EXPECT_NEAR(as_rate(spectral_profile(jordan(0.3))), 0.3, 1e-12);
  EXPECT_NEAR(as_rate(spectral_profile(Matrix::Identity(2, 2))), 0.5, 1e-12);
}
