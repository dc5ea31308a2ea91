#include <gtest/gtest.h>

#include <cmath>

#include "urnlab/errors.hpp"
#include "urnlab/gaussian_approx.hpp"
#include "urnlab/ode_flow.hpp"

using namespace urnlab;

namespace {

Matrix friedman() {
  Matrix h(2, 2);
  h << 0.0, 1.0, 1.0, 0.0;
  return h;
}

}  // namespace

TEST(GaussianVariance, ScalarClosedForm) {
  // (1/t) * g * (1 - t^{-(2h-1)}) / (2h-1).
  const double h = 0.9, g = 1.3, t = std::exp(3.0);
  const Matrix v = gaussian_variance(Matrix::Constant(1, 1, h), Matrix::Constant(1, 1, g), t);
  EXPECT_NEAR(v(0, 0), g * (1.0 - std::pow(t, -(2 * h - 1))) / ((2 * h - 1) * t), 1e-12);
  EXPECT_EQ(gaussian_variance(Matrix::Constant(1, 1, h), Matrix::Constant(1, 1, g), 1.0)(0, 0), 0.0);
  EXPECT_THROW(gaussian_variance(Matrix::Constant(1, 1, h), Matrix::Constant(1, 1, g), 0.5), InvalidArgument);
}

TEST(GaussStepLaw, PropagatedCovarianceMatchesVariance) {
  Matrix h(2, 2), g(2, 2);
  h << 1.0, 0.3, -0.2, 0.8;
  g << 1.0, 0.3, 0.3, 0.5;
  GaussProcessSpec s;
  s.H = h;
  s.gamma_root = psd_root(g);
  s.G1 = Row::Zero(2);
  s.grid = log_uniform_grid(std::exp(5.0), 17);
  const GaussStepLaw law = gauss_step_law(s);
  Matrix v = Matrix::Zero(2, 2);
  for (std::size_t k = 0; k < law.propagators.size(); ++k) {
    v = law.propagators[k].transpose() * v * law.propagators[k] + law.increment_covs[k];
    EXPECT_TRUE((law.noise_factors[k].transpose() * law.noise_factors[k]).isApprox(law.increment_covs[k], 1e-10));
  }
  const Matrix ref = gaussian_variance(h, g, std::exp(5.0));
  EXPECT_LE(rel_frobenius(v, ref), 1e-9);
}

TEST(GaussProcess, GridAndDeterminism) {
  const auto grid = log_uniform_grid(100.0, 4);
  ASSERT_EQ(grid.size(), 5u);
  EXPECT_EQ(grid.front(), 1.0);
  EXPECT_EQ(grid.back(), 100.0);
  GaussProcessSpec s;
  s.H = Matrix::Identity(2, 2);
  s.gamma_root = Matrix::Identity(2, 2);
  s.G1 = Row::Zero(2);
  s.grid = grid;
  const auto a = simulate_gaussian_process(s, 1), b = simulate_gaussian_process(s, 1);
  EXPECT_EQ(a.back().G, b.back().G);
  EXPECT_EQ(gauss_csv(a).substr(0, 10), "t,G_1,G_2\n");
  s.grid = {2.0, 3.0};
  EXPECT_THROW(simulate_gaussian_process(s, 1), InvalidArgument);
}

TEST(Flow, RhsExample) {
  Row t(2);
  t << 1.0, 0.0;
  const Row r = flow_rhs(t, friedman());
  EXPECT_DOUBLE_EQ(r(0), -1.0);
  EXPECT_DOUBLE_EQ(r(1), 1.0);
  EXPECT_THROW(flow_rhs(Row::Zero(2), friedman()), SingularityError);
}

TEST(Flow, ConvergesToV) {
  Row t(2);
  t << 0.9, 0.1;
  const auto states = integrate_flow(t, friedman(), 40.0);
  EXPECT_LE((states.back().theta - Row::Constant(2, 0.5)).norm(), 1e-6);
  EXPECT_EQ(states.size(), 41u);
  EXPECT_EQ(flow_csv(states).substr(0, 19), "s,f,theta_1,theta_2");
}

TEST(Flow, MassIdentity) {
  Row t(2);
  t << 3.0, -0.5;
  const auto states = integrate_flow(t, friedman(), 10.0);
  const double c0 = t.sum();
  for (const auto& s : states) EXPECT_NEAR(s.theta.sum(), c0 * std::exp(-(s.s - s.f)), 1e-8);
}

TEST(Flow, RejectsStartOutsideRegion) {
  Row t(2);
  t << -1.0, 0.5;
  EXPECT_THROW(integrate_flow(t, friedman(), 1.0), InvalidArgument);
  EXPECT_THROW(check_attraction({t}, friedman(), 1.0, 1e-6), InvalidArgument);
}

TEST(Flow, AttractionBatch) {
  Row a(2), b(2);
  a << 0.2, 0.8;
  b << 2.0, 0.1;
  const auto ok = check_attraction({a, b}, friedman(), 40.0, 1e-6);
  EXPECT_TRUE(ok[0]);
  EXPECT_TRUE(ok[1]);
}
