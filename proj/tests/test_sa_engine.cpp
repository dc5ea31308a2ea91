#include <gtest/gtest.h>

#include <cmath>

#include "urnlab/errors.hpp"
#include "urnlab/quadrature.hpp"
#include "urnlab/rng.hpp"
#include "urnlab/sa_engine.hpp"

using namespace urnlab;

namespace {

SAProcessSpec jordan_spec(double lambda) {
  Matrix a(2, 2);
  a << lambda, -1.0, 0.0, lambda;
  Matrix g = Matrix::Zero(2, 2);
  g(0, 0) = 1.0;
  SAProcessSpec s;
  s.dim = 2;
  s.drift = linear_drift(a, Row::Zero(2));
  s.noise = gaussian_noise(g);
  s.theta0 = Row::Zero(2);
  s.theta_star = Row::Zero(2);
  s.description = "jordan";
  return s;
}

// Composite Simpson on x = e^{-y}, y from L to infinity truncated, for the integral of 1/loglog(1/x).
double loglog_integral_oracle(double theta) {
  const double L = -std::log(theta);
  const int m = 200000;
  const double hi = L + 60.0;
  const double h = (hi - L) / m;
  double s = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double y = L + i * h;
    const double f = std::exp(-y) / std::log(y);
    s += (i == 0 || i == m ? 1.0 : (i % 2 ? 4.0 : 2.0)) * f;
  }
  return s * h / 3.0;
}

}  // namespace

TEST(Rng, DeterministicAndStreamed) {
  StreamRng a(1, 0), b(1, 0), c(1, 1), d(2, 0);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs_c |= x != c.next_u64();
    differs_d |= x != d.next_u64();
  }
  EXPECT_TRUE(differs_c);
  EXPECT_TRUE(differs_d);
}

TEST(Rng, MomentsOfUniformAndGaussian) {
  StreamRng r(3, 0);
  const int n = 200000;
  double su = 0, sg = 0, sg2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double g = r.gaussian();
    sg += g;
    sg2 += g * g;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sg / n, 0.0, 0.01);
  EXPECT_NEAR(sg2 / n, 1.0, 0.015);
}

TEST(Dyadic, Checkpoints) {
  EXPECT_EQ(dyadic_checkpoints(1, 16), (std::vector<std::uint64_t>{1, 2, 4, 8, 16}));
  EXPECT_EQ(dyadic_checkpoints(3, 20), (std::vector<std::uint64_t>{3, 6, 12}));
}

TEST(RunSa, SameSeedSamePath) {
  const SAProcessSpec s = jordan_spec(0.5);
  const auto plan = dyadic_checkpoints(1, 1024);
  const Trajectory a = run_sa(s, 1024, 9, plan), b = run_sa(s, 1024, 9, plan), c = run_sa(s, 1024, 10, plan);
  ASSERT_EQ(a.checkpoints.size(), plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) EXPECT_EQ(a.checkpoints[i].value, b.checkpoints[i].value);
  EXPECT_NE(a.checkpoints.back().value, c.checkpoints.back().value);
  EXPECT_EQ(a.spec_digest, b.spec_digest);
}

TEST(RunSa, ReplayIsBitExact) {
  SAProcessSpec s = jordan_spec(0.3);
  s.remainder = remainder_schedule("inv_sqrt_loglog", Row::Ones(2));
  const auto plan = dyadic_checkpoints(1, 4096);
  const Trajectory t = run_sa(s, 4096, 4, plan, true);
  ASSERT_TRUE(t.increments.has_value());
  const auto re = replay(s, t);
  ASSERT_EQ(re.size(), t.checkpoints.size());
  for (std::size_t i = 0; i < re.size(); ++i) EXPECT_EQ(re[i].value, t.checkpoints[i].value);
}

TEST(RunSa, NoiselessScalarMatchesProduct) {
  // theta_n = theta_0 * prod_{j<=n} (1 - a/j).
  SAProcessSpec s;
  s.dim = 1;
  s.drift = linear_drift(Matrix::Constant(1, 1, 0.3), Row::Zero(1));
  s.theta0 = Row::Constant(1, 2.0);
  const Trajectory t = run_sa(s, 1000, 0, {1000});
  double p = 2.0;
  for (int j = 1; j <= 1000; ++j) p *= 1.0 - 0.3 / j;
  EXPECT_NEAR(t.checkpoints[0].value(0), p, 1e-13);
}

TEST(RunSa, ValidationErrors) {
  SAProcessSpec s = jordan_spec(0.5);
  s.theta_star = Row::Ones(2);
  EXPECT_THROW(run_sa(s, 10, 0, {10}), InvalidArgument);
  s = jordan_spec(0.5);
  EXPECT_THROW(run_sa(s, 10, 0, {20}), InvalidArgument);
  EXPECT_THROW(run_sa(s, 10, 0, {5, 3}), InvalidArgument);
}

TEST(NormalizedError, ScalesAndGuardsLogs) {
  std::vector<Checkpoint> cps{{100, Row::Constant(1, 0.5)}};
  const auto std_ = normalized_error(cps, Row::Zero(1), regime_for(0.9, 1), 1);
  EXPECT_NEAR(std_[0].value(0), 5.0, 1e-12);
  const auto crit = normalized_error(cps, Row::Zero(1), regime_for(0.5, 1), 1);
  EXPECT_NEAR(crit[0].value(0), 0.5 * std::sqrt(100.0 / std::log(100.0)), 1e-12);
  std::vector<Checkpoint> early{{2, Row::Constant(1, 0.5)}};
  EXPECT_THROW(normalized_error(early, Row::Zero(1), regime_for(0.5, 1), 1), InvalidArgument);
}

TEST(ExactMean, MatchesNoiselessRun) {
  SAProcessSpec s;
  s.dim = 1;
  s.drift = linear_drift(Matrix::Constant(1, 1, 0.5), Row::Zero(1));
  s.remainder = remainder_schedule("inv_sqrt_sqrtlog", Row::Ones(1));
  s.theta0 = Row::Zero(1);
  const std::vector<std::uint64_t> plan{10, 100, 1000};
  const Trajectory t = run_sa(s, 1000, 0, plan);
  const auto m = exact_mean_recursion(Matrix::Constant(1, 1, 0.5), s.remainder, Row::Zero(1), 1000, plan);
  for (std::size_t i = 0; i < plan.size(); ++i) EXPECT_EQ(m[i].value(0), t.checkpoints[i].value(0));
}

TEST(ExactMean, ClosedFormSum) {
  // E theta_n = sum_k Pi_k^n r_k / k with Pi_k^n = prod_{j=k+1}^n (1 - 1/(2j)).
  const auto rem = remainder_schedule("inv_sqrt_loglog", Row::Ones(1));
  const std::uint64_t n = 500;
  const auto m = exact_mean_recursion(Matrix::Constant(1, 1, 0.5), rem, Row::Zero(1), n, {n});
  double ref = 0.0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    Row r(1);
    rem(k, r);
    double pi = 1.0;
    for (std::uint64_t j = k + 1; j <= n; ++j) pi *= 1.0 - 0.5 / j;
    ref += pi * r(0) / k;
  }
  EXPECT_NEAR(m[0].value(0), ref, 1e-13);
}

TEST(Remainder, DomainConvention) {
  Row r(1);
  const auto a = remainder_schedule("inv_sqrt_sqrtlog", Row::Ones(1));
  a(1, r);
  EXPECT_EQ(r(0), 0.0);
  a(100, r);
  EXPECT_NEAR(r(0), 1.0 / (10.0 * std::sqrt(std::log(100.0))), 1e-15);
  const auto b = remainder_schedule("inv_sqrt_loglog", Row::Ones(1));
  b(2, r);
  EXPECT_EQ(r(0), 0.0);
  b(100, r);
  EXPECT_NEAR(r(0), 1.0 / (10.0 * std::log(std::log(100.0))), 1e-15);
  EXPECT_THROW(remainder_schedule("bogus", Row::Ones(1)), InvalidArgument);
}

TEST(RateExample, LogLogIntegralMatchesQuadrature) {
  const double theta0 = std::exp(-std::exp(2.0));
  for (double x : {1e-3 * theta0, 0.1 * theta0, theta0}) {
    EXPECT_NEAR(inv_loglog_integral(x, theta0) / loglog_integral_oracle(x), 1.0, 1e-9) << x;
  }
  // Above theta0 the integrand is the constant f(theta0).
  const double above = inv_loglog_integral(2.0 * theta0, theta0);
  EXPECT_NEAR(above - inv_loglog_integral(theta0, theta0), theta0 / std::log(std::log(1.0 / theta0)), 1e-15);
}

TEST(RateExample, DriftShape) {
  const double theta0 = std::exp(-std::exp(2.0));
  const DriftFn z = rate_example_drift(0.5, "zero", theta0);
  Row out(1);
  z(Row::Constant(1, 0.2), out);
  EXPECT_DOUBLE_EQ(out(0), 0.1);
  const DriftFn f = rate_example_drift(0.5, "inv_loglog", theta0);
  f(Row::Zero(1), out);
  EXPECT_EQ(out(0), 0.0);
  f(Row::Constant(1, 1e-6), out);
  EXPECT_GT(out(0), 0.0);
  EXPECT_LT(out(0), 0.5e-6);
  EXPECT_THROW(rate_example_drift(0.5, "inv_loglog", 0.5), InvalidArgument);
}

TEST(TrajectoryCsv, Header) {
  const std::string s = trajectory_csv({{4, Row::Constant(2, 0.25)}}, "n", "theta_");
  EXPECT_EQ(s, "n,theta_1,theta_2\n4,0.25,0.25\n");
}
