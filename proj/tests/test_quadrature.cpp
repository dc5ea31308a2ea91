#include <gtest/gtest.h>

#include <cmath>

#include "urnlab/errors.hpp"
#include "urnlab/quadrature.hpp"

using namespace urnlab;

TEST(AdaptiveSimpson, PolynomialAndExponential) {
  const Matrix cubic = adaptive_simpson([](double x) { return Matrix::Constant(1, 1, x * x * x); }, 0.0, 2.0);
  EXPECT_NEAR(cubic(0, 0), 4.0, 1e-12);
  const Matrix e = adaptive_simpson([](double x) { return Matrix::Constant(1, 1, std::exp(-x)); }, 0.0, 5.0);
  EXPECT_NEAR(e(0, 0), 1.0 - std::exp(-5.0), 1e-10);
}

TEST(AdaptiveSimpson, EmptyInterval) {
  const Matrix z = adaptive_simpson([](double) { return Matrix::Ones(2, 2); }, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(z.norm(), 0.0);
}

TEST(GramianIntegral, ScalarClosedForm) {
  const double beta = 0.7, g = 1.5, L = 3.0;
  const Matrix r = gramian_integral(Matrix::Constant(1, 1, beta), Matrix::Constant(1, 1, g), 0.0, L);
  EXPECT_NEAR(r(0, 0), g * (1.0 - std::exp(-2.0 * beta * L)) / (2.0 * beta), 1e-10);
}

TEST(GramianIntegral, JordanClosedForm) {
  // B = [[0,-1],[0,0]] gives e^{-Bu} = [[1,u],[0,1]]; with G = e1 e1^T the
  // integrand is [[1,u],[u,u^2]].
  Matrix b(2, 2);
  b << 0.0, -1.0, 0.0, 0.0;
  Matrix g = Matrix::Zero(2, 2);
  g(0, 0) = 1.0;
  const Matrix r = gramian_integral(b, g, 0.0, 2.0);
  EXPECT_NEAR(r(0, 0), 2.0, 1e-10);
  EXPECT_NEAR(r(0, 1), 2.0, 1e-10);
  EXPECT_NEAR(r(1, 1), 8.0 / 3.0, 1e-10);
}

TEST(GaussLaguerre, Moments) {
  const GaussRule r = gauss_laguerre(48);
  ASSERT_EQ(r.nodes.size(), 48u);
  double m0 = 0, m1 = 0, m2 = 0, m5 = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    m0 += r.weights[i];
    m1 += r.weights[i] * r.nodes[i];
    m2 += r.weights[i] * r.nodes[i] * r.nodes[i];
    m5 += r.weights[i] * std::pow(r.nodes[i], 5);
  }
  EXPECT_NEAR(m0, 1.0, 1e-12);
  EXPECT_NEAR(m1, 1.0, 1e-11);
  EXPECT_NEAR(m2, 2.0, 1e-10);
  EXPECT_NEAR(m5 / 120.0, 1.0, 1e-9);
}
