#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "urnlab/errors.hpp"
#include "urnlab/matrix_core.hpp"
#include "urnlab/rng.hpp"

using namespace urnlab;

namespace {

// Taylor series after scaling by 2^s, squared back.
Matrix taylor_exp(const Matrix& a) {
  int s = 0;
  const double nrm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (std::ldexp(nrm, -s) > 0.25) ++s;
  const Matrix x = a / std::ldexp(1.0, s);
  Matrix term = Matrix::Identity(a.rows(), a.cols()), sum = term;
  for (int k = 1; k < 40; ++k) {
    term = term * x / k;
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

// Vectorized Lyapunov equation solved by dense LU.
Matrix kron_lyapunov(const Matrix& b, const Matrix& g) {
  const Eigen::Index d = b.rows();
  Matrix k = Matrix::Zero(d * d, d * d);
  // column-major vec: vec(B^T S) = (I kron B^T) vec S, vec(S B) = (B^T kron I) vec S
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index p = 0; p < d; ++p) {
        k(j * d + i, j * d + p) += b(p, i);
        k(j * d + i, p * d + i) += b(p, j);
      }
    }
  }
  Col rhs(d * d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) rhs(j * d + i) = g(i, j);
  const Col x = k.fullPivLu().solve(rhs);
  Matrix s(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) s(i, j) = x(j * d + i);
  return s;
}

Matrix random_matrix(StreamRng& rng, int d, double scale) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = scale * rng.gaussian();
  return m;
}

}  // namespace

TEST(MatExp, ZeroIsIdentity) {
  EXPECT_TRUE(mat_exp(Matrix::Zero(3, 3)).isApprox(Matrix::Identity(3, 3)));
}

TEST(MatExp, DiagonalAndNilpotent) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -2.0;
  const Matrix e = mat_exp(d);
  EXPECT_NEAR(e(0, 0), std::exp(1.0), 1e-14);
  EXPECT_NEAR(e(1, 1), std::exp(-2.0), 1e-15);
  Matrix n(2, 2);
  n << 0.0, 1.0, 0.0, 0.0;
  const Matrix en = mat_exp(n);
  EXPECT_NEAR(en(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(en(0, 0), 1.0, 1e-15);
}

TEST(MatExp, MatchesTaylorOracle) {
  StreamRng rng(11, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 5;
    const double scale = trial < 10 ? 0.3 : 3.0;
    const Matrix a = random_matrix(rng, d, scale);
    const Matrix ref = taylor_exp(a);
    EXPECT_LE((mat_exp(a) - ref).norm() / ref.norm(), 1e-12) << "trial " << trial;
  }
}

TEST(MatExp, RotationGenerator) {
  Matrix j(2, 2);
  j << 0.0, -1.0, 1.0, 0.0;
  const Matrix e = mat_exp(std::numbers::pi / 2 * j);
  EXPECT_NEAR(e(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(e(1, 0), 1.0, 1e-15);
}

TEST(MatExp, RejectsNonFinite) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 1) = NAN;
  EXPECT_THROW(mat_exp(a), InvalidArgument);
  EXPECT_THROW(mat_exp(Matrix::Zero(2, 3)), InvalidArgument);
}

TEST(MatPower, DiagonalPowers) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 0.5;
  a(1, 1) = 2.0;
  const Matrix p = mat_power(a, 9.0);
  EXPECT_NEAR(p(0, 0), 3.0, 1e-13);
  EXPECT_NEAR(p(1, 1), 81.0, 1e-11);
  EXPECT_TRUE(mat_power(a, 1.0).isApprox(Matrix::Identity(2, 2)));
  EXPECT_THROW(mat_power(a, 0.0), InvalidArgument);
}

TEST(Lyapunov, ScalarClosedForm) {
  const Matrix s = solve_lyapunov(Matrix::Constant(1, 1, 0.25), Matrix::Constant(1, 1, 2.0));
  EXPECT_NEAR(s(0, 0), 4.0, 1e-14);
}

TEST(Lyapunov, MatchesKroneckerOracle) {
  StreamRng rng(5, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 6;
    Matrix b = random_matrix(rng, d, 1.0);
    const double shift = Eigen::EigenSolver<Matrix>(b).eigenvalues().real().minCoeff();
    b += (0.3 - shift) * Matrix::Identity(d, d);
    const Matrix w = random_matrix(rng, d, 1.0);
    const Matrix g = w * w.transpose();
    const Matrix s = solve_lyapunov(b, g);
    const Matrix ref = kron_lyapunov(b, g);
    EXPECT_LE((s - ref).norm() / ref.norm(), 1e-9) << "trial " << trial;
    EXPECT_LE((b.transpose() * s + s * b - g).norm() / g.norm(), 1e-10);
    EXPECT_LE((s - s.transpose()).norm(), 1e-10 * s.norm());
  }
}

TEST(Lyapunov, RejectsUnstableAndBadGamma) {
  Matrix b = Matrix::Identity(2, 2);
  b(1, 1) = -0.1;
  EXPECT_THROW(solve_lyapunov(b, Matrix::Identity(2, 2)), SpectrumError);
  Matrix g(2, 2);
  g << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(solve_lyapunov(Matrix::Identity(2, 2), g), InvalidArgument);
  Matrix neg = Matrix::Identity(2, 2);
  neg(1, 1) = -1.0;
  EXPECT_THROW(solve_lyapunov(Matrix::Identity(2, 2), neg), InvalidArgument);
}

TEST(Lyapunov, JordanBlock) {
  Matrix b(2, 2);
  b << 1.0, 1.0, 0.0, 1.0;
  const Matrix g = Matrix::Identity(2, 2);
  const Matrix s = solve_lyapunov(b, g);
  EXPECT_LE((b.transpose() * s + s * b - g).norm(), 1e-12);
}

TEST(NumericalRank, Basics) {
  Matrix a(3, 3);
  a << 1, 2, 3, 2, 4, 6, 1, 0, 1;
  EXPECT_EQ(numerical_rank(a), 2);
  EXPECT_EQ(numerical_rank(Matrix(Matrix::Identity(4, 4))), 4);
  EXPECT_EQ(numerical_rank(Matrix(Matrix::Zero(3, 3))), 0);
  EXPECT_EQ(numerical_rank(CMatrix(CMatrix::Identity(2, 2))), 2);
}

TEST(EigenLeftRight, Biorthogonal) {
  Matrix a(3, 3);
  a << 2, 1, 0, 0, 3, 1, 1, 0, 4;
  const ComplexSpectrum s = eigen_left_right(a);
  ASSERT_EQ(s.eigenvalues.size(), 3u);
  for (std::size_t i = 1; i < 3; ++i) EXPECT_GE(s.eigenvalues[i - 1].real(), s.eigenvalues[i].real() - 1e-12);
  const CMatrix ac = a.cast<cplx>();
  for (int j = 0; j < 3; ++j) {
    EXPECT_LE((ac * s.right.col(j) - s.eigenvalues[j] * s.right.col(j)).norm(), 1e-10);
    EXPECT_LE((s.left.row(j) * ac - s.eigenvalues[j] * s.left.row(j)).norm(), 1e-10);
  }
  EXPECT_TRUE((s.left * s.right).isApprox(CMatrix::Identity(3, 3), 1e-10));
}

TEST(EigenLeftRight, ComplexPair) {
  Matrix a(2, 2);
  a << 1, -1, 1, 1;
  const ComplexSpectrum s = eigen_left_right(0.3 * a);
  EXPECT_NEAR(s.eigenvalues[0].real(), 0.3, 1e-14);
  EXPECT_NEAR(std::abs(s.eigenvalues[0].imag()), 0.3, 1e-14);
}

TEST(ClusterEigenvalues, MergesNearAndFlagsChains) {
  bool chained = false;
  const auto g = cluster_eigenvalues({cplx(1.0), cplx(1.0 + 1e-9), cplx(0.5)}, 1e-7, &chained);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0].multiplicity + g[1].multiplicity, 3);
  EXPECT_FALSE(chained);
  std::vector<cplx> chain;
  for (int i = 0; i < 5; ++i) chain.push_back(cplx(1.0 + i * 0.9e-7));
  const auto c = cluster_eigenvalues(chain, 1e-7, &chained);
  EXPECT_EQ(c.size(), 1u);
  EXPECT_TRUE(chained);
}

TEST(RelFrobenius, Examples) {
  const Matrix i = Matrix::Identity(2, 2);
  EXPECT_DOUBLE_EQ(rel_frobenius(i, i), 0.0);
  EXPECT_NEAR(rel_frobenius(1.1 * i, i), 0.1, 1e-15);
}

TEST(PsdRoot, ReconstructsAndClips) {
  Matrix g(2, 2);
  g << 2.0, 1.0, 1.0, 2.0;
  const Matrix r = psd_root(g);
  EXPECT_TRUE((r.transpose() * r).isApprox(g, 1e-14));
  Matrix sing(2, 2);
  sing << 1.0, 0.0, 0.0, 0.0;
  EXPECT_TRUE((psd_root(sing).transpose() * psd_root(sing)).isApprox(sing));
}

TEST(RequireSymmetricPsd, Flags) {
  Matrix g(2, 2);
  g << 1.0, 0.2, 0.2, 1.0;
  EXPECT_NO_THROW(require_symmetric_psd(g, 1e-10, "g"));
  g(0, 1) = 0.3;
  EXPECT_THROW(require_symmetric_psd(g, 1e-10, "g"), InvalidArgument);
}
