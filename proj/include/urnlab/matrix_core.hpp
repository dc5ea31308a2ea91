#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string_view>
#include <vector>

namespace urnlab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Row = Eigen::RowVectorXd;
using Col = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CRow = Eigen::RowVectorXcd;
using CCol = Eigen::VectorXcd;

/// Throws InvalidArgument unless `a` is square, non-empty and finite.
void require_square_finite(const Matrix& a, std::string_view what);
void require_finite(const Row& r, std::string_view what);

/// Symmetric within `tol` relative to max(1, ||G||_F) and min eigenvalue >= -tol scaled likewise.
void require_symmetric_psd(const Matrix& g, double tol, std::string_view what);

Matrix mat_exp(const Matrix& a);

/// t^A = exp(A ln t).
Matrix mat_power(const Matrix& a, double t);

/// Solves B^T S + S B = G for B with spectrum in the open right half-plane.
Matrix solve_lyapunov(const Matrix& b, const Matrix& g);

/// Number of singular values above tol * sigma_max.
int numerical_rank(const Matrix& a, double tol = 1e-8);
int numerical_rank(const CMatrix& a, double tol = 1e-8);

struct EigenGroup {
  cplx value;
  int multiplicity = 0;
};

struct ComplexSpectrum {
  std::vector<cplx> eigenvalues;  // descending real part, repeated by multiplicity
  CMatrix right;                  // column j pairs with eigenvalues[j]
  CMatrix left;                   // row j pairs with eigenvalues[j]
  std::vector<EigenGroup> groups;
  double residual = 0.0;
  double tolerance = 0.0;
  bool converged = true;
  bool biorthogonal = true;  // left = right^{-1}
};

ComplexSpectrum eigen_left_right(const Matrix& a);

/// Single-linkage clustering with relative gap `rel_tol`; `chained` is set
/// when some cluster spans more than the tolerance.
std::vector<EigenGroup> cluster_eigenvalues(const std::vector<cplx>& eigs, double rel_tol,
                                            bool* chained = nullptr);

/// Relative Frobenius distance ||a-b||_F / max(||b||_F, floor).
double rel_frobenius(const Matrix& a, const Matrix& b, double floor = 1e-12);

/// Symmetric square root factor R with R^T R = G (eigen route, clipped).
Matrix psd_root(const Matrix& g, double clip_rel = 1e-12);

}  // namespace urnlab
