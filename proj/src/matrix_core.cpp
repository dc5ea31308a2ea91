#include "urnlab/matrix_core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "urnlab/errors.hpp"

namespace urnlab {

void require_square_finite(const Matrix& a, std::string_view what) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw InvalidArgument(std::string(what) + ": expected a non-empty square matrix, got " +
                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  if (!a.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entry");
}

void require_finite(const Row& r, std::string_view what) {
  if (!r.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entry");
}

void require_symmetric_psd(const Matrix& g, double tol, std::string_view what) {
  require_square_finite(g, what);
  const double scale = std::max(1.0, g.norm());
  if ((g - g.transpose()).norm() > tol * scale) {
    throw InvalidArgument(std::string(what) + ": matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol * scale) {
    throw InvalidArgument(std::string(what) + ": matrix is not positive semidefinite");
  }
}

Matrix mat_exp(const Matrix& a) {
  require_square_finite(a, "mat_exp");
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const Eigen::Index n = a.rows();
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const Matrix as = a / std::ldexp(1.0, s);
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = as * as;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix u =
      as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < s; ++k) r = r * r;
  return r;
}

Matrix mat_power(const Matrix& a, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw InvalidArgument("mat_power: exponent base must be a positive finite real");
  }
  require_square_finite(a, "mat_power");
  return mat_exp(a * std::log(t));
}

namespace {

// T^H X + X T = F with T upper triangular.
CMatrix triangular_sylvester(const CMatrix& t, const CMatrix& f) {
  const Eigen::Index n = t.rows();
  CMatrix x = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      cplx acc = f(i, j);
      for (Eigen::Index k = 0; k < i; ++k) acc -= std::conj(t(k, i)) * x(k, j);
      for (Eigen::Index k = 0; k < j; ++k) acc -= x(i, k) * t(k, j);
      x(i, j) = acc / (std::conj(t(i, i)) + t(j, j));
    }
  }
  return x;
}

}  // namespace

Matrix solve_lyapunov(const Matrix& b, const Matrix& g) {
  require_square_finite(b, "solve_lyapunov(B)");
  require_square_finite(g, "solve_lyapunov(G)");
  if (b.rows() != g.rows()) throw InvalidArgument("solve_lyapunov: dimension mismatch");
  require_symmetric_psd(g, 1e-10, "solve_lyapunov(G)");

  Eigen::ComplexSchur<CMatrix> schur(b.cast<cplx>());
  if (schur.info() != Eigen::Success) {
    throw NonConvergence("solve_lyapunov: Schur decomposition failed", NAN);
  }
  const CMatrix& t = schur.matrixT();
  const CMatrix& u = schur.matrixU();
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    if (!(t(i, i).real() > 0.0)) {
      throw SpectrumError("solve_lyapunov: B has eigenvalue " + format_complex(t(i, i)) +
                              " with non-positive real part",
                          t(i, i));
    }
  }
  const Matrix gs = 0.5 * (g + g.transpose());
  const CMatrix uh = u.adjoint();
  Matrix sigma = (u * triangular_sylvester(t, uh * gs.cast<cplx>() * u) * uh).real();
  sigma = 0.5 * (sigma + sigma.transpose()).eval();

  const double bound = 1e-10 * (1.0 + gs.norm());
  for (int it = 0; it < 3; ++it) {
    Matrix res = gs - (b.transpose() * sigma + sigma * b);
    res = 0.5 * (res + res.transpose()).eval();
    if (res.norm() <= 0.01 * bound) break;
    Matrix corr = (u * triangular_sylvester(t, uh * res.cast<cplx>() * u) * uh).real();
    sigma += 0.5 * (corr + corr.transpose());
  }
  return sigma;
}

int numerical_rank(const Matrix& a, double tol) {
  return numerical_rank(CMatrix(a.cast<cplx>()), tol);
}

int numerical_rank(const CMatrix& a, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("numerical_rank: tol must be positive");
  if (a.size() == 0) return 0;
  if (!a.allFinite()) throw InvalidArgument("numerical_rank: non-finite entry");
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  if (smax == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * smax) ++r;
  }
  return r;
}

std::vector<EigenGroup> cluster_eigenvalues(const std::vector<cplx>& eigs, double rel_tol,
                                            bool* chained) {
  const std::size_t n = eigs.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  auto close = [&](cplx x, cplx y) {
    const double scale = std::max({1.0, std::abs(x), std::abs(y)});
    return std::abs(x - y) <= rel_tol * scale;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (close(eigs[i], eigs[j])) parent[find(i)] = find(j);
    }
  }
  std::vector<EigenGroup> groups;
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::size_t> root_index(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (root_index[r] == n) {
      root_index[r] = groups.size();
      groups.push_back({});
      members.emplace_back();
    }
    members[root_index[r]].push_back(i);
  }
  bool any_chain = false;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    cplx sum = 0.0;
    for (std::size_t i : members[g]) sum += eigs[i];
    groups[g].value = sum / static_cast<double>(members[g].size());
    groups[g].multiplicity = static_cast<int>(members[g].size());
    for (std::size_t i : members[g]) {
      for (std::size_t j : members[g]) {
        if (!close(eigs[i], eigs[j])) any_chain = true;
      }
    }
  }
  std::stable_sort(groups.begin(), groups.end(), [](const EigenGroup& x, const EigenGroup& y) {
    if (x.value.real() != y.value.real()) return x.value.real() > y.value.real();
    return x.value.imag() > y.value.imag();
  });
  if (chained) *chained = any_chain;
  return groups;
}

namespace {

void fix_phase(CCol& v) {
  const double nrm = v.norm();
  if (nrm == 0.0) return;
  v /= nrm;
  const double mx = v.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) >= (1.0 - 1e-8) * mx) {
      v *= std::conj(v(k)) / std::abs(v(k));
      v(k) = std::abs(v(k));
      break;
    }
  }
}

bool eig_order(cplx x, cplx y) {
  if (x.real() != y.real()) return x.real() > y.real();
  return x.imag() > y.imag();
}

}  // namespace

ComplexSpectrum eigen_left_right(const Matrix& a) {
  require_square_finite(a, "eigen_left_right");
  const Eigen::Index n = a.rows();
  ComplexSpectrum out;
  out.right.resize(n, n);
  out.left.resize(n, n);
  out.eigenvalues.resize(n);

  const double scale = std::max(1.0, a.norm());
  const bool symmetric = (a - a.transpose()).norm() <= 1e-14 * scale;
  if (symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) throw NonConvergence("eigen_left_right: symmetric solver failed", NAN);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index src = n - 1 - j;
      out.eigenvalues[j] = es.eigenvalues()(src);
      CCol v = es.eigenvectors().col(src).cast<cplx>();
      fix_phase(v);
      out.right.col(j) = v;
    }
    out.left = out.right.transpose();
  } else {
    Eigen::EigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) throw NonConvergence("eigen_left_right: QR iteration failed", NAN);
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    const CCol vals = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return eig_order(vals(x), vals(y)); });
    const CMatrix vecs = es.eigenvectors();
    for (Eigen::Index j = 0; j < n; ++j) {
      out.eigenvalues[j] = vals(order[j]);
      CCol v = vecs.col(order[j]);
      fix_phase(v);
      out.right.col(j) = v;
    }
    Eigen::JacobiSVD<CMatrix> svd(out.right);
    const auto& sv = svd.singularValues();
    const double rcond = sv(0) > 0.0 ? sv(n - 1) / sv(0) : 0.0;
    if (rcond > 1e-10) {
      out.left = out.right.inverse();
    } else {
      out.biorthogonal = false;
      Eigen::EigenSolver<Matrix> et(a.transpose());
      if (et.info() != Eigen::Success) throw NonConvergence("eigen_left_right: QR iteration failed", NAN);
      const CCol lvals = et.eigenvalues();
      const CMatrix lvecs = et.eigenvectors();
      std::vector<bool> used(n, false);
      for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index best = -1;
        double dist = INFINITY;
        for (Eigen::Index k = 0; k < n; ++k) {
          if (used[k]) continue;
          const double dk = std::abs(lvals(k) - out.eigenvalues[j]);
          if (dk < dist) {
            dist = dk;
            best = k;
          }
        }
        used[best] = true;
        CCol w = lvecs.col(best);
        fix_phase(w);
        const cplx s = (w.transpose() * out.right.col(j))(0);
        if (std::abs(s) > 1e-8) w /= s;
        out.left.row(j) = w.transpose();
      }
    }
  }

  const CMatrix ac = a.cast<cplx>();
  double res = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const cplx lam = out.eigenvalues[j];
    const CCol v = out.right.col(j);
    const CRow w = out.left.row(j);
    if (v.norm() > 0.0) res = std::max(res, (ac * v - lam * v).norm() / v.norm());
    if (w.norm() > 0.0) res = std::max(res, (w * ac - lam * w).norm() / w.norm());
  }
  out.residual = res;
  out.tolerance = 1e-9 * scale;
  out.converged = res <= out.tolerance;
  out.groups = cluster_eigenvalues(out.eigenvalues, 1e-7);
  return out;
}

double rel_frobenius(const Matrix& a, const Matrix& b, double floor) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument("rel_frobenius: dimension mismatch");
  }
  return (a - b).norm() / std::max(b.norm(), floor);
}

Matrix psd_root(const Matrix& g, double clip_rel) {
  require_square_finite(g, "psd_root");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (g + g.transpose()));
  Col lam = es.eigenvalues();
  const double mx = std::max(0.0, lam.maxCoeff());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    lam(i) = lam(i) <= clip_rel * mx ? 0.0 : std::sqrt(lam(i));
  }
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace urnlab
