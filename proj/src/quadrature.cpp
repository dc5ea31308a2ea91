#include "urnlab/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "urnlab/errors.hpp"

namespace urnlab {

namespace {

struct Panel {
  double a, b;
  Matrix fa, fm, fb;
  Matrix whole;
};

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Matrix simpson(double a, double b, const Matrix& fa, const Matrix& fm, const Matrix& fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

Matrix refine(const std::function<Matrix(double)>& f, const Panel& p, double tol, int depth) {
  const double m = 0.5 * (p.a + p.b);
  const Matrix flm = f(0.5 * (p.a + m));
  const Matrix frm = f(0.5 * (m + p.b));
  const Matrix left = simpson(p.a, m, p.fa, flm, p.fm);
  const Matrix right = simpson(m, p.b, p.fm, frm, p.fb);
  const Matrix both = left + right;
  const double err = max_abs(both - p.whole) / 15.0;
  if (err <= tol) return both + (both - p.whole) / 15.0;
  if (depth <= 0 || !both.allFinite()) {
    throw QuadratureError("adaptive_simpson: tolerance not reached on [" + std::to_string(p.a) + ", " +
                          std::to_string(p.b) + "]; refine the interval into substeps");
  }
  Panel lp{p.a, m, p.fa, flm, p.fm, left};
  Panel rp{m, p.b, p.fm, frm, p.fb, right};
  return refine(f, lp, 0.5 * tol, depth - 1) + refine(f, rp, 0.5 * tol, depth - 1);
}

}  // namespace

Matrix adaptive_simpson(const std::function<Matrix(double)>& f, double a, double b,
                        const QuadratureOptions& opt) {
  if (!std::isfinite(a) || !std::isfinite(b) || b < a) {
    throw InvalidArgument("adaptive_simpson: invalid interval");
  }
  if (!(opt.abs_tol > 0.0) || opt.initial_panels < 1) {
    throw InvalidArgument("adaptive_simpson: invalid options");
  }
  const Matrix f0 = f(a);
  if (b == a) return Matrix::Zero(f0.rows(), f0.cols());
  const int np = opt.initial_panels;
  const double h = (b - a) / np;
  Matrix total = Matrix::Zero(f0.rows(), f0.cols());
  Matrix fa = f0;
  for (int k = 0; k < np; ++k) {
    const double pa = a + k * h;
    const double pb = k + 1 == np ? b : a + (k + 1) * h;
    const Matrix fm = f(0.5 * (pa + pb));
    const Matrix fb = f(pb);
    Panel p{pa, pb, fa, fm, fb, simpson(pa, pb, fa, fm, fb)};
    total += refine(f, p, opt.abs_tol / np, opt.max_depth);
    fa = fb;
  }
  return total;
}

Matrix gramian_integral(const Matrix& b, const Matrix& g, double lo, double hi,
                        const QuadratureOptions& opt) {
  require_square_finite(b, "gramian_integral(B)");
  require_square_finite(g, "gramian_integral(G)");
  auto integrand = [&](double u) -> Matrix {
    const Matrix e = mat_exp(-u * b);
    return e.transpose() * g * e;
  };
  Matrix s = adaptive_simpson(integrand, lo, hi, opt);
  return 0.5 * (s + s.transpose());
}

GaussRule gauss_laguerre(int n) {
  if (n < 1) throw InvalidArgument("gauss_laguerre: n must be positive");
  Matrix j = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    j(i, i) = 2.0 * i + 1.0;
    if (i + 1 < n) j(i, i + 1) = j(i + 1, i) = i + 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(j);
  GaussRule r;
  for (int i = 0; i < n; ++i) {
    r.nodes.push_back(es.eigenvalues()(i));
    const double v0 = es.eigenvectors()(0, i);
    r.weights.push_back(v0 * v0);
  }
  return r;
}

}  // namespace urnlab
