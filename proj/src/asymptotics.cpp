#include "urnlab/asymptotics.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "urnlab/errors.hpp"
#include "urnlab/quadrature.hpp"

namespace urnlab {

namespace {

constexpr double kJordanTol = 1e-8;

CMatrix shifted(const Matrix& h, cplx lambda) {
  CMatrix n = h.cast<cplx>();
  n.diagonal().array() -= lambda;
  return n;
}

int staircase_rank(const CMatrix& nk, double hscale, int k, double tol) {
  Eigen::JacobiSVD<CMatrix> svd(nk);
  const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  if (smax <= 1e-12 * std::pow(hscale, k)) return 0;
  return numerical_rank(nk, tol);
}

// Right null basis (columns) of n, of dimension m.
CMatrix null_right(const CMatrix& n, int m) {
  Eigen::JacobiSVD<CMatrix> svd(n, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(m);
}

// Left null basis (rows) of n, of dimension m.
CMatrix null_left(const CMatrix& n, int m) {
  return null_right(n.transpose(), m).transpose();
}

CRow normalized_direction(CRow w) {
  const double nrm = w.norm();
  if (nrm == 0.0) return w;
  w /= nrm;
  const double mx = w.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (std::abs(w(k)) >= (1.0 - 1e-8) * mx) {
      const cplx ph = std::conj(w(k)) / std::abs(w(k));
      w *= ph;
      w(k) = std::abs(w(k));
      break;
    }
  }
  return w;
}

struct BasisBlock {
  Eigen::Index start = 0;
  int size = 1;
  double lambda = 0.0;
};

struct ChainBasis {
  std::vector<BasisBlock> blocks;
  Matrix t;
  Matrix tinv;
};

ChainBasis parse_chain_basis(const Matrix& dh, const Matrix& t) {
  require_square_finite(t, "chain_basis");
  if (t.rows() != dh.rows()) throw InvalidBasis("chain_basis: dimension mismatch with Dh");
  Eigen::FullPivLU<Matrix> lu(t);
  if (!lu.isInvertible()) throw InvalidBasis("chain_basis: T is singular");
  ChainBasis cb;
  cb.t = t;
  cb.tinv = lu.inverse();
  const Matrix j = cb.tinv * dh * t;
  const Eigen::Index d = j.rows();
  Matrix jf = Matrix::Zero(d, d);
  std::vector<bool> link(d > 0 ? d - 1 : 0, false);
  for (Eigen::Index i = 0; i < d; ++i) jf(i, i) = j(i, i);
  for (Eigen::Index i = 0; i + 1 < d; ++i) {
    if (std::abs(j(i, i + 1) - 1.0) <= kJordanTol && std::abs(j(i, i) - j(i + 1, i + 1)) <= kJordanTol) {
      link[i] = true;
      jf(i, i + 1) = 1.0;
    }
  }
  const double err = (j - jf).norm();
  if (err > kJordanTol) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "chain_basis: ||T^{-1} Dh T - J|| = %.3g exceeds %.0e", err, kJordanTol);
    throw InvalidBasis(buf);
  }
  Eigen::Index i = 0;
  while (i < d) {
    BasisBlock b;
    b.start = i;
    b.lambda = j(i, i);
    while (i + 1 < d && link[i]) {
      ++b.size;
      ++i;
    }
    ++i;
    cb.blocks.push_back(b);
  }
  return cb;
}

std::string trim_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

SpectralProfile spectral_profile(const Matrix& h, const ProfileOptions& opt) {
  require_square_finite(h, "spectral_profile");
  const ComplexSpectrum spec = eigen_left_right(h);
  bool chained = false;
  const std::vector<EigenGroup> groups = cluster_eigenvalues(spec.eigenvalues, opt.cluster_tol, &chained);
  SpectralProfile p;
  p.dim = static_cast<int>(h.rows());
  if (chained) p.warning = "ambiguous eigenvalue clustering: clusters within tolerance were merged";
  const double hscale = std::max(1.0, h.norm());
  for (const EigenGroup& g : groups) {
    SpectralGroup sg;
    sg.lambda = g.value;
    sg.multiplicity = g.multiplicity;
    const int m = g.multiplicity;
    const CMatrix n = shifted(h, g.value);
    std::vector<int> rank(m + 1);
    rank[0] = p.dim;
    CMatrix nk = CMatrix::Identity(p.dim, p.dim);
    for (int k = 1; k <= m; ++k) {
      nk = nk * n;
      rank[k] = std::min(rank[k - 1], staircase_rank(nk, hscale, k, opt.rank_tol));
    }
    // at_least[k] = number of blocks of size >= k
    std::vector<int> at_least(m + 2, 0);
    for (int k = 1; k <= m; ++k) {
      at_least[k] = rank[k - 1] - rank[k];
      if (k > 1) at_least[k] = std::min(at_least[k], at_least[k - 1]);
    }
    for (int k = m; k >= 1; --k) {
      for (int c = 0; c < at_least[k] - at_least[k + 1]; ++c) sg.block_sizes.push_back(k);
    }
    int total = 0;
    for (int s : sg.block_sizes) total += s;
    if (sg.block_sizes.empty()) sg.block_sizes.push_back(0);
    if (total != m) {
      sg.block_sizes.front() += m - total;
      if (!p.warning.empty()) p.warning += "; ";
      p.warning += "Jordan block accounting adjusted for eigenvalue " + format_complex(g.value);
    }
    p.groups.push_back(sg);
  }
  p.rho = p.groups.front().lambda.real();
  for (const auto& g : p.groups) p.rho = std::min(p.rho, g.lambda.real());
  p.nu = 1;
  for (const SpectralGroup* g : layer_groups(p, p.rho, opt.cluster_tol)) p.nu = std::max(p.nu, g->max_block());
  if (p.groups.size() > 1) {
    double sec = p.groups[1].lambda.real();
    for (std::size_t i = 2; i < p.groups.size(); ++i) sec = std::max(sec, p.groups[i].lambda.real());
    p.lambda_sec = sec;
  }
  return p;
}

std::vector<const SpectralGroup*> layer_groups(const SpectralProfile& p, double re, double tol) {
  std::vector<const SpectralGroup*> out;
  for (const auto& g : p.groups) {
    if (std::abs(g.lambda.real() - re) <= tol * std::max(1.0, std::abs(re))) out.push_back(&g);
  }
  return out;
}

std::string regime_name(RegimeTag t) {
  switch (t) {
    case RegimeTag::Standard: return "standard";
    case RegimeTag::Critical: return "critical";
    case RegimeTag::Slow: return "slow";
  }
  return "unknown";
}

Regime classify_regime(const SpectralProfile& p, double rho_tol) {
  return regime_for(p.rho, p.nu, rho_tol);
}

Regime regime_for(double rho, int nu, double rho_tol) {
  if (!(rho_tol >= 0.0)) throw InvalidArgument("classify_regime: rho_tol must be non-negative");
  if (!(rho > 0.0)) {
    throw RegimeError("classify_regime: rho = " + trim_number(rho) +
                      " <= 0; eigenvalues must have positive real parts");
  }
  Regime r;
  r.rho = rho;
  r.nu = nu;
  if (std::abs(rho - 0.5) <= rho_tol) {
    r.tag = RegimeTag::Critical;
    r.rho = 0.5;
    r.scaling = nu == 1 ? "sqrt(n/log n)" : "sqrt(n/(log n)^" + std::to_string(2 * nu - 1) + ")";
  } else if (rho > 0.5) {
    r.tag = RegimeTag::Standard;
    r.scaling = "sqrt(n)";
  } else {
    r.tag = RegimeTag::Slow;
    r.scaling = "n^" + trim_number(rho);
    if (nu == 2) r.scaling += "/log n";
    if (nu > 2) r.scaling += "/(log n)^" + std::to_string(nu - 1);
  }
  return r;
}

double scale_factor(const Regime& r, double n) {
  switch (r.tag) {
    case RegimeTag::Standard: return std::sqrt(n);
    case RegimeTag::Critical: return std::sqrt(n) / std::pow(std::log(n), r.nu - 0.5);
    case RegimeTag::Slow: return std::pow(n, r.rho) / std::pow(std::log(n), r.nu - 1);
  }
  return 1.0;
}

Matrix clt_covariance(const Matrix& dh, const Matrix& gamma) {
  require_square_finite(dh, "clt_covariance(Dh)");
  const ComplexSpectrum s = eigen_left_right(dh);
  double rho = INFINITY;
  for (cplx l : s.eigenvalues) rho = std::min(rho, l.real());
  if (!(rho > 0.5)) {
    throw RegimeError("clt_covariance: rho = " + trim_number(rho) +
                      " <= 1/2; use critical_covariance (rho = 1/2) or slow_regime_descriptor (rho < 1/2)");
  }
  const Eigen::Index d = dh.rows();
  return solve_lyapunov(dh - 0.5 * Matrix::Identity(d, d), gamma);
}

Matrix critical_covariance(const Matrix& dh, const Matrix& gamma, const std::optional<Matrix>& chain_basis,
                           double rho_tol) {
  require_square_finite(dh, "critical_covariance(Dh)");
  if (gamma.rows() != dh.rows() || gamma.cols() != dh.cols()) {
    throw InvalidArgument("critical_covariance: Gamma dimension mismatch");
  }
  require_symmetric_psd(gamma, 1e-10, "critical_covariance(Gamma)");
  const SpectralProfile p = spectral_profile(dh);
  if (std::abs(p.rho - 0.5) > rho_tol) {
    throw RegimeError("critical_covariance: rho = " + trim_number(p.rho) + " is not 1/2");
  }
  const Eigen::Index d = dh.rows();
  const int nu = p.nu;

  // Each entry is the sum of t_{a1} r_{a nu} over chains sharing one eigenvalue.
  std::vector<CMatrix> projectors;
  if (chain_basis) {
    const ChainBasis cb = parse_chain_basis(dh, *chain_basis);
    int nu_basis = 1;
    for (const auto& b : cb.blocks) {
      if (std::abs(b.lambda - 0.5) <= 1e-7) nu_basis = std::max(nu_basis, b.size);
    }
    if (nu_basis != nu) {
      throw InvalidBasis("chain_basis: block structure disagrees with the computed Jordan profile");
    }
    std::vector<std::pair<double, CMatrix>> acc;
    for (const auto& b : cb.blocks) {
      if (std::abs(b.lambda - 0.5) > 1e-7 || b.size != nu) continue;
      const CMatrix pa = (cb.t.col(b.start) * cb.tinv.row(b.start + b.size - 1)).cast<cplx>();
      bool merged = false;
      for (auto& [lam, m] : acc) {
        if (std::abs(lam - b.lambda) <= 1e-7) {
          m += pa;
          merged = true;
        }
      }
      if (!merged) acc.emplace_back(b.lambda, pa);
    }
    for (auto& [lam, m] : acc) projectors.push_back(m);
  } else {
    if (nu > 1) {
      throw NeedsChainBasis("critical_covariance: eigenvalue on Re = 1/2 has Jordan block of order " +
                            std::to_string(nu) + "; supply a chain basis T");
    }
    for (const SpectralGroup* g : layer_groups(p, 0.5)) {
      const CMatrix n = shifted(dh, g->lambda);
      const CMatrix r = null_right(n, g->multiplicity);
      const CMatrix l = null_left(n, g->multiplicity);
      projectors.push_back(r * (l * r).inverse() * l);
    }
  }

  double fact = 1.0;
  for (int k = 2; k < nu; ++k) fact *= k;
  const double c = 1.0 / (fact * fact) / (2.0 * nu - 1.0);
  const CMatrix gc = gamma.cast<cplx>();
  CMatrix sum = CMatrix::Zero(d, d);
  double mag = 0.0;
  for (const CMatrix& pm : projectors) {
    const CMatrix term = pm.adjoint() * gc * pm;
    sum += term;
    mag += term.norm();
  }
  sum *= c;
  mag *= c;
  const double im = sum.imag().norm();
  if (im > 1e-10 * std::max(mag, 1e-300) && im > 0.0) {
    throw NonConvergence("critical_covariance: imaginary part not negligible (eigenvector pairing)", im);
  }
  Matrix out = sum.real();
  return 0.5 * (out + out.transpose());
}

Matrix limit_covariance_quadrature(const Matrix& dh, const Matrix& gamma, double L) {
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidArgument("limit_covariance_quadrature: L must be positive");
  require_square_finite(dh, "limit_covariance_quadrature(Dh)");
  require_symmetric_psd(gamma, 1e-10, "limit_covariance_quadrature(Gamma)");
  const SpectralProfile p = spectral_profile(dh);
  const double norm = std::pow(L, 2 * p.nu - 1);
  const Eigen::Index d = dh.rows();
  const Matrix b = dh - 0.5 * Matrix::Identity(d, d);
  const Matrix gs = gamma / norm;
  return gramian_integral(b, gs, 0.0, L);
}

Matrix extrapolate_limit_covariance(const Matrix& dh, const Matrix& gamma, const std::vector<double>& Ls) {
  if (Ls.size() < 2) throw InvalidArgument("extrapolate_limit_covariance: need at least two horizons");
  std::vector<Matrix> vals;
  for (double L : Ls) vals.push_back(limit_covariance_quadrature(dh, gamma, L));
  Matrix out = Matrix::Zero(dh.rows(), dh.cols());
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < Ls.size(); ++j) {
      if (j == i) continue;
      const double hi = 1.0 / Ls[i], hj = 1.0 / Ls[j];
      if (hi == hj) throw InvalidArgument("extrapolate_limit_covariance: repeated horizon");
      w *= hj / (hj - hi);
    }
    out += w * vals[i];
  }
  return out;
}

SlowDescriptor layer_descriptor(const SpectralProfile& profile, const Matrix& h, double re,
                                const std::optional<Matrix>& chain_basis) {
  require_square_finite(h, "layer_descriptor");
  const auto layer = layer_groups(profile, re);
  SlowDescriptor out;
  out.rho = re;
  for (const SpectralGroup* g : layer) out.nu = std::max(out.nu, g->max_block());
  if (chain_basis) {
    const ChainBasis cb = parse_chain_basis(h, *chain_basis);
    for (const auto& b : cb.blocks) {
      if (std::abs(b.lambda - re) > 1e-7 * std::max(1.0, std::abs(re)) || b.size != out.nu) continue;
      SlowComponent c;
      c.lambda = b.lambda;
      c.frequency = 0.0;
      c.nu = b.size;
      c.direction = normalized_direction(cb.tinv.row(b.start + b.size - 1).cast<cplx>());
      out.components.push_back(c);
    }
    return out;
  }

  for (const SpectralGroup* g : layer) {
    if (g->max_block() != out.nu) continue;
    const bool uniform = std::all_of(g->block_sizes.begin(), g->block_sizes.end(),
                                     [&](int s) { return s == out.nu; });
    if (!uniform) {
      throw NeedsChainBasis("eigenvalue " + format_complex(g->lambda) +
                            " has Jordan blocks of mixed order; supply a chain basis T");
    }
    const int nblocks = static_cast<int>(g->block_sizes.size());
    const CMatrix l = null_left(shifted(h, g->lambda), nblocks);
    for (int a = 0; a < nblocks; ++a) {
      SlowComponent c;
      c.lambda = g->lambda;
      c.frequency = g->lambda.imag();
      c.nu = out.nu;
      c.direction = normalized_direction(l.row(a));
      out.components.push_back(c);
    }
  }
  return out;
}

SlowDescriptor slow_regime_descriptor(const SpectralProfile& profile, const Matrix& h,
                                      const std::optional<Matrix>& chain_basis) {
  if (!(profile.rho > 0.0)) throw RegimeError("slow_regime_descriptor: rho must be positive");
  if (profile.rho >= 0.5) throw RegimeError("slow_regime_descriptor: regime is not slow (rho >= 1/2)");
  return layer_descriptor(profile, h, profile.rho, chain_basis);
}

double as_rate(const SpectralProfile& profile) {
  if (!(profile.rho > 0.0)) throw InvalidArgument("as_rate: rho must be positive");
  return std::min(0.5, profile.rho);
}

AsymptoticReport analyze(const Matrix& dh, const Matrix& gamma, const AnalysisOptions& opt) {
  AsymptoticReport rep;
  rep.profile = spectral_profile(dh);
  rep.regime = classify_regime(rep.profile, opt.rho_tol);
  rep.as_rate_exponent = as_rate(rep.profile);
  switch (rep.regime.tag) {
    case RegimeTag::Standard: rep.covariance = clt_covariance(dh, gamma); break;
    case RegimeTag::Critical:
      rep.covariance = critical_covariance(dh, gamma, opt.chain_basis, opt.rho_tol);
      break;
    case RegimeTag::Slow: rep.slow = slow_regime_descriptor(rep.profile, dh, opt.chain_basis); break;
  }
  return rep;
}

}  // namespace urnlab
