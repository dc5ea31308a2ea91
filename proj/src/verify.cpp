#include "urnlab/verify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "urnlab/errors.hpp"

namespace urnlab {

MCSamples run_replicates(const ReplicateFn& fn, const MCConfig& cfg) {
  if (cfg.replicates < 1) throw InvalidArgument("run_replicates: need at least one replicate");
  if (cfg.horizons.empty()) throw InvalidArgument("run_replicates: need at least one horizon");
  const std::uint64_t R = cfg.replicates;
  std::vector<std::vector<Row>> rows(R);
  std::vector<char> diverged(R, 0);
  std::atomic<std::uint64_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_err;
  std::uint64_t first_err_index = R;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= R) return;
      try {
        rows[i] = fn(i);
        if (rows[i].size() != cfg.horizons.size()) throw InvalidArgument("replicate returned wrong horizon count");
      } catch (const DivergenceError&) {
        diverged[i] = 1;
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (i < first_err_index) {
          first_err_index = i;
          first_err = std::current_exception();
        }
      }
    }
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(R)));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_err) std::rethrow_exception(first_err);

  MCSamples out;
  out.horizons = cfg.horizons;
  for (std::uint64_t i = 0; i < R; ++i) {
    if (diverged[i]) out.excluded.push_back(i);
  }
  if (out.excluded.size() * 100 > R) {
    throw DivergenceError("run_replicates: " + std::to_string(out.excluded.size()) + " of " + std::to_string(R) +
                              " replicates diverged (more than 1%)",
                          out.excluded.front());
  }
  out.included = R - out.excluded.size();
  const Eigen::Index d = out.included ? rows[std::distance(diverged.begin(),
                                                          std::find(diverged.begin(), diverged.end(), 0))][0]
                                            .size()
                                      : 0;
  for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
    Matrix m(static_cast<Eigen::Index>(out.included), d);
    Eigen::Index r = 0;
    for (std::uint64_t i = 0; i < R; ++i) {
      if (!diverged[i]) m.row(r++) = rows[i][h];
    }
    out.scaled.push_back(std::move(m));
  }
  return out;
}

MCSamples mc_sample(const SAProcessSpec& spec, const Regime& regime, const MCConfig& cfg) {
  if (!spec.theta_star) throw InvalidArgument("mc_sample: theta_star is required");
  validate_spec(spec);
  std::vector<std::uint64_t> plan = cfg.horizons;
  if (!std::is_sorted(plan.begin(), plan.end())) throw InvalidArgument("mc_sample: horizons must be increasing");
  const std::uint64_t n_max = plan.back();
  const Row star = *spec.theta_star;
  auto fn = [&](std::uint64_t i) {
    const Trajectory tr = run_sa(spec, n_max, cfg.seed, plan, false, i);
    std::vector<Row> out;
    for (const auto& c : normalized_error(tr, star, regime, regime.nu)) out.push_back(c.value);
    return out;
  };
  return run_replicates(fn, cfg);
}

MCSamples mc_sample(const UrnSpec& spec, const UrnAsymptotics& asym, const MCConfig& cfg) {
  validate_urn(spec);
  std::vector<std::uint64_t> plan = cfg.horizons;
  if (!std::is_sorted(plan.begin(), plan.end())) throw InvalidArgument("mc_sample: horizons must be increasing");
  const std::uint64_t n_max = plan.back();
  const Row v = asym.eig.v;
  const double alpha = asym.eig.alpha;
  const Eigen::Index d = v.size();
  auto fn = [&](std::uint64_t i) {
    const UrnTrajectory tr = run_urn(spec, n_max, cfg.seed, plan, false, i);
    std::vector<Row> out;
    for (const auto& c : tr.checkpoints) {
      const double n = static_cast<double>(c.n);
      const double sc = scale_factor(asym.regime, n);
      Row r(2 * d);
      r.head(d) = (c.Y / (alpha * n) - v) * sc;
      r.tail(d) = (c.N / n - v) * sc;
      out.push_back(r);
    }
    return out;
  };
  return run_replicates(fn, cfg);
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

Row sample_mean(const Matrix& x) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (n < 1) throw InvalidArgument("sample_mean: no samples");
  Row m(d);
  std::vector<double> buf(n);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) buf[i] = x(i, j);
    m(j) = pairwise_sum(buf.data(), buf.size()) / static_cast<double>(n);
  }
  return m;
}

Matrix sample_covariance(const Matrix& x) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (n < 2) throw InvalidArgument("sample_covariance: need at least two samples");
  const Row m = sample_mean(x);
  Matrix c(d, d);
  std::vector<double> buf(n);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = j; k < d; ++k) {
      for (Eigen::Index i = 0; i < n; ++i) buf[i] = (x(i, j) - m(j)) * (x(i, k) - m(k));
      c(j, k) = c(k, j) = pairwise_sum(buf.data(), buf.size()) / static_cast<double>(n - 1);
    }
  }
  return c;
}

double compare_covariance(const Matrix& emp, const Matrix& pred) { return rel_frobenius(emp, pred, 1e-12); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double kolmogorov_q(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  double p;
  if (lambda < 1.18) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double m = 2.0 * k - 1.0;
      s += std::exp(-m * m * pi2 / (8.0 * lambda * lambda));
    }
    p = 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s;
  } else {
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      s += (k % 2 == 1 ? term : -term);
    }
    p = 2.0 * s;
  }
  return std::clamp(p, 0.0, 1.0);
}

KSResult ks_normal(const std::vector<double>& samples, double mu, double sigma2) {
  if (!(sigma2 > 0.0)) throw InvalidArgument("ks_normal: sigma2 must be positive");
  if (samples.empty()) throw InvalidArgument("ks_normal: no samples");
  std::vector<double> x = samples;
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  const double sd = std::sqrt(sigma2);
  double dmax = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = normal_cdf((x[i] - mu) / sd);
    dmax = std::max({dmax, (i + 1) / n - f, f - i / n});
  }
  return {dmax, kolmogorov_q(std::sqrt(n) * dmax)};
}

MCReport mc_report(const Matrix& scaled, const Matrix& predicted, std::uint64_t horizon, double cov_tol,
                   double ks_alpha, const std::optional<Row>& predicted_mean) {
  if (scaled.cols() != predicted.rows()) throw InvalidArgument("mc_report: dimension mismatch");
  MCReport r;
  r.horizon = horizon;
  r.empirical_mean = sample_mean(scaled);
  r.empirical_cov = sample_covariance(scaled);
  r.predicted_cov = predicted;
  r.rel_frobenius = compare_covariance(r.empirical_cov, predicted);
  r.cov_tol = cov_tol;
  r.ks_alpha = ks_alpha;
  r.included = static_cast<std::uint64_t>(scaled.rows());
  bool ok = r.rel_frobenius <= cov_tol;
  const double tr = std::max(predicted.trace(), 1e-300);
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    if (predicted(j, j) <= 1e-12 * tr) {
      r.ks.emplace_back();
      continue;
    }
    std::vector<double> col(scaled.rows());
    for (Eigen::Index i = 0; i < scaled.rows(); ++i) col[i] = scaled(i, j);
    const double mu = predicted_mean ? (*predicted_mean)(j) : 0.0;
    const KSResult k = ks_normal(col, mu, predicted(j, j));
    if (!(k.p_value > ks_alpha)) ok = false;
    r.ks.push_back(k);
  }
  r.pass = ok;
  return r;
}

namespace {

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

RateFit path_convergence(const std::vector<Checkpoint>& cps, double tol, bool relative) {
  if (cps.size() < 4) throw InvalidArgument("path_convergence: need at least four dyadic checkpoints");
  for (std::size_t i = 1; i < cps.size(); ++i) {
    if (cps[i].n != 2 * cps[i - 1].n || cps[i - 1].n == 0) {
      throw InvalidArgument("path_convergence: checkpoints must be consecutive dyadic indices");
    }
  }
  RateFit f;
  f.checkpoints = cps;
  f.tolerance = tol;
  f.relative = relative;
  std::vector<double> lx, ly;
  for (const auto& c : cps) {
    const double nv = c.value.norm();
    if (nv > 0.0) {
      lx.push_back(std::log(static_cast<double>(c.n)));
      ly.push_back(std::log(nv));
    }
  }
  f.fitted_exponent = lx.size() >= 2 ? ls_slope(lx, ly) : 0.0;
  const double ref = relative ? std::max(cps.back().value.norm(), 1e-300) : 1.0;
  std::vector<double> gx, gy;
  for (std::size_t i = 1; i < cps.size(); ++i) {
    const double g = (cps[i].value - cps[i - 1].value).norm() / ref;
    f.cauchy_gaps.push_back(g);
    if (g > 0.0) {
      gx.push_back(std::log(static_cast<double>(cps[i].n)));
      gy.push_back(std::log(g));
    }
  }
  const bool all_zero = gx.empty();
  if (all_zero) {
    f.gaps_decreasing = true;
  } else if (gx.size() >= 2) {
    f.gap_slope = ls_slope(gx, gy);
    f.gaps_decreasing = f.gap_slope < 0.0;
  } else {
    f.gaps_decreasing = f.cauchy_gaps.back() == 0.0;
  }
  f.converged = f.gaps_decreasing && f.cauchy_gaps.back() <= tol;
  return f;
}

namespace {

struct Fit2 {
  bool ok = false;
  double xi1 = 0.0, xi2 = 0.0, rms = 0.0;
};

Fit2 fit_rotation(const std::vector<std::pair<double, double>>& pts, double lambda) {
  Fit2 r;
  if (pts.size() < 2) return r;
  Matrix a(pts.size(), 2);
  Col b(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double ph = lambda * std::log(pts[i].first);
    a(i, 0) = std::numbers::sqrt2 * std::cos(ph);
    a(i, 1) = std::numbers::sqrt2 * std::sin(ph);
    b(i) = pts[i].second;
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(1) > 1e-10 * sv(0))) return r;
  const Col xi = svd.solve(b);
  r.ok = true;
  r.xi1 = xi(0);
  r.xi2 = xi(1);
  r.rms = std::sqrt((a * xi - b).squaredNorm() / static_cast<double>(pts.size()));
  return r;
}

}  // namespace

RotationFit rotation_fit(const std::vector<std::pair<double, double>>& pts, double lambda_im, int windows) {
  if (pts.size() < 8) throw InvalidArgument("rotation_fit: need at least 8 checkpoints");
  if (windows < 1) throw InvalidArgument("rotation_fit: need at least one window");
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& p : pts) {
    if (!(p.first >= 1.0)) throw InvalidArgument("rotation_fit: checkpoint indices must be >= 1");
    lo = std::min(lo, std::log(p.first));
    hi = std::max(hi, std::log(p.first));
  }
  if (hi - lo < 3.0 * std::log(10.0) - 1e-12) throw InvalidArgument("rotation_fit: checkpoints must span 3 decades");
  if (!fit_rotation(pts, lambda_im).ok) throw InvalidArgument("rotation_fit: degenerate design matrix");
  RotationFit out;
  const double width = (hi - lo) / windows;
  for (int w = 0; w < windows; ++w) {
    const double a = lo + w * width;
    const double b = w + 1 == windows ? hi : lo + (w + 1) * width;
    std::vector<std::pair<double, double>> sub;
    for (const auto& p : pts) {
      const double l = std::log(p.first);
      if (l >= a - 1e-12 && (l < b || (w + 1 == windows && l <= b + 1e-12))) sub.push_back(p);
    }
    const Fit2 f = fit_rotation(sub, lambda_im);
    if (!f.ok) throw InvalidArgument("rotation_fit: degenerate design matrix in window " + std::to_string(w));
    RotationWindow rw;
    rw.n_lo = std::exp(a);
    rw.n_hi = std::exp(b);
    rw.points = sub.size();
    rw.xi1 = f.xi1;
    rw.xi2 = f.xi2;
    rw.rms = f.rms;
    out.windows.push_back(rw);
    out.residual_trend.push_back(f.rms);
  }
  out.xi1 = out.windows.back().xi1;
  out.xi2 = out.windows.back().xi2;
  return out;
}

}  // namespace urnlab
