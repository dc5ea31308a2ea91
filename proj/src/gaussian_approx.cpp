#include "urnlab/gaussian_approx.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "urnlab/errors.hpp"
#include "urnlab/format.hpp"
#include "urnlab/quadrature.hpp"

namespace urnlab {

void validate_gauss(const GaussProcessSpec& spec) {
  require_square_finite(spec.H, "GaussProcessSpec.H");
  require_square_finite(spec.gamma_root, "GaussProcessSpec.gamma_root");
  const Eigen::Index d = spec.H.rows();
  if (spec.gamma_root.rows() != d) throw InvalidArgument("GaussProcessSpec: gamma_root dimension mismatch");
  if (spec.G1.size() != d) throw InvalidArgument("GaussProcessSpec: G1 dimension mismatch");
  require_finite(spec.G1, "GaussProcessSpec.G1");
  if (spec.grid.size() < 2 || spec.grid.front() != 1.0) {
    throw InvalidArgument("GaussProcessSpec: grid must start at t = 1 and have at least two points");
  }
  for (std::size_t k = 1; k < spec.grid.size(); ++k) {
    if (!(spec.grid[k] > spec.grid[k - 1]) || !std::isfinite(spec.grid[k])) {
      throw InvalidArgument("GaussProcessSpec: grid must be strictly increasing");
    }
  }
}

std::vector<double> log_uniform_grid(double t_max, int steps) {
  if (!(t_max > 1.0) || steps < 1) throw InvalidArgument("log_uniform_grid: need t_max > 1 and steps >= 1");
  std::vector<double> g(steps + 1);
  const double lt = std::log(t_max);
  for (int k = 0; k <= steps; ++k) g[k] = std::exp(lt * k / steps);
  g.front() = 1.0;
  g.back() = t_max;
  return g;
}

GaussStepLaw gauss_step_law(const GaussProcessSpec& spec) {
  validate_gauss(spec);
  const Eigen::Index d = spec.H.rows();
  const Matrix gamma = spec.gamma_root.transpose() * spec.gamma_root;
  const Matrix b = spec.H - 0.5 * Matrix::Identity(d, d);
  const double gnorm = gamma.norm();
  GaussStepLaw law;
  for (std::size_t k = 0; k + 1 < spec.grid.size(); ++k) {
    const double t0 = spec.grid[k], t1 = spec.grid[k + 1];
    const double ell = std::log(t1 / t0);
    law.propagators.push_back(mat_power(spec.H, t0 / t1));
    QuadratureOptions opt;
    opt.abs_tol = std::max(1e-11 * ell * gnorm, 1e-300);
    opt.initial_panels = 4;
    const Matrix c = gramian_integral(b, gamma, 0.0, ell, opt) / t1;
    law.increment_covs.push_back(c);
    Eigen::SelfAdjointEigenSolver<Matrix> es(c);
    Col lam = es.eigenvalues();
    const double mx = std::max(0.0, lam.maxCoeff());
    for (Eigen::Index i = 0; i < d; ++i) lam(i) = lam(i) <= 1e-12 * mx ? 0.0 : std::sqrt(lam(i));
    law.noise_factors.push_back(lam.asDiagonal() * es.eigenvectors().transpose());
  }
  return law;
}

std::vector<GaussPoint> simulate_with_law(const GaussProcessSpec& spec, const GaussStepLaw& law, StreamRng& rng) {
  const Eigen::Index d = spec.H.rows();
  std::vector<GaussPoint> path;
  path.reserve(spec.grid.size());
  Row g = spec.G1;
  Row z(d);
  path.push_back({spec.grid.front(), g});
  for (std::size_t k = 0; k < law.propagators.size(); ++k) {
    for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.gaussian();
    g = g * law.propagators[k] + z * law.noise_factors[k];
    path.push_back({spec.grid[k + 1], g});
  }
  return path;
}

std::vector<GaussPoint> simulate_gaussian_process(const GaussProcessSpec& spec, std::uint64_t seed,
                                                  std::uint64_t stream) {
  const GaussStepLaw law = gauss_step_law(spec);
  StreamRng rng(seed, stream);
  return simulate_with_law(spec, law, rng);
}

Matrix gaussian_variance(const Matrix& h, const Matrix& gamma, double t) {
  require_square_finite(h, "gaussian_variance(H)");
  require_symmetric_psd(gamma, 1e-10, "gaussian_variance(Gamma)");
  if (!(t >= 1.0) || !std::isfinite(t)) throw InvalidArgument("gaussian_variance: t must be >= 1");
  const Eigen::Index d = h.rows();
  if (t == 1.0) return Matrix::Zero(d, d);
  const Matrix b = h - 0.5 * Matrix::Identity(d, d);
  return gramian_integral(b, gamma, 0.0, std::log(t)) / t;
}

std::string gauss_csv(const std::vector<GaussPoint>& path) {
  const Eigen::Index d = path.empty() ? 0 : path.front().G.size();
  std::string s = "t";
  for (Eigen::Index i = 0; i < d; ++i) s += ",G_" + std::to_string(i + 1);
  s += "\n";
  for (const auto& p : path) {
    s += fmt17(p.t);
    for (Eigen::Index i = 0; i < d; ++i) s += "," + fmt17(p.G(i));
    s += "\n";
  }
  return s;
}

}  // namespace urnlab
