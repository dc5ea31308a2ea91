#include "urnlab/sa_engine.hpp"

#include <algorithm>
#include <cmath>

#include "urnlab/digest.hpp"
#include "urnlab/errors.hpp"
#include "urnlab/format.hpp"
#include "urnlab/quadrature.hpp"

namespace urnlab {

namespace {

inline void sa_update(Row& theta, const Row& h, const Row& dm, const Row& r, double np1) {
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    theta(i) = theta(i) - h(i) / np1 + (dm(i) + r(i)) / np1;
  }
}

void check_plan(const std::vector<std::uint64_t>& plan, std::uint64_t n_max) {
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (plan[i] > n_max) throw InvalidArgument("checkpoint beyond n_max");
    if (i > 0 && plan[i] <= plan[i - 1]) throw InvalidArgument("checkpoints must be strictly increasing");
  }
}

}  // namespace

void validate_spec(const SAProcessSpec& spec) {
  if (spec.dim < 1) throw InvalidArgument("SAProcessSpec: dim must be positive");
  if (!spec.drift) throw InvalidArgument("SAProcessSpec: drift is required");
  if (spec.theta0.size() != spec.dim) throw InvalidArgument("SAProcessSpec: theta0 dimension mismatch");
  require_finite(spec.theta0, "SAProcessSpec.theta0");
  if (spec.theta_star) {
    if (spec.theta_star->size() != spec.dim) throw InvalidArgument("SAProcessSpec: theta_star dimension mismatch");
    Row h(spec.dim);
    spec.drift(*spec.theta_star, h);
    if (h.cwiseAbs().maxCoeff() > 1e-12) {
      throw InvalidArgument("SAProcessSpec: drift does not vanish at theta_star");
    }
  }
}

std::vector<std::uint64_t> dyadic_checkpoints(std::uint64_t from, std::uint64_t n_max) {
  std::vector<std::uint64_t> out;
  if (from < 1) from = 1;
  for (std::uint64_t n = from; n <= n_max; n *= 2) {
    out.push_back(n);
    if (n > n_max / 2) break;
  }
  return out;
}

Trajectory run_sa(const SAProcessSpec& spec, std::uint64_t n_max, std::uint64_t seed,
                  const std::vector<std::uint64_t>& plan, bool record_increments, std::uint64_t stream) {
  validate_spec(spec);
  if (n_max < 1) throw InvalidArgument("run_sa: n_max must be at least 1");
  check_plan(plan, n_max);
  Trajectory out;
  out.seed = seed;
  out.stream = stream;
  out.spec_digest = fnv1a64_hex(spec.description);
  if (record_increments) out.increments.emplace();

  StreamRng rng(seed, stream);
  const int d = spec.dim;
  Row theta = spec.theta0;
  Row h = Row::Zero(d), dm = Row::Zero(d), r = Row::Zero(d);
  std::size_t next = 0;
  if (next < plan.size() && plan[next] == 0) out.checkpoints.push_back({0, theta}), ++next;
  for (std::uint64_t n = 0; n < n_max; ++n) {
    const std::uint64_t np1 = n + 1;
    spec.drift(theta, h);
    if (spec.noise) spec.noise(rng, np1, theta, dm);
    if (spec.remainder) spec.remainder(np1, r);
    sa_update(theta, h, dm, r, static_cast<double>(np1));
    if (!theta.allFinite()) throw DivergenceError("run_sa: non-finite state", np1);
    if (record_increments) {
      out.increments->dM.push_back(dm);
      out.increments->r.push_back(r);
    }
    if (next < plan.size() && plan[next] == np1) out.checkpoints.push_back({np1, theta}), ++next;
  }
  return out;
}

std::vector<Checkpoint> replay(const SAProcessSpec& spec, const Trajectory& traj) {
  if (!traj.increments) throw InvalidArgument("replay: trajectory has no recorded increments");
  const auto& inc = *traj.increments;
  std::vector<Checkpoint> out;
  Row theta = spec.theta0;
  Row h = Row::Zero(spec.dim);
  std::size_t next = 0;
  const auto& cps = traj.checkpoints;
  if (next < cps.size() && cps[next].n == 0) out.push_back({0, theta}), ++next;
  for (std::size_t k = 0; k < inc.dM.size(); ++k) {
    spec.drift(theta, h);
    sa_update(theta, h, inc.dM[k], inc.r[k], static_cast<double>(k + 1));
    if (next < cps.size() && cps[next].n == k + 1) out.push_back({k + 1, theta}), ++next;
  }
  return out;
}

std::vector<Checkpoint> normalized_error(const std::vector<Checkpoint>& cps, const Row& theta_star,
                                         const Regime& regime, int nu) {
  Regime r = regime;
  r.nu = nu;
  const bool logs = r.tag == RegimeTag::Critical || (r.tag == RegimeTag::Slow && nu > 1);
  std::vector<Checkpoint> out;
  out.reserve(cps.size());
  for (const auto& c : cps) {
    if (c.value.size() != theta_star.size()) throw InvalidArgument("normalized_error: dimension mismatch");
    if (logs && c.n < 3) throw InvalidArgument("normalized_error: log scalings need n >= 3");
    out.push_back({c.n, (c.value - theta_star) * scale_factor(r, static_cast<double>(c.n))});
  }
  return out;
}

std::vector<Checkpoint> normalized_error(const Trajectory& traj, const Row& theta_star, const Regime& regime,
                                         int nu) {
  return normalized_error(traj.checkpoints, theta_star, regime, nu);
}

std::vector<Checkpoint> exact_mean_recursion(const Matrix& a, const RemainderFn& remainder, const Row& theta0,
                                             std::uint64_t n_max, const std::vector<std::uint64_t>& plan) {
  require_square_finite(a, "exact_mean_recursion(A)");
  if (theta0.size() != a.rows()) throw InvalidArgument("exact_mean_recursion: theta0 dimension mismatch");
  check_plan(plan, n_max);
  const Eigen::Index d = a.rows();
  Row m = theta0;
  Row h = Row::Zero(d), zero = Row::Zero(d), r = Row::Zero(d);
  std::vector<Checkpoint> out;
  std::size_t next = 0;
  if (next < plan.size() && plan[next] == 0) out.push_back({0, m}), ++next;
  for (std::uint64_t n = 0; n < n_max; ++n) {
    const std::uint64_t np1 = n + 1;
    h.noalias() = m * a;
    if (remainder) remainder(np1, r);
    sa_update(m, h, zero, r, static_cast<double>(np1));
    if (next < plan.size() && plan[next] == np1) out.push_back({np1, m}), ++next;
  }
  return out;
}

std::string trajectory_csv(const std::vector<Checkpoint>& cps, const std::string& index_name,
                           const std::string& value_prefix) {
  std::string s = index_name;
  const Eigen::Index d = cps.empty() ? 0 : cps.front().value.size();
  for (Eigen::Index i = 0; i < d; ++i) s += "," + value_prefix + std::to_string(i + 1);
  s += "\n";
  for (const auto& c : cps) {
    s += std::to_string(c.n);
    for (Eigen::Index i = 0; i < c.value.size(); ++i) s += "," + fmt17(c.value(i));
    s += "\n";
  }
  return s;
}

DriftFn linear_drift(const Matrix& a, const Row& theta_star) {
  require_square_finite(a, "linear_drift");
  if (theta_star.size() != a.rows()) throw InvalidArgument("linear_drift: theta_star dimension mismatch");
  return [a, theta_star](const Row& theta, Row& out) {
    const Eigen::Index d = a.rows();
    for (Eigen::Index j = 0; j < d; ++j) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) acc += (theta(i) - theta_star(i)) * a(i, j);
      out(j) = acc;
    }
  };
}

NoiseFn gaussian_noise(const Matrix& gamma) {
  require_symmetric_psd(gamma, 1e-10, "gaussian_noise(Gamma)");
  const Matrix root = psd_root(gamma);
  const Eigen::Index d = gamma.rows();
  using Small = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor, 1, 16>;
  return [root, d](StreamRng& rng, std::uint64_t, const Row&, Row& out) {
    if (d <= 16) {
      Small z(d);
      for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.gaussian();
      out.noalias() = z * root;
    } else {
      Row z(d);
      for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.gaussian();
      out.noalias() = z * root;
    }
  };
}

RemainderFn remainder_schedule(const std::string& kind, const Row& direction) {
  if (kind == "zero") {
    return [d = direction.size()](std::uint64_t, Row& out) { out.setZero(d); };
  }
  if (kind == "inv_sqrt_sqrtlog") {
    return [direction](std::uint64_t n, Row& out) {
      const double x = static_cast<double>(n);
      const double s = n >= 2 ? 1.0 / (std::sqrt(x) * std::sqrt(std::log(x))) : 0.0;
      out = s * direction;
    };
  }
  if (kind == "inv_sqrt_loglog") {
    return [direction](std::uint64_t n, Row& out) {
      const double x = static_cast<double>(n);
      const double s = n >= 3 ? 1.0 / (std::sqrt(x) * std::log(std::log(x))) : 0.0;
      out = s * direction;
    };
  }
  throw InvalidArgument("unknown remainder schedule '" + kind + "'");
}

double inv_loglog_integral(double theta, double theta0) {
  static const GaussRule rule = gauss_laguerre(48);
  auto below = [](double x) {
    if (x <= 0.0) return 0.0;
    const double L = -std::log(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] / std::log(L + rule.nodes[i]);
    return x * acc;
  };
  if (theta <= theta0) return below(theta);
  return below(theta0) + (theta - theta0) / std::log(std::log(1.0 / theta0));
}

DriftFn rate_example_drift(double rho, const std::string& f_kind, double theta0) {
  if (!(rho > 0.0)) throw InvalidArgument("rate_example_drift: rho must be positive");
  if (f_kind == "zero") {
    return [rho](const Row& theta, Row& out) { out.resize(1), out(0) = rho * theta(0); };
  }
  if (f_kind == "inv_loglog") {
    if (!(theta0 > 0.0) || !(theta0 < std::exp(-std::exp(1.0)))) {
      throw InvalidArgument("rate_example_drift: theta0 must lie in (0, exp(-e))");
    }
    return [rho, theta0](const Row& theta, Row& out) {
      out.resize(1);
      const double x = theta(0);
      out(0) = x <= 0.0 ? rho * x : rho * (x - inv_loglog_integral(x, theta0));
    };
  }
  throw InvalidArgument("unknown rate example f '" + f_kind + "'");
}

}  // namespace urnlab
