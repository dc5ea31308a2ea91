#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "urnlab/asymptotics.hpp"
#include "urnlab/matrix_core.hpp"
#include "urnlab/sa_engine.hpp"
#include "urnlab/urn_model.hpp"

namespace urnlab {

struct MCConfig {
  std::uint64_t replicates = 1000;
  std::vector<std::uint64_t> horizons;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // wall time only
};

struct MCSamples {
  std::vector<std::uint64_t> horizons;
  std::vector<Matrix> scaled;  // per horizon: included replicates x d, in replicate order
  std::uint64_t included = 0;
  std::vector<std::uint64_t> excluded;  // replicate indices quarantined for divergence
};

/// One row per horizon for replicate `index`; throw DivergenceError to quarantine it.
using ReplicateFn = std::function<std::vector<Row>(std::uint64_t index)>;

/// Runs replicates 0..R-1 in parallel; more than 1% divergent is a hard failure.
MCSamples run_replicates(const ReplicateFn& fn, const MCConfig& cfg);

/// Scaled errors of the SA recursion; stream index = replicate index.
MCSamples mc_sample(const SAProcessSpec& spec, const Regime& regime, const MCConfig& cfg);

/// Scaled errors of (Y_n/(alpha n) - v, N_n/n - v).
MCSamples mc_sample(const UrnSpec& spec, const UrnAsymptotics& asym, const MCConfig& cfg);

/// Summation by recursive halving.
double pairwise_sum(const double* x, std::size_t n);

Row sample_mean(const Matrix& x);
Matrix sample_covariance(const Matrix& x);

double compare_covariance(const Matrix& emp, const Matrix& pred);

struct KSResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

double normal_cdf(double z);
/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_q(double lambda);
KSResult ks_normal(const std::vector<double>& samples, double mu, double sigma2);

struct MCReport {
  std::uint64_t horizon = 0;
  Row empirical_mean;
  Matrix empirical_cov;
  Matrix predicted_cov;
  double rel_frobenius = 0.0;
  std::vector<std::optional<KSResult>> ks;  // empty entry: degenerate predicted marginal
  double cov_tol = 0.15;
  double ks_alpha = 0.005;
  std::uint64_t included = 0;
  std::uint64_t excluded = 0;
  bool pass = false;
};

MCReport mc_report(const Matrix& scaled, const Matrix& predicted, std::uint64_t horizon, double cov_tol,
                   double ks_alpha, const std::optional<Row>& predicted_mean = std::nullopt);

struct RateFit {
  std::vector<Checkpoint> checkpoints;
  double fitted_exponent = 0.0;
  std::vector<double> cauchy_gaps;
  double gap_slope = 0.0;
  bool gaps_decreasing = false;
  double tolerance = 0.0;
  bool relative = false;
  bool converged = false;
};

/// Checkpoints must sit at consecutive dyadic n (n_{i+1} = 2 n_i).
RateFit path_convergence(const std::vector<Checkpoint>& cps, double tol, bool relative = false);

struct RotationWindow {
  double n_lo = 0.0, n_hi = 0.0;
  std::size_t points = 0;
  double xi1 = 0.0, xi2 = 0.0;
  double rms = 0.0;
};

struct RotationFit {
  double xi1 = 0.0, xi2 = 0.0;  // fit on the last window
  std::vector<RotationWindow> windows;
  std::vector<double> residual_trend;
};

/// Least squares x_n ~ sqrt(2)[xi1 cos(lambda log n) + xi2 sin(lambda log n)] per log-n window.
RotationFit rotation_fit(const std::vector<std::pair<double, double>>& pts, double lambda_im, int windows = 3);

}  // namespace urnlab
