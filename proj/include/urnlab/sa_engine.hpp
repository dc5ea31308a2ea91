#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "urnlab/asymptotics.hpp"
#include "urnlab/matrix_core.hpp"
#include "urnlab/rng.hpp"

namespace urnlab {

using DriftFn = std::function<void(const Row& theta, Row& out)>;
using NoiseFn = std::function<void(StreamRng& rng, std::uint64_t n, const Row& theta, Row& out)>;
using RemainderFn = std::function<void(std::uint64_t n, Row& out)>;

struct SAProcessSpec {
  int dim = 0;
  DriftFn drift;
  NoiseFn noise;          // empty: no noise
  RemainderFn remainder;  // empty: r_n = 0
  Row theta0;
  std::optional<Row> theta_star;
  std::string description;  // canonical text hashed into Trajectory::spec_digest
};

/// Checks dimensions and, when theta_star is given, that the drift vanishes there.
void validate_spec(const SAProcessSpec& spec);

struct Checkpoint {
  std::uint64_t n = 0;
  Row value;
};

struct Increments {
  std::vector<Row> dM;  // dM[k] is Delta M_{k+1}
  std::vector<Row> r;
};

struct Trajectory {
  std::vector<Checkpoint> checkpoints;
  std::optional<Increments> increments;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string spec_digest;
};

std::vector<std::uint64_t> dyadic_checkpoints(std::uint64_t from, std::uint64_t n_max);

Trajectory run_sa(const SAProcessSpec& spec, std::uint64_t n_max, std::uint64_t seed,
                  const std::vector<std::uint64_t>& checkpoint_plan, bool record_increments = false,
                  std::uint64_t stream = 0);

/// Re-applies the recursion with the recorded increments.
std::vector<Checkpoint> replay(const SAProcessSpec& spec, const Trajectory& traj);

std::vector<Checkpoint> normalized_error(const Trajectory& traj, const Row& theta_star, const Regime& regime,
                                         int nu);
std::vector<Checkpoint> normalized_error(const std::vector<Checkpoint>& cps, const Row& theta_star,
                                         const Regime& regime, int nu);

std::vector<Checkpoint> exact_mean_recursion(const Matrix& a, const RemainderFn& remainder, const Row& theta0,
                                             std::uint64_t n_max,
                                             const std::vector<std::uint64_t>& checkpoint_plan);

std::string trajectory_csv(const std::vector<Checkpoint>& cps, const std::string& index_name,
                           const std::string& value_prefix);

// Builtins.
DriftFn linear_drift(const Matrix& a, const Row& theta_star);
NoiseFn gaussian_noise(const Matrix& gamma);
RemainderFn remainder_schedule(const std::string& kind, const Row& direction);

/// Scalar drift rho * int_0^theta (1 - f(x)) dx with f = 0 ("zero") or
/// f(x) = 1/loglog(1/(x ^ theta0)) ("inv_loglog").
DriftFn rate_example_drift(double rho, const std::string& f_kind, double theta0);
double inv_loglog_integral(double theta, double theta0);

}  // namespace urnlab
