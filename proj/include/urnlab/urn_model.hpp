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

/// Row k of D_n given that type k was drawn at step n.
using RowSampler = std::function<void(StreamRng& rng, std::uint64_t n, int k, const Row& Y, Row& out)>;

struct AddingRule {
  std::string name;
  RowSampler sample_row;
  Matrix mean;                            // generating matrix H
  std::optional<std::vector<Matrix>> Vq;  // conditional covariance of row q, when known in closed form
};

AddingRule deterministic_rule(const Matrix& d);
/// Adds `scale` balls of one type, chosen from row k of P.
AddingRule multinomial_rule(const Matrix& p, double scale = 1.0);
/// Entry (k,j) is S_kj * Bernoulli(P_kj), independently.
AddingRule bernoulli_rule(const Matrix& s, const Matrix& p);
/// Off-diagonals deterministic; the diagonal is -1 with probability p_remove and
/// otherwise chosen so that the mean is H.
AddingRule removal_rule(const Matrix& h, double p_remove);

struct UrnSpec {
  int d = 0;
  Row Y0;
  AddingRule rule;
  std::optional<std::vector<Matrix>> Vq;  // overrides rule.Vq
  bool estimate_vq = false;
  std::uint64_t vq_samples = 200000;
  std::uint64_t vq_seed = 0;
  std::string description;
};

void validate_urn(const UrnSpec& spec);

/// p_k proportional to max(Y_k, 0); uniform when no entry is positive.
Row draw_probabilities(const Row& y);

struct UrnCheckpoint {
  std::uint64_t n = 0;
  Row Y;
  Row N;
};

struct UrnRecord {
  std::vector<int> draws;
  std::vector<Row> rows;
};

struct UrnTrajectory {
  std::vector<UrnCheckpoint> checkpoints;
  std::optional<UrnRecord> record;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string spec_digest;
};

UrnTrajectory run_urn(const UrnSpec& spec, std::uint64_t n_max, std::uint64_t seed,
                      const std::vector<std::uint64_t>& checkpoints, bool record = false,
                      std::uint64_t stream = 0);

/// Y_0 + sum of recorded X_m D_m, accumulated in draw order.
std::vector<UrnCheckpoint> replay_urn(const UrnSpec& spec, const UrnTrajectory& traj);

std::string urn_csv(const std::vector<UrnCheckpoint>& cps);

struct UrnEigen {
  double alpha = 1.0;
  Matrix H;  // rescaled so that alpha = 1
  Row v;
  Col u;
  std::optional<double> lambda_sec;
  int nu = 1;
  SpectralProfile profile;  // of the rescaled H
};

UrnEigen urn_eigenstructure(const Matrix& h);

struct UrnEmbedding {
  Matrix Dh_star;
  Matrix Gamma;
  Matrix Sigma1;
  Matrix Sigma2;
};

UrnEmbedding urn_embedding(const Matrix& h, const Row& v, const std::vector<Matrix>& vq);

struct UrnSlowComponent {
  cplx lambda;
  double frequency = 0.0;
  CRow left;       // l_a with l_a H = lambda_a l_a
  CRow direction;  // l_a (I - 1^t v)
};

struct UrnAsymptotics {
  UrnEigen eig;
  Regime regime;
  UrnEmbedding embedding;
  std::vector<Matrix> Vq;
  std::optional<Matrix> Sigma_tilde;
  std::vector<UrnSlowComponent> slow_components;
};

struct UrnAnalysisOptions {
  double rho_tol = 1e-9;
  std::optional<Matrix> chain_basis;  // for Dh_star in the critical case
};

UrnAsymptotics urn_asymptotics(const UrnSpec& spec, const UrnAnalysisOptions& opt = {});

std::vector<Matrix> estimate_Vq(const UrnSpec& spec, std::uint64_t samples, std::uint64_t seed);

}  // namespace urnlab
