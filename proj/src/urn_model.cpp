#include "urnlab/urn_model.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "urnlab/digest.hpp"
#include "urnlab/errors.hpp"
#include "urnlab/format.hpp"

namespace urnlab {

namespace {

void require_dim(const Matrix& m, int d, std::string_view what) {
  require_square_finite(m, what);
  if (m.rows() != d) throw InvalidArgument(std::string(what) + ": dimension mismatch");
}

void draw_probabilities_into(const Row& y, Row& p) {
  const Eigen::Index d = y.size();
  double tot = 0.0;
  Eigen::Index last = -1;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (y(k) > 0.0) {
      tot += y(k);
      last = k;
    }
  }
  if (last < 0) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k + 1 < d; ++k) acc += (p(k) = 1.0 / static_cast<double>(d));
    p(d - 1) = 1.0 - acc;
    return;
  }
  double acc = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    p(k) = y(k) > 0.0 ? y(k) / tot : 0.0;
    if (k != last) acc += p(k);
  }
  p(last) = 1.0 - acc;
}

int sample_index(const Row& p, double u) {
  const Eigen::Index d = p.size();
  double acc = 0.0;
  Eigen::Index last = 0;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (p(k) <= 0.0) continue;
    last = k;
    acc += p(k);
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(last);
}

Matrix ones_v(const Row& v) { return Col::Ones(v.size()) * v; }

}  // namespace

AddingRule deterministic_rule(const Matrix& d) {
  require_square_finite(d, "deterministic_rule");
  AddingRule r;
  r.name = "deterministic";
  r.mean = d;
  r.Vq = std::vector<Matrix>(d.rows(), Matrix::Zero(d.rows(), d.rows()));
  r.sample_row = [d](StreamRng&, std::uint64_t, int k, const Row&, Row& out) { out = d.row(k); };
  return r;
}

AddingRule multinomial_rule(const Matrix& p, double scale) {
  require_square_finite(p, "multinomial_rule");
  for (Eigen::Index k = 0; k < p.rows(); ++k) {
    if (p.row(k).minCoeff() < 0.0 || std::abs(p.row(k).sum() - 1.0) > 1e-12) {
      throw InvalidArgument("multinomial_rule: each row must be a probability vector");
    }
  }
  if (!std::isfinite(scale)) throw InvalidArgument("multinomial_rule: scale must be finite");
  AddingRule r;
  r.name = "multinomial";
  r.mean = scale * p;
  std::vector<Matrix> vq;
  for (Eigen::Index q = 0; q < p.rows(); ++q) {
    const Row pq = p.row(q);
    Matrix m = pq.asDiagonal();
    m -= pq.transpose() * pq;
    vq.push_back(scale * scale * m);
  }
  r.Vq = vq;
  r.sample_row = [p, scale](StreamRng& rng, std::uint64_t, int k, const Row&, Row& out) {
    out.setZero(p.cols());
    out(sample_index(p.row(k), rng.uniform())) = scale;
  };
  return r;
}

AddingRule bernoulli_rule(const Matrix& s, const Matrix& p) {
  require_square_finite(s, "bernoulli_rule(scale)");
  require_square_finite(p, "bernoulli_rule(prob)");
  if (s.rows() != p.rows()) throw InvalidArgument("bernoulli_rule: dimension mismatch");
  if (p.minCoeff() < 0.0 || p.maxCoeff() > 1.0) throw InvalidArgument("bernoulli_rule: probabilities outside [0,1]");
  AddingRule r;
  r.name = "bernoulli";
  r.mean = s.cwiseProduct(p);
  std::vector<Matrix> vq;
  for (Eigen::Index q = 0; q < p.rows(); ++q) {
    Matrix m = Matrix::Zero(p.rows(), p.rows());
    for (Eigen::Index j = 0; j < p.cols(); ++j) m(j, j) = s(q, j) * s(q, j) * p(q, j) * (1.0 - p(q, j));
    vq.push_back(m);
  }
  r.Vq = vq;
  r.sample_row = [s, p](StreamRng& rng, std::uint64_t, int k, const Row&, Row& out) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) out(j) = rng.bernoulli(p(k, j)) ? s(k, j) : 0.0;
  };
  return r;
}

AddingRule removal_rule(const Matrix& h, double p_remove) {
  require_square_finite(h, "removal_rule");
  if (!(p_remove >= 0.0 && p_remove < 1.0)) throw InvalidArgument("removal_rule: p_remove must lie in [0,1)");
  AddingRule r;
  r.name = "removal";
  r.mean = h;
  std::vector<Matrix> vq;
  Row keep(h.rows());
  for (Eigen::Index q = 0; q < h.rows(); ++q) {
    keep(q) = (h(q, q) + p_remove) / (1.0 - p_remove);
    Matrix m = Matrix::Zero(h.rows(), h.rows());
    m(q, q) = p_remove * (1.0 - p_remove) * (keep(q) + 1.0) * (keep(q) + 1.0);
    vq.push_back(m);
  }
  r.Vq = vq;
  r.sample_row = [h, keep, p_remove](StreamRng& rng, std::uint64_t, int k, const Row&, Row& out) {
    out = h.row(k);
    out(k) = rng.bernoulli(p_remove) ? -1.0 : keep(k);
  };
  return r;
}

void validate_urn(const UrnSpec& spec) {
  if (spec.d < 1) throw InvalidArgument("UrnSpec: d must be positive");
  if (spec.Y0.size() != spec.d) throw InvalidArgument("UrnSpec: Y0 dimension mismatch");
  require_finite(spec.Y0, "UrnSpec.Y0");
  if (!spec.rule.sample_row) throw InvalidArgument("UrnSpec: adding rule has no sampler");
  require_dim(spec.rule.mean, spec.d, "UrnSpec: generating matrix");
  if (spec.Vq) {
    if (static_cast<int>(spec.Vq->size()) != spec.d) throw InvalidArgument("UrnSpec: need one V_q per type");
    for (const auto& m : *spec.Vq) {
      require_dim(m, spec.d, "UrnSpec: V_q");
      require_symmetric_psd(m, 1e-10, "UrnSpec: V_q");
    }
  }
}

Row draw_probabilities(const Row& y) {
  if (y.size() == 0) throw InvalidArgument("draw_probabilities: empty composition");
  require_finite(y, "draw_probabilities");
  Row p(y.size());
  draw_probabilities_into(y, p);
  return p;
}

UrnTrajectory run_urn(const UrnSpec& spec, std::uint64_t n_max, std::uint64_t seed,
                      const std::vector<std::uint64_t>& checkpoints, bool record, std::uint64_t stream) {
  validate_urn(spec);
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] > n_max) throw InvalidArgument("run_urn: checkpoint beyond n_max");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
      throw InvalidArgument("run_urn: checkpoints must be strictly increasing");
    }
  }
  UrnTrajectory out;
  out.seed = seed;
  out.stream = stream;
  out.spec_digest = fnv1a64_hex(spec.description);
  if (record) out.record.emplace();
  StreamRng rng(seed, stream);
  const int d = spec.d;
  Row y = spec.Y0;
  Row nn = Row::Zero(d);
  Row p(d), row(d);
  std::size_t next = 0;
  if (next < checkpoints.size() && checkpoints[next] == 0) out.checkpoints.push_back({0, y, nn}), ++next;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    draw_probabilities_into(y, p);
    const int k = sample_index(p, rng.uniform());
    spec.rule.sample_row(rng, n, k, y, row);
    y += row;
    nn(k) += 1.0;
    if (!y.allFinite()) throw DivergenceError("run_urn: non-finite composition", n);
    if (record) {
      out.record->draws.push_back(k);
      out.record->rows.push_back(row);
    }
    if (next < checkpoints.size() && checkpoints[next] == n) out.checkpoints.push_back({n, y, nn}), ++next;
  }
  return out;
}

std::vector<UrnCheckpoint> replay_urn(const UrnSpec& spec, const UrnTrajectory& traj) {
  if (!traj.record) throw InvalidArgument("replay_urn: no recorded draws");
  std::vector<UrnCheckpoint> out;
  Row y = spec.Y0;
  Row nn = Row::Zero(spec.d);
  std::size_t next = 0;
  const auto& cps = traj.checkpoints;
  if (next < cps.size() && cps[next].n == 0) out.push_back({0, y, nn}), ++next;
  for (std::size_t m = 0; m < traj.record->draws.size(); ++m) {
    y += traj.record->rows[m];
    nn(traj.record->draws[m]) += 1.0;
    if (next < cps.size() && cps[next].n == m + 1) out.push_back({m + 1, y, nn}), ++next;
  }
  return out;
}

std::string urn_csv(const std::vector<UrnCheckpoint>& cps) {
  const Eigen::Index d = cps.empty() ? 0 : cps.front().Y.size();
  std::string s = "n";
  for (Eigen::Index i = 0; i < d; ++i) s += ",Y_" + std::to_string(i + 1);
  for (Eigen::Index i = 0; i < d; ++i) s += ",N_" + std::to_string(i + 1);
  s += "\n";
  for (const auto& c : cps) {
    s += std::to_string(c.n);
    for (Eigen::Index i = 0; i < d; ++i) s += "," + fmt17(c.Y(i));
    for (Eigen::Index i = 0; i < d; ++i) s += "," + fmt17(c.N(i));
    s += "\n";
  }
  return s;
}

UrnEigen urn_eigenstructure(const Matrix& h) {
  require_square_finite(h, "urn_eigenstructure");
  const Eigen::Index d = h.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i != j && h(i, j) < 0.0) {
        throw AssumptionViolation("urn_eigenstructure: negative off-diagonal entry H(" + std::to_string(i) +
                                  "," + std::to_string(j) + ")");
      }
    }
  }
  const SpectralProfile raw = spectral_profile(h);
  const SpectralGroup& top = raw.groups.front();
  const double scale = std::max(1.0, std::abs(top.lambda));
  if (top.multiplicity != 1 || std::abs(top.lambda.imag()) > 1e-9 * scale) {
    throw AssumptionViolation("urn_eigenstructure: largest eigenvalue " + format_complex(top.lambda) +
                              " is not simple (multiplicity " + std::to_string(top.multiplicity) + ")");
  }
  if (raw.groups.size() > 1 && raw.groups[1].lambda.real() >= top.lambda.real() - 1e-7 * scale) {
    throw AssumptionViolation("urn_eigenstructure: largest eigenvalue is not strictly largest in real part");
  }
  UrnEigen e;
  e.alpha = top.lambda.real();
  if (!(e.alpha > 0.0)) throw AssumptionViolation("urn_eigenstructure: largest eigenvalue is not positive");
  e.H = h / e.alpha;
  const Matrix shifted = e.H - Matrix::Identity(d, d);
  Eigen::JacobiSVD<Matrix> sl(shifted.transpose(), Eigen::ComputeFullV);
  Eigen::JacobiSVD<Matrix> sr(shifted, Eigen::ComputeFullV);
  Row v = sl.matrixV().col(d - 1).transpose();
  Col u = sr.matrixV().col(d - 1);
  v /= v.sum();
  u /= v.dot(u.transpose());
  const double vmax = v.cwiseAbs().maxCoeff(), umax = u.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < d; ++k) {
    if (!(v(k) > 1e-12 * vmax)) throw AssumptionViolation("urn_eigenstructure: v has a non-positive entry");
    if (!(u(k) > 1e-12 * umax)) throw AssumptionViolation("urn_eigenstructure: u has a non-positive entry");
  }
  e.v = v;
  e.u = u;
  e.profile = spectral_profile(e.H);
  e.lambda_sec = e.profile.lambda_sec;
  e.nu = 1;
  if (e.lambda_sec) {
    for (const SpectralGroup* g : layer_groups(e.profile, *e.lambda_sec)) e.nu = std::max(e.nu, g->max_block());
  }
  return e;
}

UrnEmbedding urn_embedding(const Matrix& h, const Row& v, const std::vector<Matrix>& vq) {
  require_square_finite(h, "urn_embedding(H)");
  const Eigen::Index d = h.rows();
  if (v.size() != d) throw InvalidArgument("urn_embedding: v dimension mismatch");
  if (static_cast<Eigen::Index>(vq.size()) != d) throw InvalidArgument("urn_embedding: need one V_q per type");
  const Matrix id = Matrix::Identity(d, d);
  const Matrix ov = ones_v(v);
  UrnEmbedding e;
  e.Dh_star = Matrix::Zero(2 * d, 2 * d);
  e.Dh_star.topLeftCorner(d, d) = id - (h - ov);
  e.Dh_star.topRightCorner(d, d) = -(id - ov);
  e.Dh_star.bottomRightCorner(d, d) = id;
  e.Sigma1 = Matrix(v.asDiagonal()) - v.transpose() * v;
  e.Sigma2 = Matrix::Zero(d, d);
  for (Eigen::Index q = 0; q < d; ++q) {
    if (vq[q].rows() != d || vq[q].cols() != d) throw InvalidArgument("urn_embedding: V_q dimension mismatch");
    require_symmetric_psd(vq[q], 1e-10, "urn_embedding: V_" + std::to_string(q + 1));
    e.Sigma2 += v(q) * vq[q];
  }
  e.Gamma = Matrix::Zero(2 * d, 2 * d);
  e.Gamma.topLeftCorner(d, d) = h.transpose() * e.Sigma1 * h + e.Sigma2;
  e.Gamma.topRightCorner(d, d) = h.transpose() * e.Sigma1;
  e.Gamma.bottomLeftCorner(d, d) = e.Sigma1 * h;
  e.Gamma.bottomRightCorner(d, d) = e.Sigma1;
  e.Gamma = 0.5 * (e.Gamma + e.Gamma.transpose()).eval();
  require_symmetric_psd(e.Gamma, 1e-10, "urn_embedding: Gamma");
  return e;
}

std::vector<Matrix> estimate_Vq(const UrnSpec& spec, std::uint64_t samples, std::uint64_t seed) {
  if (samples < 2) throw InvalidArgument("estimate_Vq: need at least two samples");
  if (spec.d < 1 || !spec.rule.sample_row) throw InvalidArgument("estimate_Vq: invalid urn spec");
  const int d = spec.d;
  std::vector<Matrix> out;
  Row row(d);
  for (int q = 0; q < d; ++q) {
    StreamRng rng(seed, static_cast<std::uint64_t>(q));
    Matrix draws(samples, d);
    for (std::uint64_t s = 0; s < samples; ++s) {
      spec.rule.sample_row(rng, s + 1, q, spec.Y0, row);
      draws.row(static_cast<Eigen::Index>(s)) = row;
    }
    const Row mean = draws.colwise().mean();
    const Matrix c = draws.rowwise() - mean;
    Matrix cov = c.transpose() * c / static_cast<double>(samples - 1);
    out.push_back(0.5 * (cov + cov.transpose()));
  }
  return out;
}

UrnAsymptotics urn_asymptotics(const UrnSpec& spec, const UrnAnalysisOptions& opt) {
  validate_urn(spec);
  UrnAsymptotics out;
  out.eig = urn_eigenstructure(spec.rule.mean);
  const UrnEigen& e = out.eig;
  if (spec.Vq) {
    out.Vq = *spec.Vq;
  } else if (!spec.estimate_vq && spec.rule.Vq) {
    out.Vq = *spec.rule.Vq;
  } else {
    out.Vq = estimate_Vq(spec, spec.vq_samples, spec.vq_seed);
  }
  for (auto& m : out.Vq) m /= e.alpha * e.alpha;
  if (e.lambda_sec && *e.lambda_sec >= 1.0) {
    throw AssumptionViolation("urn_asymptotics: lambda_sec >= 1");
  }
  out.embedding = urn_embedding(e.H, e.v, out.Vq);
  const double rho = e.lambda_sec ? std::min(1.0, 1.0 - *e.lambda_sec) : 1.0;
  out.regime = regime_for(rho, e.nu, opt.rho_tol);
  switch (out.regime.tag) {
    case RegimeTag::Standard:
      out.Sigma_tilde = clt_covariance(out.embedding.Dh_star, out.embedding.Gamma);
      break;
    case RegimeTag::Critical:
      out.Sigma_tilde =
          critical_covariance(out.embedding.Dh_star, out.embedding.Gamma, opt.chain_basis, opt.rho_tol);
      break;
    case RegimeTag::Slow: {
      const SlowDescriptor sd = layer_descriptor(e.profile, e.H, *e.lambda_sec);
      const Eigen::Index d = e.H.rows();
      const CMatrix proj = (Matrix::Identity(d, d) - ones_v(e.v)).cast<cplx>();
      for (const auto& c : sd.components) {
        UrnSlowComponent uc;
        uc.lambda = c.lambda;
        uc.frequency = c.frequency;
        uc.left = c.direction;
        uc.direction = c.direction * proj;
        out.slow_components.push_back(uc);
      }
      break;
    }
  }
  return out;
}

}  // namespace urnlab
