#pragma once

#include <optional>
#include <string>
#include <vector>

#include "urnlab/matrix_core.hpp"

namespace urnlab {

struct SpectralGroup {
  cplx lambda;
  int multiplicity = 0;
  std::vector<int> block_sizes;  // descending
  int max_block() const { return block_sizes.empty() ? 0 : block_sizes.front(); }
};

struct SpectralProfile {
  int dim = 0;
  std::vector<SpectralGroup> groups;  // descending real part
  double rho = 0.0;
  int nu = 1;
  std::optional<double> lambda_sec;
  std::string warning;  // empty unless clustering or block accounting was ambiguous
};

struct ProfileOptions {
  double cluster_tol = 1e-7;
  double rank_tol = 1e-8;
};

SpectralProfile spectral_profile(const Matrix& h, const ProfileOptions& opt = {});

/// Groups whose real part matches `re` within the clustering tolerance.
std::vector<const SpectralGroup*> layer_groups(const SpectralProfile& p, double re,
                                               double tol = 1e-7);

enum class RegimeTag { Standard, Critical, Slow };

struct Regime {
  RegimeTag tag = RegimeTag::Standard;
  double rho = 1.0;
  int nu = 1;
  std::string scaling;
};

std::string regime_name(RegimeTag t);
Regime classify_regime(const SpectralProfile& p, double rho_tol = 1e-9);
Regime regime_for(double rho, int nu, double rho_tol = 1e-9);

/// Multiplier applied to theta_n - theta* at step n.
double scale_factor(const Regime& r, double n);

struct SlowComponent {
  cplx lambda;
  double frequency = 0.0;
  int nu = 1;
  CRow direction;
};

struct SlowDescriptor {
  double rho = 0.0;
  int nu = 1;
  std::vector<SlowComponent> components;
};

struct AsymptoticReport {
  SpectralProfile profile;
  Regime regime;
  std::optional<Matrix> covariance;
  std::optional<SlowDescriptor> slow;
  double as_rate_exponent = 0.5;
};

Matrix clt_covariance(const Matrix& dh, const Matrix& gamma);

Matrix critical_covariance(const Matrix& dh, const Matrix& gamma,
                           const std::optional<Matrix>& chain_basis = std::nullopt,
                           double rho_tol = 1e-9);

Matrix limit_covariance_quadrature(const Matrix& dh, const Matrix& gamma, double L);

/// Polynomial extrapolation in 1/L to 1/L = 0 through the given horizons.
Matrix extrapolate_limit_covariance(const Matrix& dh, const Matrix& gamma,
                                    const std::vector<double>& Ls);

/// Left eigenvectors for the groups of maximal block size ν in the layer Re(λ)=re.
SlowDescriptor layer_descriptor(const SpectralProfile& profile, const Matrix& h, double re,
                                const std::optional<Matrix>& chain_basis = std::nullopt);

SlowDescriptor slow_regime_descriptor(const SpectralProfile& profile, const Matrix& h,
                                      const std::optional<Matrix>& chain_basis = std::nullopt);

double as_rate(const SpectralProfile& profile);

struct AnalysisOptions {
  double rho_tol = 1e-9;
  std::optional<Matrix> chain_basis;
};

AsymptoticReport analyze(const Matrix& dh, const Matrix& gamma, const AnalysisOptions& opt = {});

}  // namespace urnlab
