#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "urnlab/matrix_core.hpp"
#include "urnlab/rng.hpp"

namespace urnlab {

struct GaussProcessSpec {
  Matrix H;
  Matrix gamma_root;  // any R with R^T R = Gamma
  Row G1;
  std::vector<double> grid;  // 1 = t_0 < t_1 < ... < t_K
};

void validate_gauss(const GaussProcessSpec& spec);

/// Geometric grid from 1 to t_max with `steps` intervals.
std::vector<double> log_uniform_grid(double t_max, int steps);

/// Per-interval propagators (t_k/t_{k+1})^H and increment factors R_k with R_k^T R_k = C_k.
struct GaussStepLaw {
  std::vector<Matrix> propagators;
  std::vector<Matrix> noise_factors;
  std::vector<Matrix> increment_covs;
};

GaussStepLaw gauss_step_law(const GaussProcessSpec& spec);

struct GaussPoint {
  double t = 1.0;
  Row G;
};

std::vector<GaussPoint> simulate_gaussian_process(const GaussProcessSpec& spec, std::uint64_t seed,
                                                  std::uint64_t stream = 0);
std::vector<GaussPoint> simulate_with_law(const GaussProcessSpec& spec, const GaussStepLaw& law, StreamRng& rng);

/// (1/t) * int_0^{log t} (e^{-(H-I/2)u})^T Gamma e^{-(H-I/2)u} du.
Matrix gaussian_variance(const Matrix& h, const Matrix& gamma, double t);

std::string gauss_csv(const std::vector<GaussPoint>& path);

}  // namespace urnlab
