#pragma once

#include <functional>

#include "urnlab/matrix_core.hpp"

namespace urnlab {

struct QuadratureOptions {
  double abs_tol = 1e-10;  // per entry
  int initial_panels = 16;
  int max_depth = 40;
};

/// Adaptive Simpson for matrix-valued integrands; throws QuadratureError
/// when a panel cannot be resolved within max_depth bisections.
Matrix adaptive_simpson(const std::function<Matrix(double)>& f, double a, double b,
                        const QuadratureOptions& opt = {});

/// Integral over [a,b] of (e^{-Bu})^T G e^{-Bu} du.
Matrix gramian_integral(const Matrix& b, const Matrix& g, double lo, double hi,
                        const QuadratureOptions& opt = {});

/// Gauss-Laguerre nodes and weights for weight e^{-t} on [0, inf).
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_laguerre(int n);

}  // namespace urnlab
