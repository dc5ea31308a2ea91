#pragma once

#include <string>
#include <vector>

#include "urnlab/matrix_core.hpp"

namespace urnlab {

struct FlowState {
  double s = 0.0;
  double f = 0.0;  // int_0^s du / |theta(u)|
  Row theta;
};

/// -theta (I - H/|theta|) with |theta| the l1 norm.
Row flow_rhs(const Row& theta, const Matrix& h);

struct FlowOptions {
  double tol = 1e-10;
  double output_every = 1.0;
  double initial_step = 1e-3;
  long max_steps = 10000000;
};

/// Adaptive RK4 with step doubling. H is rescaled so that its top eigenvalue is 1.
std::vector<FlowState> integrate_flow(const Row& theta0, const Matrix& h, double s_max,
                                      const FlowOptions& opt = {});

std::vector<bool> check_attraction(const std::vector<Row>& starts, const Matrix& h, double s_max, double eps,
                                   const FlowOptions& opt = {});

std::string flow_csv(const std::vector<FlowState>& states);

}  // namespace urnlab
