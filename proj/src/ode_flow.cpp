#include "urnlab/ode_flow.hpp"

#include <algorithm>
#include <cmath>

#include "urnlab/errors.hpp"
#include "urnlab/format.hpp"
#include "urnlab/urn_model.hpp"

namespace urnlab {

Row flow_rhs(const Row& theta, const Matrix& h) {
  if (theta.size() != h.rows()) throw InvalidArgument("flow_rhs: dimension mismatch");
  const double norm = theta.cwiseAbs().sum();
  if (!(norm > 0.0)) throw SingularityError("flow_rhs: |theta| = 0");
  return -theta + (theta * h) / norm;
}

namespace {

// State is (theta_1..theta_d, f).
Row augmented_rhs(const Row& y, const Matrix& h) {
  const Eigen::Index d = h.rows();
  const Row theta = y.head(d);
  Row out(d + 1);
  out.head(d) = flow_rhs(theta, h);
  out(d) = 1.0 / theta.cwiseAbs().sum();
  return out;
}

Row rk4(const Row& y, double step, const Matrix& h) {
  const Row k1 = augmented_rhs(y, h);
  const Row k2 = augmented_rhs(y + 0.5 * step * k1, h);
  const Row k3 = augmented_rhs(y + 0.5 * step * k2, h);
  const Row k4 = augmented_rhs(y + step * k3, h);
  return y + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

std::vector<FlowState> integrate_flow(const Row& theta0, const Matrix& h_in, double s_max, const FlowOptions& opt) {
  require_square_finite(h_in, "integrate_flow(H)");
  if (theta0.size() != h_in.rows()) throw InvalidArgument("integrate_flow: dimension mismatch");
  require_finite(theta0, "integrate_flow(theta0)");
  if (!(s_max >= 0.0) || !(opt.tol > 0.0) || !(opt.output_every > 0.0)) {
    throw InvalidArgument("integrate_flow: need s_max >= 0, tol > 0, output_every > 0");
  }
  const UrnEigen eig = urn_eigenstructure(h_in);
  const Matrix& h = eig.H;
  const Eigen::Index d = h.rows();
  auto along_u = [&](const Row& th) { return th.dot(eig.u.transpose()); };
  if (!(along_u(theta0) > 0.0)) {
    throw InvalidArgument("integrate_flow: start must satisfy theta0 . u > 0");
  }

  std::vector<FlowState> out;
  Row y(d + 1);
  y.head(d) = theta0;
  y(d) = 0.0;
  double s = 0.0;
  out.push_back({0.0, 0.0, theta0});
  double step = std::min(opt.initial_step, opt.output_every);
  long n_out = 1;
  long steps = 0;
  while (s < s_max) {
    const double target = std::min(s_max, static_cast<double>(n_out) * opt.output_every);
    while (s < target) {
      if (++steps > opt.max_steps) throw IntegrationAborted("integrate_flow: step budget exhausted", s);
      const bool last = s + step >= target;
      const double hstep = last ? target - s : step;
      const Row full = rk4(y, hstep, h);
      const Row half = rk4(rk4(y, 0.5 * hstep, h), 0.5 * hstep, h);
      double err = 0.0;
      for (Eigen::Index i = 0; i <= d; ++i) {
        err = std::max(err, std::abs(half(i) - full(i)) / 15.0 / (1.0 + std::abs(half(i))));
      }
      if (!std::isfinite(err)) throw IntegrationAborted("integrate_flow: non-finite state", s);
      const double fac = err > 0.0 ? std::clamp(0.9 * std::pow(opt.tol / err, 0.2), 0.2, 4.0) : 4.0;
      if (err <= opt.tol) {
        y = half + (half - full) / 15.0;
        s = last ? target : s + hstep;
        if (!(along_u(y.head(d)) > 0.0)) {
          throw IntegrationAborted("integrate_flow: trajectory left the region theta . u > 0", s);
        }
        if (!last) step = hstep * fac;
      } else {
        step = hstep * fac;
      }
    }
    out.push_back({s, y(d), y.head(d)});
    ++n_out;
  }
  return out;
}

std::vector<bool> check_attraction(const std::vector<Row>& starts, const Matrix& h, double s_max, double eps,
                                   const FlowOptions& opt) {
  if (!(eps > 0.0)) throw InvalidArgument("check_attraction: eps must be positive");
  const UrnEigen eig = urn_eigenstructure(h);
  for (const Row& st : starts) {
    if (st.size() != h.rows() || !(st.dot(eig.u.transpose()) > 0.0)) {
      throw InvalidArgument("check_attraction: start outside the region theta . u > 0");
    }
  }
  std::vector<bool> out;
  for (const Row& st : starts) {
    const auto states = integrate_flow(st, h, s_max, opt);
    out.push_back((states.back().theta - eig.v).norm() <= eps);
  }
  return out;
}

std::string flow_csv(const std::vector<FlowState>& states) {
  const Eigen::Index d = states.empty() ? 0 : states.front().theta.size();
  std::string s = "s,f";
  for (Eigen::Index i = 0; i < d; ++i) s += ",theta_" + std::to_string(i + 1);
  s += "\n";
  for (const auto& st : states) {
    s += fmt17(st.s) + "," + fmt17(st.f);
    for (Eigen::Index i = 0; i < d; ++i) s += "," + fmt17(st.theta(i));
    s += "\n";
  }
  return s;
}

}  // namespace urnlab
