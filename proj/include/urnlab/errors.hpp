#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace urnlab {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Eigenvalue outside the admissible half-plane.
class SpectrumError : public std::runtime_error {
 public:
  SpectrumError(const std::string& msg, std::complex<double> eig)
      : std::runtime_error(msg), eigenvalue(eig) {}
  std::complex<double> eigenvalue;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& msg, double res)
      : std::runtime_error(msg), residual(res) {}
  double residual;
};

class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NeedsChainBasis : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidBasis : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationAborted : public std::runtime_error {
 public:
  IntegrationAborted(const std::string& msg, double s_at)
      : std::runtime_error(msg), s(s_at) {}
  double s;
};

/// Non-finite state; `index` is the first offending step.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& msg, std::uint64_t idx)
      : std::runtime_error(msg), index(idx) {}
  std::uint64_t index;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, std::string ptr)
      : std::runtime_error(msg), pointer(std::move(ptr)) {}
  std::string pointer;
};

std::string format_complex(std::complex<double> z);

}  // namespace urnlab
