#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "urnlab/gaussian_approx.hpp"
#include "urnlab/ode_flow.hpp"
#include "urnlab/report.hpp"
#include "urnlab/sa_engine.hpp"
#include "urnlab/urn_model.hpp"

namespace urnlab {

struct RunSection {
  std::uint64_t n = 1000;
  std::uint64_t replicates = 1000;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<std::uint64_t> checkpoints;  // explicit plan; empty means dyadic
  std::uint64_t dyadic_from = 1;
};

struct Tolerances {
  std::optional<double> cov;  // default depends on the regime
  double ks_alpha = 0.005;
  double path_gap = 0.05;
};

struct AnalysisSection {
  double rho_tol = 1e-9;
  Tolerances tolerances;
  std::optional<Matrix> chain_basis;
};

struct OutputSection {
  std::string dir = ".";
  std::vector<std::string> formats{"json", "csv"};
};

struct SAModel {
  SAProcessSpec spec;
  Matrix dh;
  Matrix gamma;
};

struct GaussModel {
  GaussProcessSpec spec;
  Matrix gamma;
};

struct OdeModel {
  Matrix H;
  std::vector<Row> starts;
  double s_max = 40.0;
  FlowOptions options;
};

struct ConfigDocument {
  Json raw;            // as parsed, before defaults
  std::string digest;  // FNV-1a of the canonical form of `raw`
  std::string kind;    // empty when there is no model section
  RunSection run;
  AnalysisSection analysis;
  OutputSection output;
  std::optional<SAModel> sa;
  std::optional<UrnSpec> urn;
  std::optional<GaussModel> gauss;
  std::optional<OdeModel> ode;
};

/// Throws ConfigError with a JSON-pointer path (or "line L, column C" for parse errors).
ConfigDocument parse_config(const std::string& text, bool require_model = true);
ConfigDocument load_config(const std::string& path, bool require_model = true);

/// Checkpoint plan for n_max from the run section.
std::vector<std::uint64_t> checkpoint_plan(const RunSection& run, std::uint64_t n_max);

}  // namespace urnlab
