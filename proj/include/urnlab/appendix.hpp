#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "urnlab/report.hpp"
#include "urnlab/verify.hpp"

namespace urnlab {

inline constexpr const char* kStableNote =
    "stable convergence is checked only through plain weak convergence with deterministic Gamma";

struct SuiteOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  Json metrics;
};

/// Acceptance checks 1..12; each draws from its own seed derived from opt.seed.
CriterionResult run_criterion(int id, const SuiteOptions& opt);

/// The ids run by appendix_suite: the four worked SA examples.
std::vector<int> suite_criteria();

struct SuiteReport {
  Json json;
  bool pass = false;
  std::vector<std::string> failed;
};

SuiteReport appendix_suite(const SuiteOptions& opt);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

Json to_json(const MCReport& r);
Json to_json(const RateFit& f);
Json to_json(const RotationFit& f);
Json to_json(const CriterionResult& r);

}  // namespace urnlab
