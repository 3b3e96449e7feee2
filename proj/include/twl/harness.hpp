#pragma once

#include <iosfwd>
#include <string>

#include "twl/decompositions.hpp"
#include "twl/norm_estimator.hpp"

namespace twl {

enum class WeightProfile { uniform, lognormal, spiky, near_degenerate };

WeightProfile profile_from_name(const std::string& name);
std::string profile_name(WeightProfile profile);

struct ExponentTriple {
  double p = 2.0;
  double r = 2.0;
  double q = 2.0;
};

struct SweepConfig {
  std::uint64_t seed = 1;
  int count = 200;
  int depth_min = 1;
  int depth_max = 4;
  int dimension = 1;
  std::vector<ExponentTriple> exponents{{2.0, 2.0, 2.0},
                                        {3.0, 2.0, 2.0},
                                        {2.5, 1.5, 3.0},
                                        {4.0, 4.0, 4.0}};
  WeightProfile profile = WeightProfile::uniform;
  double eta = 0.01;
  double cube_density = 0.7;
  OptimizerConfig optimizer{4, 200, 1e-12, 0x51e60d5e77a7c941ull, false, 24};
  int verify_trials = 20;
  bool timings = false;
};

// Deterministic in (config.seed, index).
Instance gen_instance(const SweepConfig& config, int index);

struct VerifyItem {
  std::string name;
  bool pass = true;
  double value = 0.0;  // worst observed quantity
  double bound = 0.0;  // allowed value
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyItem> items;
  bool pass = true;
  // Replay payload (instance + parameters + offending cube) for the first
  // failed exact invariant, empty when everything passes.
  std::string failure_context;

  const VerifyItem* find(const std::string& name) const;
};

VerifyReport run_verify(const Instance& instance, double eta,
                        const OptimizerConfig& config = {}, std::uint64_t seed = 7,
                        int trials = 25, const TestingPair* precomputed = nullptr,
                        const NormEstimate* norm_estimate = nullptr);

struct SweepSummary {
  int rows = 0;
  double max_ratio = 0.0;
  int max_occurrence = 0;
  int failures = 0;
};

SweepSummary run_sweep(const SweepConfig& config, std::ostream& csv);

}  // namespace twl
