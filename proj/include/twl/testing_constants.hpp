#pragma once

#include <cstdint>
#include <optional>

#include "twl/operators.hpp"

namespace twl {

struct OptimizerConfig {
  int restarts = 8;        // random restarts besides the deterministic starts
  int max_iters = 400;
  double tol = 1e-12;      // relative improvement below which ascent stops
  std::uint64_t seed = 0x51e60d5e77a7c941ull;
  bool use_oracle = false; // per-cell exhaustive refinement on small problems
  int oracle_resolution = 24;
};

struct OptimizerTrace {
  int iterations = 0;
  std::vector<double> start_values;  // best objective reached from each start
  bool converged = true;
};

struct TestingReport {
  double value = 0.0;
  CubeId witness_cube;
  std::optional<BSequence> witness_sequence;
  OptimizerTrace trace;
  bool lower_bound_only = false;
};

// L_* = sup_Q σ(Q)^{-p/r} ∫_Q Tbar(1_Q σ)^p w, exact over cubes of levels
// 0..depth.
TestingReport compute_L_star(const Instance& instance);

// L = sup_Q sup_{a} w(Q)^{-r'/p'} ∫_Q U({1_{Q∩R} a_R w})^{r'} σ over unit
// sequences a; the inner sup runs projected ascent on the per-cell spheres
// with multi-start, optionally refined by a per-cell grid sweep.
TestingReport compute_L(const Instance& instance, const OptimizerConfig& config = {});

// Exact inner objective for a given sequence; certifies witnesses.
double testing_objective_L(const Instance& instance, const CubeId& q,
                           const ComponentFamily& a);

// Inner optimization for a single outer cube.
struct InnerLResult {
  double objective = 0.0;
  ComponentFamily a;
  OptimizerTrace trace;
  bool oracle_used = false;
};
InnerLResult optimize_inner_L(const Instance& instance, const CubeId& q,
                              const OptimizerConfig& config);

// Testing constants of the scalar linear operator (exponent-1 sums):
// direct = sup_K σ(K)^{-1/r} ||1_K R(1_K σ)||_{L^p(w)}
// dual   = sup_K w(K)^{-1/p'} ||1_K R(1_K w)||_{L^{r'}(σ)}
struct LsuConstants {
  double direct = 0.0;
  double dual = 0.0;
  CubeId direct_witness;
  CubeId dual_witness;
};
LsuConstants lsu_constants(const Instance& instance);

// sup_Q σ(Q)^{-1} Σ_{R ⊆ Q} w(R) σ(R)^p τ_R^p / |R|^p; requires r = q = p.
double carleson_constant(const Instance& instance);

}  // namespace twl
