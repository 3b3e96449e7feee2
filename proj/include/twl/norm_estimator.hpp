#pragma once

#include <limits>

#include "twl/testing_constants.hpp"

namespace twl {

enum class NormMethod { bruteforce, ascent, closed_form };

struct NormEstimate {
  explicit NormEstimate(const DyadicGrid& grid)
      : witness_f(grid, 0.0) {}

  double lower_bound = 0.0;  // attained by witness_f, evaluated exactly
  double upper_bound = std::numeric_limits<double>::infinity();
  StepFunction witness_f;    // non-negative, unit L^r(σ) norm
  NormMethod method = NormMethod::ascent;
  bool converged = true;
};

struct TestingPair {
  TestingReport L;
  TestingReport L_star;
};

// Exhaustive simplex-grid search over the non-negative unit sphere of
// L^r(σ), plus local polish. Guarded to tiny grids. q_semantics = 0 uses the
// instance exponent; q_semantics = 1 evaluates the scalar linear operator.
NormEstimate opnorm_bruteforce(const Instance& instance, int resolution,
                               double q_semantics = 0.0);

// Multi-start projected ascent over the same sphere. Witness starts from the
// testing reports certify that the returned bound dominates the testing
// constants.
NormEstimate opnorm_ascent(const Instance& instance, const OptimizerConfig& config = {},
                           const TestingPair* reports = nullptr,
                           double q_semantics = 0.0);

// ||g||_{L^{s,∞}(μ)} = sup_λ λ μ({|g| > λ})^{1/s}, exact for step functions.
double weak_norm(const StepFunction& g, const Weight& mu, double s);

struct WeakTypeReport {
  double max_ratio_T = 0.0;  // ||Tbar(fσ)||_{L^{p,∞}(w)} / (L^{1/r'} ||f||_{L^r(σ)})
  double max_ratio_U = 0.0;  // ||U({g w})||_{L^{r',∞}(σ)} / (L_*^{1/p} ||g||)
  int trials = 0;
};
WeakTypeReport weak_type_check(const Instance& instance, int trials,
                               const TestingPair& reports, std::uint64_t seed = 11);

struct StrengthenedReport {
  double max_ratio_direct = 0.0;  // ∫ Tbar(1_Q σ)^p w over R^d vs L_* σ(Q)^{p/r}
  double max_ratio_dual = 0.0;    // ∫ U({1_Q a w})^{r'} σ over R^d vs L w(Q)^{r'/p'}
};
StrengthenedReport strengthened_testing_check(const Instance& instance,
                                              const TestingPair& reports,
                                              const OptimizerConfig& config = {});

}  // namespace twl
