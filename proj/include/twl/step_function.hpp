#pragma once

#include <vector>

#include "twl/grid.hpp"

namespace twl {

// Real-valued function constant on each finest cell of a grid and identically
// zero outside [0,1)^d. Virtual refinement cells inherit the parent value.
class StepFunction {
 public:
  explicit StepFunction(const DyadicGrid& grid, double value = 0.0);
  StepFunction(const DyadicGrid& grid, std::vector<double> values);

  const DyadicGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t cell) const { return values_[cell]; }
  double& operator[](std::size_t cell) { return values_[cell]; }
  const std::vector<double>& values() const noexcept { return values_; }

  double min_value() const;
  double max_value() const;
  // Smallest strictly positive value; 0 when the function is non-positive.
  double min_positive() const;

 private:
  DyadicGrid grid_;  // by value: functions own their geometry
  std::vector<double> values_;
};

// Strictly positive step function.
class Weight {
 public:
  Weight(const DyadicGrid& grid, double value);
  Weight(const DyadicGrid& grid, std::vector<double> values);
  explicit Weight(StepFunction fn);

  const StepFunction& fn() const noexcept { return fn_; }
  operator const StepFunction&() const noexcept { return fn_; }
  const DyadicGrid& grid() const noexcept { return fn_.grid(); }
  double operator[](std::size_t cell) const { return fn_[cell]; }

 private:
  StepFunction fn_;
};

void require_same_grid(const StepFunction& a, const StepFunction& b);

// ∫ f dμ where dμ = mu dx, over the whole unit cube / a cell set / a cube /
// a cube-meets-cells region. All sums run over complete finest cells except
// for sub-cell cubes, which scale the constant cell value by their measure.
double integrate(const StepFunction& f, const StepFunction& mu);
double integrate_cells(const StepFunction& f, const StepFunction& mu, const CellSet& cells);
double integrate_cube(const StepFunction& f, const StepFunction& mu, const CubeId& cube);
double integrate_region(const StepFunction& f, const StepFunction& mu, const CubeRegion& region);

// Unweighted variants (μ ≡ 1).
double integrate_cube(const StepFunction& f, const CubeId& cube);
double integrate_region(const StepFunction& f, const CubeRegion& region);

// E_Q(g): Lebesgue average over the full cube, counting the zero extension.
double average_lebesgue(const StepFunction& g, const CubeId& cube);

struct WeightedAverage {
  double value = 0.0;
  bool zero_mass = false;  // cube carries no ω-mass; value reported as 0
};

// E_Q^ω(g) = ω(Q)^{-1} ∫_Q g ω.
WeightedAverage average_weighted(const StepFunction& g, const Weight& omega,
                                 const CubeId& cube);

// {g > λ} as a set of finest cells.
CellSet superlevel_set(const StepFunction& g, double lambda);

// ‖g‖_{L^s(μ)} over the unit cube, s ≥ 1.
double lp_norm(const StepFunction& g, const Weight& mu, double s);

// max over the cells meeting the cube (a sub-cell cube reads its host cell).
double max_over_cube(const StepFunction& g, const CubeId& cube);

// f·1_Q and f·1_{Q^c} as step functions.
StepFunction restrict_inside(const StepFunction& f, const CubeId& cube);
StepFunction restrict_outside(const StepFunction& f, const CubeId& cube);
StepFunction indicator(const DyadicGrid& grid, const CubeId& cube);

}  // namespace twl
