#include "twl/step_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace twl {

StepFunction::StepFunction(const DyadicGrid& grid, double value)
    : grid_(grid), values_(grid.cell_count(), value) {}

StepFunction::StepFunction(const DyadicGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid.cell_count()) {
    throw std::invalid_argument("step function needs one value per finest cell");
  }
}

double StepFunction::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

double StepFunction::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

double StepFunction::min_positive() const {
  double best = 0.0;
  for (double v : values_) {
    if (v > 0.0 && (best == 0.0 || v < best)) best = v;
  }
  return best;
}

namespace {

StepFunction checked_weight(StepFunction fn) {
  for (double v : fn.values()) {
    if (!(v > 0.0)) throw std::invalid_argument("weight values must be strictly positive");
  }
  return fn;
}

}  // namespace

Weight::Weight(const DyadicGrid& grid, double value)
    : fn_(checked_weight(StepFunction(grid, value))) {}

Weight::Weight(const DyadicGrid& grid, std::vector<double> values)
    : fn_(checked_weight(StepFunction(grid, std::move(values)))) {}

Weight::Weight(StepFunction fn) : fn_(checked_weight(std::move(fn))) {}

void require_same_grid(const StepFunction& a, const StepFunction& b) {
  if (!a.grid().compatible(b.grid())) {
    throw std::invalid_argument("step functions live on incompatible grids");
  }
}

double integrate(const StepFunction& f, const StepFunction& mu) {
  require_same_grid(f, mu);
  const double v = f.grid().cell_measure();
  double total = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) total += f[c] * mu[c] * v;
  return total;
}

double integrate_cells(const StepFunction& f, const StepFunction& mu, const CellSet& cells) {
  require_same_grid(f, mu);
  const double v = f.grid().cell_measure();
  double total = 0.0;
  cells.for_each([&](std::size_t c) { total += f[c] * mu[c] * v; });
  return total;
}

double integrate_cube(const StepFunction& f, const StepFunction& mu, const CubeId& cube) {
  require_same_grid(f, mu);
  const DyadicGrid& grid = f.grid();
  if (!grid.valid(cube)) throw std::out_of_range("integrate_cube: cube outside padded grid");
  if (cube.level > grid.depth()) {
    if (!grid.inside_unit(grid.ancestor(cube, cube.level - grid.depth()))) return 0.0;
    const std::size_t c = grid.cell_linear(grid.containing_cell(cube));
    return f[c] * mu[c] * grid.measure(cube);
  }
  const double v = grid.cell_measure();
  double total = 0.0;
  for (std::size_t c : grid.cells_in(cube)) total += f[c] * mu[c] * v;
  return total;
}

double integrate_region(const StepFunction& f, const StepFunction& mu, const CubeRegion& region) {
  require_same_grid(f, mu);
  const DyadicGrid& grid = f.grid();
  double total = 0.0;
  region.cells.for_each([&](std::size_t c) {
    const double o = grid.overlap(region.cube, c);
    if (o > 0.0) total += f[c] * mu[c] * o;
  });
  return total;
}

double integrate_cube(const StepFunction& f, const CubeId& cube) {
  return integrate_cube(f, StepFunction(f.grid(), 1.0), cube);
}

double integrate_region(const StepFunction& f, const CubeRegion& region) {
  return integrate_region(f, StepFunction(f.grid(), 1.0), region);
}

double average_lebesgue(const StepFunction& g, const CubeId& cube) {
  return integrate_cube(g, cube) / g.grid().measure(cube);
}

WeightedAverage average_weighted(const StepFunction& g, const Weight& omega,
                                 const CubeId& cube) {
  require_same_grid(g, omega.fn());
  const double mass = integrate_cube(omega.fn(), StepFunction(g.grid(), 1.0), cube);
  if (mass <= 0.0) return {0.0, true};
  return {integrate_cube(g, omega.fn(), cube) / mass, false};
}

CellSet superlevel_set(const StepFunction& g, double lambda) {
  CellSet out(g.size());
  for (std::size_t c = 0; c < g.size(); ++c) {
    if (g[c] > lambda) out.insert(c);
  }
  return out;
}

double lp_norm(const StepFunction& g, const Weight& mu, double s) {
  require_same_grid(g, mu.fn());
  if (!(s >= 1.0)) throw std::invalid_argument("lp_norm: exponent must be >= 1");
  const double v = g.grid().cell_measure();
  double total = 0.0;
  for (std::size_t c = 0; c < g.size(); ++c) {
    total += std::pow(std::abs(g[c]), s) * mu[c] * v;
  }
  return std::pow(total, 1.0 / s);
}

double max_over_cube(const StepFunction& g, const CubeId& cube) {
  const DyadicGrid& grid = g.grid();
  if (cube.level > grid.depth()) {
    return g[grid.cell_linear(grid.containing_cell(cube))];
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c : grid.cells_in(cube)) best = std::max(best, g[c]);
  if (!std::isfinite(best)) {
    throw std::invalid_argument("max_over_cube: cube meets no cell");
  }
  return best;
}

StepFunction restrict_inside(const StepFunction& f, const CubeId& cube) {
  const DyadicGrid& grid = f.grid();
  StepFunction out(grid, 0.0);
  if (cube.level > grid.depth()) {
    throw std::invalid_argument("restrict_inside: cube finer than a cell");
  }
  for (std::size_t c : grid.cells_in(cube)) out[c] = f[c];
  return out;
}

StepFunction restrict_outside(const StepFunction& f, const CubeId& cube) {
  const DyadicGrid& grid = f.grid();
  StepFunction out = f;
  if (cube.level > grid.depth()) {
    throw std::invalid_argument("restrict_outside: cube finer than a cell");
  }
  for (std::size_t c : grid.cells_in(cube)) out[c] = 0.0;
  return out;
}

StepFunction indicator(const DyadicGrid& grid, const CubeId& cube) {
  StepFunction out(grid, 0.0);
  for (std::size_t c : grid.cells_in(cube)) out[c] = 1.0;
  return out;
}

}  // namespace twl
