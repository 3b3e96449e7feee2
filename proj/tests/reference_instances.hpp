#pragma once

// Shared reference instances for the test suites.
#include <vector>

#include "twl/instance.hpp"
#include "twl/rng.hpp"

namespace twl::testing {

// Single root cube, all weights one, square exponents.
inline Instance instance_i0() {
  DyadicGrid grid(1, 0);
  return Instance(grid, Weight(grid, 1.0), Weight(grid, 1.0), make_exponents(2, 2, 2),
                  {grid.root()}, {1.0});
}

// Depth one, w = (4,1), collection = {root}.
inline Instance instance_i1() {
  DyadicGrid grid(1, 1);
  return Instance(grid, Weight(grid, 1.0), Weight(grid, {4.0, 1.0}),
                  make_exponents(2, 2, 2), {grid.root()}, {1.0});
}

// Depth two, all seven cubes of levels 0..2, unit weights and coefficients.
inline Instance instance_i2() {
  DyadicGrid grid(1, 2);
  std::vector<CubeId> cubes = grid.unit_cubes();
  return Instance(grid, Weight(grid, 1.0), Weight(grid, 1.0), make_exponents(2, 2, 2),
                  cubes, std::vector<double>(cubes.size(), 1.0));
}

// Deterministic random instance for property tests.
inline Instance random_instance(std::uint64_t seed, int dimension, int depth,
                                double p = 2.5, double r = 2.0, double q = 2.0,
                                double density = 0.8) {
  Rng rng(seed);
  DyadicGrid grid(dimension, depth);
  std::vector<double> sv(grid.cell_count()), wv(grid.cell_count());
  for (auto& v : sv) v = rng.uniform(0.2, 3.0);
  for (auto& v : wv) v = rng.uniform(0.2, 3.0);
  std::vector<CubeId> cubes;
  std::vector<double> taus;
  for (const CubeId& cube : grid.unit_cubes()) {
    if (rng.uniform() < density) {
      cubes.push_back(cube);
      taus.push_back(std::abs(rng.normal()));
    }
  }
  if (cubes.empty()) {
    cubes.push_back(grid.root());
    taus.push_back(1.0);
  }
  return Instance(grid, Weight(grid, sv), Weight(grid, wv), make_exponents(p, r, q),
                  cubes, taus);
}

inline StepFunction random_nonnegative(const DyadicGrid& grid, std::uint64_t seed) {
  Rng rng(seed);
  StepFunction f(grid, 0.0);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) f[c] = std::abs(rng.normal());
  return f;
}

}  // namespace twl::testing
