#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "twl/step_function.hpp"

namespace twl {

// Lebesgue exponents with precomputed Hölder conjugates x' = x/(x-1).
struct Exponents {
  double p = 2.0;
  double r = 2.0;
  double q = 2.0;
  double p_conj = 2.0;
  double r_conj = 2.0;
  double q_conj = 2.0;
};

// Requires 1 < r <= p and 1 < q.
Exponents make_exponents(double p, double r, double q);

// A problem instance: grid, weights σ and w, exponents, and the coefficient
// family τ over a collection of cubes with levels in [0, depth].
class Instance {
 public:
  Instance(DyadicGrid grid, Weight sigma, Weight w, Exponents exps,
           std::vector<CubeId> cubes, std::vector<double> tau);

  const DyadicGrid& grid() const noexcept { return grid_; }
  const Weight& sigma() const noexcept { return sigma_; }
  const Weight& w() const noexcept { return w_; }
  const Exponents& exponents() const noexcept { return exps_; }

  std::size_t family_size() const noexcept { return cubes_.size(); }
  const CubeId& family_cube(std::size_t i) const { return cubes_[i]; }
  const std::vector<CubeId>& family() const noexcept { return cubes_; }
  double tau(std::size_t i) const { return tau_[i]; }
  const std::vector<double>& taus() const noexcept { return tau_; }

  const std::vector<std::size_t>& cells_of(std::size_t i) const { return cube_cells_[i]; }
  double cube_measure(std::size_t i) const { return grid_.measure(cubes_[i]); }
  // Family members containing a given cell, ordered by family index.
  const std::vector<std::uint32_t>& cover(std::size_t cell) const { return cover_[cell]; }

  std::optional<std::size_t> family_index(const CubeId& cube) const;

 private:
  DyadicGrid grid_;
  Weight sigma_;
  Weight w_;
  Exponents exps_;
  std::vector<CubeId> cubes_;  // sorted, unique
  std::vector<double> tau_;
  std::vector<std::vector<std::size_t>> cube_cells_;
  std::vector<std::vector<std::uint32_t>> cover_;
};

}  // namespace twl
