#include "twl/instance.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace twl {

Exponents make_exponents(double p, double r, double q) {
  if (!(1.0 < r && r <= p)) {
    throw std::invalid_argument("exponents must satisfy 1 < r <= p");
  }
  if (!(1.0 < q)) throw std::invalid_argument("exponent q must exceed 1");
  Exponents e;
  e.p = p;
  e.r = r;
  e.q = q;
  e.p_conj = p / (p - 1.0);
  e.r_conj = r / (r - 1.0);
  e.q_conj = q / (q - 1.0);
  return e;
}

Instance::Instance(DyadicGrid grid, Weight sigma, Weight w, Exponents exps,
                   std::vector<CubeId> cubes, std::vector<double> tau)
    : grid_(grid), sigma_(std::move(sigma)), w_(std::move(w)), exps_(exps) {
  if (!sigma_.grid().compatible(grid_) || !w_.grid().compatible(grid_)) {
    throw std::invalid_argument("instance weights live on a different grid");
  }
  if (cubes.size() != tau.size()) {
    throw std::invalid_argument("tau must assign one value per collection cube");
  }
  std::vector<std::size_t> order(cubes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return cubes[a] < cubes[b]; });
  cubes_.reserve(cubes.size());
  tau_.reserve(tau.size());
  for (std::size_t i : order) {
    const CubeId& cube = cubes[i];
    if (cube.level < 0 || cube.level > grid_.depth() || !grid_.inside_unit(cube)) {
      throw std::invalid_argument("collection cube " + to_string(cube) +
                                  " must lie inside [0,1)^d with level <= depth");
    }
    if (!cubes_.empty() && cubes_.back() == cube) {
      throw std::invalid_argument("collection contains duplicate cube " + to_string(cube));
    }
    if (!(tau[i] >= 0.0)) throw std::invalid_argument("tau values must be non-negative");
    cubes_.push_back(cube);
    tau_.push_back(tau[i]);
  }
  cube_cells_.resize(cubes_.size());
  cover_.assign(grid_.cell_count(), {});
  for (std::size_t i = 0; i < cubes_.size(); ++i) {
    cube_cells_[i] = grid_.cells_in(cubes_[i]);
    for (std::size_t c : cube_cells_[i]) {
      cover_[c].push_back(static_cast<std::uint32_t>(i));
    }
  }
}

std::optional<std::size_t> Instance::family_index(const CubeId& cube) const {
  auto it = std::lower_bound(cubes_.begin(), cubes_.end(), cube);
  if (it != cubes_.end() && *it == cube) {
    return static_cast<std::size_t>(it - cubes_.begin());
  }
  return std::nullopt;
}

}  // namespace twl
