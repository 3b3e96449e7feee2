#include "twl/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace twl {

namespace {

void check_dim(int dimension) {
  if (dimension < 1 || dimension > kMaxDim) {
    throw std::invalid_argument("grid dimension must be in [1, " +
                                std::to_string(kMaxDim) + "]");
  }
}

}  // namespace

CubeId make_cube(int level, std::initializer_list<std::uint32_t> index) {
  if (index.size() > static_cast<std::size_t>(kMaxDim)) {
    throw std::invalid_argument("cube index has too many components");
  }
  CubeId cube;
  cube.level = level;
  std::size_t i = 0;
  for (std::uint32_t v : index) cube.index[i++] = v;
  return cube;
}

std::string to_string(const CubeId& cube) {
  std::string s = "L" + std::to_string(cube.level) + "[";
  for (int i = 0; i < kMaxDim; ++i) {
    if (i > 0) s += ",";
    s += std::to_string(cube.index[i]);
  }
  s += "]";
  return s;
}

DyadicGrid::DyadicGrid(int dimension, int depth, int padding_up, int padding_down)
    : dim_(dimension), depth_(depth), pad_up_(padding_up), pad_down_(padding_down) {
  check_dim(dimension);
  if (depth < 0) throw std::invalid_argument("grid depth must be non-negative");
  if (padding_up < 2 || padding_down < 2) {
    throw std::invalid_argument("grid padding must be at least 2 levels");
  }
  if (dimension * depth > 24) {
    throw std::invalid_argument("grid too fine: dimension*depth exceeds 24");
  }
  if (dimension * (depth + padding_down + padding_up) > 62) {
    throw std::invalid_argument("grid padding too deep for exact measure units");
  }
  cell_count_ = std::size_t{1} << (dimension * depth);
  cell_measure_ = std::ldexp(1.0, -dimension * depth);
}

bool DyadicGrid::valid(const CubeId& cube) const noexcept {
  if (cube.level < min_level() || cube.level > max_level()) return false;
  const int bits = cube.level + pad_up_;
  const std::uint64_t bound = std::uint64_t{1} << bits;
  for (int i = 0; i < dim_; ++i) {
    if (cube.index[i] >= bound) return false;
  }
  for (int i = dim_; i < kMaxDim; ++i) {
    if (cube.index[i] != 0) return false;
  }
  return true;
}

bool DyadicGrid::inside_unit(const CubeId& cube) const noexcept {
  if (!valid(cube) || cube.level < 0) return false;
  const std::uint64_t bound = std::uint64_t{1} << cube.level;
  for (int i = 0; i < dim_; ++i) {
    if (cube.index[i] >= bound) return false;
  }
  return true;
}

CubeId DyadicGrid::parent(const CubeId& cube) const {
  if (!valid(cube)) throw std::out_of_range("parent: cube outside padded grid");
  if (cube.level <= min_level()) {
    throw std::out_of_range("parent: cube already at the top virtual level");
  }
  CubeId up;
  up.level = cube.level - 1;
  for (int i = 0; i < dim_; ++i) up.index[i] = cube.index[i] >> 1;
  return up;
}

CubeId DyadicGrid::ancestor(const CubeId& cube, int generations) const {
  CubeId cur = cube;
  for (int g = 0; g < generations; ++g) cur = parent(cur);
  return cur;
}

std::vector<CubeId> DyadicGrid::children(const CubeId& cube) const {
  if (!valid(cube)) throw std::out_of_range("children: cube outside padded grid");
  if (cube.level >= max_level()) {
    throw std::out_of_range("children: cube already at the finest virtual level");
  }
  std::vector<CubeId> out;
  out.reserve(std::size_t{1} << dim_);
  const std::uint32_t combos = 1u << dim_;
  for (std::uint32_t mask = 0; mask < combos; ++mask) {
    CubeId child;
    child.level = cube.level + 1;
    for (int i = 0; i < dim_; ++i) {
      child.index[i] = (cube.index[i] << 1) | ((mask >> i) & 1u);
    }
    out.push_back(child);
  }
  return out;
}

double DyadicGrid::measure(const CubeId& cube) const noexcept {
  return std::ldexp(1.0, -dim_ * cube.level);
}

std::uint64_t DyadicGrid::measure_units(const CubeId& cube) const noexcept {
  return std::uint64_t{1} << (dim_ * (max_level() - cube.level));
}

bool DyadicGrid::contains(const CubeId& outer, const CubeId& inner) const noexcept {
  const int shift = inner.level - outer.level;
  if (shift < 0) return false;
  for (int i = 0; i < dim_; ++i) {
    if ((inner.index[i] >> shift) != outer.index[i]) return false;
  }
  return true;
}

bool DyadicGrid::intersects(const CubeId& a, const CubeId& b) const noexcept {
  return contains(a, b) || contains(b, a);
}

bool DyadicGrid::is_cell(const CubeId& cube) const noexcept {
  return cube.level == depth_ && inside_unit(cube);
}

std::size_t DyadicGrid::cell_linear(const CubeId& cell) const {
  if (!is_cell(cell)) throw std::invalid_argument("cell_linear: not a finest cell");
  std::size_t linear = 0;
  for (int i = 0; i < dim_; ++i) {
    linear = (linear << depth_) | cell.index[i];
  }
  return linear;
}

CubeId DyadicGrid::cell_at(std::size_t linear) const {
  if (linear >= cell_count_) throw std::out_of_range("cell_at: index out of range");
  CubeId cell;
  cell.level = depth_;
  const std::size_t mask = (std::size_t{1} << depth_) - 1;
  for (int i = dim_ - 1; i >= 0; --i) {
    cell.index[i] = static_cast<std::uint32_t>(linear & mask);
    linear >>= depth_;
  }
  return cell;
}

CubeId DyadicGrid::containing_cell(const CubeId& cube) const {
  if (cube.level < depth_) {
    throw std::invalid_argument("containing_cell: cube coarser than a cell");
  }
  CubeId cell;
  cell.level = depth_;
  const int shift = cube.level - depth_;
  for (int i = 0; i < dim_; ++i) cell.index[i] = cube.index[i] >> shift;
  if (!is_cell(cell)) {
    throw std::invalid_argument("containing_cell: cube outside the unit cube");
  }
  return cell;
}

std::vector<std::size_t> DyadicGrid::cells_in(const CubeId& cube) const {
  if (!valid(cube)) throw std::out_of_range("cells_in: cube outside padded grid");
  std::vector<std::size_t> out;
  if (cube.level < 0) {
    // A virtual ancestor meets [0,1)^d exactly when it sits on the zero spine.
    if (!contains(cube, root())) return out;
    out.resize(cell_count_);
    for (std::size_t i = 0; i < cell_count_; ++i) out[i] = i;
    return out;
  }
  if (cube.level > depth_) return out;
  if (!inside_unit(cube)) return out;
  const int shift = depth_ - cube.level;
  const std::size_t side = std::size_t{1} << shift;
  const std::size_t total = std::size_t{1} << (dim_ * shift);
  out.reserve(total);
  std::array<std::size_t, kMaxDim> offsets{};
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rem = n;
    for (int i = dim_ - 1; i >= 0; --i) {
      offsets[i] = rem % side;
      rem /= side;
    }
    CubeId cell;
    cell.level = depth_;
    for (int i = 0; i < dim_; ++i) {
      cell.index[i] = static_cast<std::uint32_t>((cube.index[i] << shift) + offsets[i]);
    }
    out.push_back(cell_linear(cell));
  }
  return out;
}

double DyadicGrid::overlap(const CubeId& cube, std::size_t cell) const {
  const CubeId c = cell_at(cell);
  if (contains(c, cube)) return measure(cube);
  if (contains(cube, c)) return cell_measure_;
  return 0.0;
}

std::vector<CubeId> DyadicGrid::cubes_at_level(int level) const {
  if (level < 0 || level > max_level()) {
    throw std::out_of_range("cubes_at_level: level outside [0, depth+padding]");
  }
  std::vector<CubeId> out;
  const std::size_t side = std::size_t{1} << level;
  const std::size_t total = std::size_t{1} << (dim_ * level);
  out.reserve(total);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rem = n;
    CubeId cube;
    cube.level = level;
    for (int i = dim_ - 1; i >= 0; --i) {
      cube.index[i] = static_cast<std::uint32_t>(rem % side);
      rem /= side;
    }
    out.push_back(cube);
  }
  return out;
}

std::vector<CubeId> DyadicGrid::unit_cubes() const {
  std::vector<CubeId> out;
  for (int level = 0; level <= depth_; ++level) {
    auto cubes = cubes_at_level(level);
    out.insert(out.end(), cubes.begin(), cubes.end());
  }
  return out;
}

CubeGeometry cube_geometry(const DyadicGrid& grid, const CubeId& cube) {
  if (!grid.valid(cube)) {
    throw std::out_of_range("cube_geometry: level outside padded range");
  }
  CubeGeometry geo;
  geo.measure = grid.measure(cube);
  if (cube.level > grid.min_level()) geo.parent = grid.parent(cube);
  if (cube.level < grid.max_level()) geo.children = grid.children(cube);
  return geo;
}

CellSet::CellSet(std::size_t cell_count, bool filled)
    : bits_(cell_count, filled ? 1 : 0), count_(filled ? cell_count : 0) {}

void CellSet::insert(std::size_t cell) {
  if (!bits_[cell]) {
    bits_[cell] = 1;
    ++count_;
  }
}

void CellSet::erase(std::size_t cell) {
  if (bits_[cell]) {
    bits_[cell] = 0;
    --count_;
  }
}

CellSet& CellSet::operator&=(const CellSet& other) {
  count_ = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    bits_[i] = bits_[i] & other.bits_[i];
    count_ += bits_[i];
  }
  return *this;
}

CellSet& CellSet::operator|=(const CellSet& other) {
  count_ = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    bits_[i] = bits_[i] | other.bits_[i];
    count_ += bits_[i];
  }
  return *this;
}

CellSet& CellSet::operator-=(const CellSet& other) {
  count_ = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    bits_[i] = bits_[i] & static_cast<std::uint8_t>(1 - other.bits_[i]);
    count_ += bits_[i];
  }
  return *this;
}

CellSet CellSet::complement() const {
  CellSet out(bits_.size());
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (!bits_[i]) out.insert(i);
  }
  return out;
}

bool CellSet::is_subset_of(const CellSet& other) const {
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !other.bits_[i]) return false;
  }
  return true;
}

std::vector<std::size_t> CellSet::cells() const {
  std::vector<std::size_t> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out.push_back(i);
  }
  return out;
}

double region_measure(const DyadicGrid& grid, const CubeRegion& region) {
  double total = 0.0;
  region.cells.for_each([&](std::size_t cell) {
    total += grid.overlap(region.cube, cell);
  });
  return total;
}

}  // namespace twl
