#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace twl {

// Grids stay low-dimensional; a fixed-size index keeps CubeId trivially
// copyable and usable as an ordered map key without allocation.
inline constexpr int kMaxDim = 4;

// Dyadic cube at `level` with lower corner index[i]*2^{-level} and side
// 2^{-level}. Level 0, index 0 is the unit cube [0,1)^d; negative levels are
// virtual ancestors, levels above the grid depth are virtual refinements.
// Components beyond the grid dimension must stay zero.
struct CubeId {
  int level = 0;
  std::array<std::uint32_t, kMaxDim> index{};

  friend constexpr auto operator<=>(const CubeId&, const CubeId&) = default;
};

CubeId make_cube(int level, std::initializer_list<std::uint32_t> index);
std::string to_string(const CubeId& cube);

// Finite dyadic tree over [0,1)^d. The padded universe is [0, 2^{padding_up})^d
// subdivided down to level depth+padding_down, so every cube with a level in
// (-padding_up, depth+padding_down] has a parent and every cube above the
// finest virtual level has a full set of children. Mass lives only on the
// 2^{d*depth} finest cells of [0,1)^d.
class DyadicGrid {
 public:
  DyadicGrid(int dimension, int depth, int padding_up = 2, int padding_down = 2);

  int dimension() const noexcept { return dim_; }
  int depth() const noexcept { return depth_; }
  int padding_up() const noexcept { return pad_up_; }
  int padding_down() const noexcept { return pad_down_; }
  int min_level() const noexcept { return -pad_up_; }
  int max_level() const noexcept { return depth_ + pad_down_; }

  std::size_t cell_count() const noexcept { return cell_count_; }
  double cell_measure() const noexcept { return cell_measure_; }

  // Step functions transfer between grids with equal dimension and depth;
  // padding only widens the virtual range and never carries mass.
  bool compatible(const DyadicGrid& other) const noexcept {
    return dim_ == other.dim_ && depth_ == other.depth_;
  }

  bool valid(const CubeId& cube) const noexcept;
  bool inside_unit(const CubeId& cube) const noexcept;
  CubeId root() const noexcept { return CubeId{}; }

  CubeId parent(const CubeId& cube) const;
  CubeId ancestor(const CubeId& cube, int generations) const;
  std::vector<CubeId> children(const CubeId& cube) const;

  double measure(const CubeId& cube) const noexcept;  // Lebesgue, 2^{-d*level}
  // Lebesgue measure in exact integer units of 2^{-d*max_level}.
  std::uint64_t measure_units(const CubeId& cube) const noexcept;

  // Dyadic cubes are nested or disjoint, so these are exact integer tests.
  bool contains(const CubeId& outer, const CubeId& inner) const noexcept;
  bool intersects(const CubeId& a, const CubeId& b) const noexcept;

  bool is_cell(const CubeId& cube) const noexcept;
  std::size_t cell_linear(const CubeId& cell) const;  // lexicographic by index
  CubeId cell_at(std::size_t linear) const;
  // The finest cell whose interior contains the given sub-cell cube.
  CubeId containing_cell(const CubeId& cube) const;

  // Linear indices of the finest cells inside cube ∩ [0,1)^d. Cubes finer
  // than a cell cover no complete cell and yield an empty list.
  std::vector<std::size_t> cells_in(const CubeId& cube) const;
  // Lebesgue measure of cube ∩ cell.
  double overlap(const CubeId& cube, std::size_t cell) const;

  std::vector<CubeId> cubes_at_level(int level) const;  // inside [0,1)^d
  std::vector<CubeId> unit_cubes() const;               // levels 0..depth

 private:
  int dim_;
  int depth_;
  int pad_up_;
  int pad_down_;
  std::size_t cell_count_;
  double cell_measure_;
};

struct CubeGeometry {
  CubeId parent;
  std::vector<CubeId> children;
  double measure = 0.0;
};

CubeGeometry cube_geometry(const DyadicGrid& grid, const CubeId& cube);

// Subset of the finest cells of a grid.
class CellSet {
 public:
  CellSet() = default;
  explicit CellSet(std::size_t cell_count, bool filled = false);

  std::size_t capacity() const noexcept { return bits_.size(); }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  bool full() const noexcept { return count_ == bits_.size(); }

  bool contains(std::size_t cell) const { return bits_[cell] != 0; }
  void insert(std::size_t cell);
  void erase(std::size_t cell);

  CellSet& operator&=(const CellSet& other);
  CellSet& operator|=(const CellSet& other);
  CellSet& operator-=(const CellSet& other);
  friend CellSet operator&(CellSet a, const CellSet& b) { return a &= b; }
  friend CellSet operator|(CellSet a, const CellSet& b) { return a |= b; }
  friend CellSet operator-(CellSet a, const CellSet& b) { return a -= b; }

  CellSet complement() const;
  bool is_subset_of(const CellSet& other) const;
  bool operator==(const CellSet& other) const {
    return bits_ == other.bits_;
  }

  std::vector<std::size_t> cells() const;

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      if (bits_[i]) f(i);
    }
  }

 private:
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

// Geometric intersection cube ∩ (union of cells). The cube may sit below cell
// resolution, in which case the region is either empty or the whole cube.
struct CubeRegion {
  CubeId cube;
  CellSet cells;
};

double region_measure(const DyadicGrid& grid, const CubeRegion& region);

}  // namespace twl
