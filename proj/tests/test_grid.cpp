#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>

#include "twl/grid.hpp"

using namespace twl;

TEST_CASE("cube geometry of the unit interval root") {
  DyadicGrid grid(1, 1);
  const CubeGeometry geo = cube_geometry(grid, grid.root());
  CHECK(geo.measure == 1.0);
  CHECK(geo.parent.level == -1);
  CHECK(geo.parent.index[0] == 0);  // the ancestor [0,2)
  REQUIRE(geo.children.size() == 2);
  CHECK(geo.children[0] == make_cube(1, {0}));
  CHECK(geo.children[1] == make_cube(1, {1}));
}

TEST_CASE("cube geometry at depth 2") {
  DyadicGrid grid(1, 2);
  const CubeId quarter = make_cube(2, {1});  // [1/4, 1/2)
  const CubeGeometry geo = cube_geometry(grid, quarter);
  CHECK(geo.measure == 0.25);
  CHECK(geo.parent == make_cube(1, {0}));  // [0, 1/2)
}

TEST_CASE("cube geometry in two dimensions") {
  DyadicGrid grid(2, 1);
  const CubeGeometry geo = cube_geometry(grid, grid.root());
  CHECK(geo.measure == 1.0);
  CHECK(geo.children.size() == 4);
}

TEST_CASE("levels outside the padded range are rejected") {
  DyadicGrid grid(1, 2);
  CHECK_THROWS_AS(cube_geometry(grid, make_cube(-3, {0})), std::out_of_range);
  CHECK_THROWS_AS(cube_geometry(grid, make_cube(5, {0})), std::out_of_range);
  CHECK_THROWS_AS(grid.parent(make_cube(-2, {0})), std::out_of_range);
  CHECK_THROWS_AS(grid.children(make_cube(4, {0})), std::out_of_range);
}

TEST_CASE("grid construction validates its parameters") {
  CHECK_THROWS_AS(DyadicGrid(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(DyadicGrid(1, -1), std::invalid_argument);
  CHECK_THROWS_AS(DyadicGrid(1, 2, 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(DyadicGrid(1, 2, 2, 1), std::invalid_argument);
}

TEST_CASE("containment and intersection are nested-or-disjoint") {
  DyadicGrid grid(1, 3);
  const CubeId root = grid.root();
  const CubeId left = make_cube(1, {0});
  const CubeId right = make_cube(1, {1});
  const CubeId cell = make_cube(3, {2});
  CHECK(grid.contains(root, left));
  CHECK(grid.contains(left, cell));
  CHECK_FALSE(grid.contains(right, cell));
  CHECK_FALSE(grid.contains(left, root));
  CHECK(grid.intersects(left, cell));
  CHECK_FALSE(grid.intersects(left, right));
  // Virtual ancestors contain everything on the spine.
  CHECK(grid.contains(make_cube(-1, {0}), root));
  CHECK_FALSE(grid.contains(make_cube(-1, {1}), root));
}

TEST_CASE("cells are ordered lexicographically by index") {
  DyadicGrid grid(2, 2);
  REQUIRE(grid.cell_count() == 16);
  // index (i0, i1) maps to i0*4 + i1
  CHECK(grid.cell_linear(make_cube(2, {0, 0})) == 0);
  CHECK(grid.cell_linear(make_cube(2, {0, 3})) == 3);
  CHECK(grid.cell_linear(make_cube(2, {1, 0})) == 4);
  CHECK(grid.cell_linear(make_cube(2, {3, 3})) == 15);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    CHECK(grid.cell_linear(grid.cell_at(c)) == c);
  }
}

TEST_CASE("cells_in covers cubes, virtual ancestors, and padding") {
  DyadicGrid grid(1, 2);
  CHECK(grid.cells_in(grid.root()).size() == 4);
  CHECK(grid.cells_in(make_cube(1, {0})) == std::vector<std::size_t>{0, 1});
  // Spine ancestor sees every cell, off-spine sees none.
  CHECK(grid.cells_in(make_cube(-1, {0})).size() == 4);
  CHECK(grid.cells_in(make_cube(-1, {1})).empty());
  // Sub-cell cubes contain no whole cell.
  CHECK(grid.cells_in(make_cube(3, {0})).empty());
  CHECK(grid.containing_cell(make_cube(3, {5})) == make_cube(2, {2}));
  CHECK(grid.containing_cell(make_cube(4, {0})) == make_cube(2, {0}));
}

TEST_CASE("measure units are exact powers of two") {
  DyadicGrid grid(1, 2, 2, 2);  // max level 4
  CHECK(grid.measure_units(grid.root()) == 16);
  CHECK(grid.measure_units(make_cube(2, {3})) == 4);
  CHECK(grid.measure_units(make_cube(4, {0})) == 1);
  CHECK(grid.measure_units(make_cube(-2, {0})) == 64);
  CHECK(grid.measure(make_cube(-1, {0})) == 2.0);
}

TEST_CASE("overlap of a cube with a cell") {
  DyadicGrid grid(1, 2);
  CHECK(grid.overlap(grid.root(), 0) == 0.25);
  CHECK(grid.overlap(make_cube(2, {1}), 1) == 0.25);
  CHECK(grid.overlap(make_cube(2, {1}), 2) == 0.0);
  CHECK(grid.overlap(make_cube(3, {2}), 1) == 0.125);  // sub-cell
  CHECK(grid.overlap(make_cube(-1, {0}), 3) == 0.25);
}

TEST_CASE("unit cube enumeration") {
  DyadicGrid grid(1, 3);
  CHECK(grid.cubes_at_level(0).size() == 1);
  CHECK(grid.cubes_at_level(3).size() == 8);
  CHECK(grid.unit_cubes().size() == 15);
  DyadicGrid plane(2, 2);
  CHECK(plane.unit_cubes().size() == 1 + 4 + 16);
}

TEST_CASE("cell set algebra") {
  CellSet a(8);
  a.insert(1);
  a.insert(3);
  a.insert(5);
  CellSet b(8);
  b.insert(3);
  b.insert(6);
  CHECK((a & b).cells() == std::vector<std::size_t>{3});
  CHECK((a | b).size() == 4);
  CHECK((a - b).cells() == std::vector<std::size_t>{1, 5});
  CHECK(a.complement().size() == 5);
  CHECK((a & b).is_subset_of(a));
  CHECK_FALSE(a.is_subset_of(b));
  CellSet full(4, true);
  CHECK(full.full());
  CHECK(full.complement().empty());
}

TEST_CASE("region measure multiplies overlaps") {
  DyadicGrid grid(1, 2);
  CellSet cells(4);
  cells.insert(0);
  cells.insert(1);
  CHECK(region_measure(grid, {grid.root(), cells}) == 0.5);
  CHECK(region_measure(grid, {make_cube(1, {1}), cells}) == 0.0);
  CHECK(region_measure(grid, {make_cube(3, {1}), cells}) == 0.125);
}
