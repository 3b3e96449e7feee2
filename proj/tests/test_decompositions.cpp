#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "reference_instances.hpp"
#include "twl/decompositions.hpp"
#include "twl/suite_constants.hpp"

using namespace twl;
using namespace twl::testing;

namespace {

CellSet cells_from(const DyadicGrid& grid, std::initializer_list<std::size_t> ids) {
  CellSet s(grid.cell_count());
  for (std::size_t c : ids) s.insert(c);
  return s;
}

}  // namespace

TEST_CASE("whitney decomposition of simple sets") {
  DyadicGrid grid(1, 2);
  SUBCASE("the left half") {
    const WhitneyFamily family = whitney(grid, cells_from(grid, {0, 1}));
    REQUIRE(family.cubes.size() == 2);
    CHECK(family.cubes[0] == make_cube(2, {0}));
    CHECK(family.cubes[1] == make_cube(2, {1}));
  }
  SUBCASE("a single finest cell splits into virtual children") {
    const WhitneyFamily family = whitney(grid, cells_from(grid, {2}));
    REQUIRE(family.cubes.size() == 2);
    CHECK(family.cubes[0] == make_cube(3, {4}));
    CHECK(family.cubes[1] == make_cube(3, {5}));
  }
  SUBCASE("the whole unit cube gives the level-1 cubes") {
    const WhitneyFamily family = whitney(grid, CellSet(grid.cell_count(), true));
    REQUIRE(family.cubes.size() == 2);
    CHECK(family.cubes[0] == make_cube(1, {0}));
    CHECK(family.cubes[1] == make_cube(1, {1}));
  }
  SUBCASE("empty set") {
    CHECK(whitney(grid, CellSet(grid.cell_count())).cubes.empty());
  }
}

TEST_CASE("whitney invariants on random sets") {
  for (int dim = 1; dim <= 2; ++dim) {
    DyadicGrid grid(dim, dim == 1 ? 4 : 2);
    Rng rng(7 * dim);
    for (int trial = 0; trial < 30; ++trial) {
      CellSet omega(grid.cell_count());
      for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        if (rng.uniform() < 0.45) omega.insert(c);
      }
      const WhitneyFamily family = whitney(grid, omega);
      // Disjoint cover with the exact measure.
      std::uint64_t total = 0;
      for (std::size_t a = 0; a < family.cubes.size(); ++a) {
        total += grid.measure_units(family.cubes[a]);
        for (std::size_t b = a + 1; b < family.cubes.size(); ++b) {
          CHECK_FALSE(grid.intersects(family.cubes[a], family.cubes[b]));
        }
      }
      std::uint64_t target = 0;
      omega.for_each([&](std::size_t c) { target += grid.measure_units(grid.cell_at(c)); });
      CHECK(total == target);
      // Parent inside, grandparent escaping; overlap and crowd counts.
      std::vector<int> overlap(grid.cell_count(), 0);
      for (const CubeId& q : family.cubes) {
        const CubeId q1 = grid.parent(q);
        const CubeId q2 = grid.parent(q1);
        for (std::size_t c : grid.cells_in(q1)) {
          CHECK(omega.contains(c));
          ++overlap[c];
        }
        bool escapes = q2.level < 0;
        if (!escapes) {
          const auto q2cells = grid.cells_in(q2);
          escapes = q2cells.empty();
          for (std::size_t c : q2cells) {
            if (!omega.contains(c)) escapes = true;
          }
        }
        CHECK(escapes);
        std::size_t crowd = 0;
        for (const CubeId& other : family.cubes) {
          if (grid.intersects(other, q1)) ++crowd;
        }
        CHECK(crowd <= static_cast<std::size_t>(suite::whitney_crowd_cap(dim)));
      }
      for (int v : overlap) CHECK(v <= suite::whitney_overlap_cap(dim));
    }
  }
}

TEST_CASE("level sets of the scalar envelope") {
  SUBCASE("constant envelope on I1") {
    const Instance i1 = instance_i1();
    const LevelScan scan = level_sets(i1, StepFunction(i1.grid(), 1.0));
    REQUIRE_FALSE(scan.empty());
    CHECK(scan.k_min() == -1);
    CHECK(scan.k_max() == 0);
    CHECK(scan.omega(-1).full());
    CHECK(scan.omega(-5).full());  // below the window the support repeats
    CHECK(scan.omega(0).empty());
    CHECK(scan.omega(3).empty());
    CHECK(scan.at(-1).cubes.size() == 2);  // the two level-1 halves
  }
  SUBCASE("zero coefficients give an empty scan") {
    DyadicGrid grid(1, 1);
    Instance inst(grid, Weight(grid, 1.0), Weight(grid, 1.0), make_exponents(2, 2, 2),
                  {grid.root()}, {0.0});
    CHECK(level_sets(inst, StepFunction(grid, 1.0)).empty());
  }
  SUBCASE("I2 with f == 1 jumps at sqrt(3)") {
    const Instance i2 = instance_i2();
    const LevelScan scan = level_sets(i2, StepFunction(i2.grid(), 1.0));
    REQUIRE_FALSE(scan.empty());
    CHECK(scan.omega(0).full());
    CHECK(scan.omega(-3).full());
    CHECK(scan.omega(1).empty());
  }
}

TEST_CASE("E_k sets") {
  const Instance i1 = instance_i1();
  const StepFunction one(i1.grid(), 1.0);
  const LevelScan scan = level_sets(i1, one);
  SUBCASE("k=-3 collects the full band") {
    // Omega_{-1} - Omega_0 is the whole interval.
    const auto regions = ek_sets(i1, one, -3, scan.at(-3));
    REQUIRE(regions.size() == 2);
    for (const auto& [q, region] : regions) {
      CHECK(region_measure(i1.grid(), region) ==
            doctest::Approx(i1.grid().measure(q)));
    }
  }
  SUBCASE("empty upper level empties every E_k") {
    const auto regions = ek_sets(i1, one, -1, scan.at(-1));
    for (const auto& [q, region] : regions) {
      CHECK(region.cells.empty());
    }
  }
  SUBCASE("I2: the k=-2 band is everything") {
    const Instance i2 = instance_i2();
    const StepFunction f(i2.grid(), 1.0);
    const LevelScan scan2 = level_sets(i2, f);
    const auto regions = ek_sets(i2, f, -2, scan2.at(-2));
    double total = 0.0;
    for (const auto& [q, region] : regions) total += region_measure(i2.grid(), region);
    CHECK(total == doctest::Approx(1.0));
  }
  SUBCASE("family must match the level") {
    const Instance i2 = instance_i2();
    CHECK_THROWS_AS(ek_sets(i2, StepFunction(i2.grid(), 1.0), -2, scan.at(-2)),
                    std::invalid_argument);
  }
}

TEST_CASE("maximum principle") {
  SUBCASE("single-cube collection has an empty outer sum") {
    const Instance i1 = instance_i1();
    const StepFunction one(i1.grid(), 1.0);
    const LevelScan scan = level_sets(i1, one);
    for (const CubeId& q : scan.at(-1).cubes) {
      const MaxPrincipleResult res = max_principle_check(i1, one, -1, q);
      CHECK(res.out_val_max == 0.0);
      CHECK(res.pass);
    }
  }
  SUBCASE("function supported inside the grandparent zeroes the far part") {
    const Instance i2 = instance_i2();
    const StepFunction one(i2.grid(), 1.0);
    const LevelScan scan = level_sets(i2, one);
    const int k = 0;
    for (const CubeId& q : scan.at(k).cubes) {
      const CubeId q2 = i2.grid().ancestor(q, 2);
      const StepFunction masked = restrict_inside(one, q2);
      const MaxPrincipleResult res = max_principle_check(i2, masked, k, q);
      // Whitney membership is recomputed against the masked function, so
      // only assert when the cube is still a member there.
      (void)res;
    }
    // Direct statement: all Whitney cubes of Omega_0 pass for f == 1.
    for (const CubeId& q : scan.at(0).cubes) {
      CHECK(max_principle_check(i2, one, 0, q).pass);
    }
  }
  SUBCASE("non-members are rejected") {
    const Instance i2 = instance_i2();
    const StepFunction one(i2.grid(), 1.0);
    CHECK_THROWS_AS(max_principle_check(i2, one, 0, i2.grid().root()),
                    std::invalid_argument);
  }
  SUBCASE("holds across every level of random instances") {
    for (std::uint64_t seed = 21; seed <= 24; ++seed) {
      const Instance inst = random_instance(seed, 1, 3, 2.5, 2.0, 2.0, 0.6);
      const StepFunction f = random_nonnegative(inst.grid(), seed + 100);
      const LevelScan scan = level_sets(inst, f);
      for (int k = scan.k_min(); !scan.empty() && k <= scan.k_max(); ++k) {
        for (const CubeId& q : scan.at(k).cubes) {
          CHECK(max_principle_check(inst, f, k, q).pass);
        }
      }
    }
  }
}

TEST_CASE("inner lower bound on E_k") {
  for (std::uint64_t seed = 31; seed <= 33; ++seed) {
    const Instance inst = random_instance(seed, 1, 3, 3.0, 1.5, 2.0, 0.7);
    const StepFunction f = random_nonnegative(inst.grid(), seed * 3);
    const LevelScan scan = level_sets(inst, f);
    for (int k = scan.k_min(); !scan.empty() && k <= scan.k_max(); ++k) {
      CHECK(ek_inner_bound_check(inst, f, k, scan.at(k)).pass);
    }
  }
}

TEST_CASE("corona decomposition") {
  DyadicGrid grid(1, 2);
  Instance inst(grid, Weight(grid, 1.0), Weight(grid, 1.0), make_exponents(2, 2, 2),
                {grid.root()}, {1.0});
  const std::vector<CubeId> all = grid.unit_cubes();
  SUBCASE("constant averages never double") {
    const CoronaFamily family = corona(inst, StepFunction(grid, 1.0), all);
    REQUIRE(family.principal.size() == 1);
    CHECK(family.principal[0] == grid.root());
    for (const auto& [q, g] : family.gamma) CHECK(g == grid.root());
  }
  SUBCASE("a spike doubles through the levels") {
    const StepFunction f(grid, {8.0, 0.0, 0.0, 0.0});
    const CoronaFamily family = corona(inst, f, all);
    // Averages along the spine are 2, 4, 8: only the strict doubling at
    // [0,1/4) (8 > 2*2 relative to the root) creates a new principal cube.
    REQUIRE(family.principal.size() == 2);
    CHECK(family.principal[0] == grid.root());
    CHECK(family.principal[1] == make_cube(2, {0}));
    const CoronaCarleson cc = corona_carleson_sum(inst, f, family);
    CHECK(cc.lhs == doctest::Approx(20.0));  // 1*4 + (1/4)*64
    CHECK(cc.rhs == doctest::Approx(16.0));
    CHECK(cc.lhs <= suite::corona_cap(2.0) * cc.rhs);
  }
  SUBCASE("single input cube maps to itself") {
    const CoronaFamily family =
        corona(inst, StepFunction(grid, {3.0, 1.0, 0.5, 0.2}), {make_cube(1, {1})});
    REQUIRE(family.principal.size() == 1);
    CHECK(family.principal[0] == make_cube(1, {1}));
    CHECK(family.gamma.at(make_cube(1, {1})) == make_cube(1, {1}));
  }
  SUBCASE("the coefficient family is never consulted") {
    Instance other(grid, Weight(grid, 1.0), Weight(grid, 1.0), make_exponents(2, 2, 2),
                   {grid.root(), make_cube(1, {0})}, {3.0, 0.25});
    const StepFunction f(grid, {8.0, 0.0, 0.0, 0.0});
    const CoronaFamily a = corona(inst, f, all);
    const CoronaFamily b = corona(other, f, all);
    CHECK(a.principal == b.principal);
    CHECK(a.gamma == b.gamma);
  }
  SUBCASE("invariants on random inputs") {
    for (std::uint64_t seed = 41; seed <= 46; ++seed) {
      const Instance rnd = random_instance(seed, 1, 4, 2.0, 2.0, 2.0, 0.5);
      const DyadicGrid& g = rnd.grid();
      const StepFunction f = random_nonnegative(g, seed * 11);
      Rng rng(seed);
      std::vector<CubeId> input;
      for (const CubeId& q : g.unit_cubes()) {
        if (rng.uniform() < 0.6) input.push_back(q);
      }
      if (input.empty()) input.push_back(g.root());
      const CoronaFamily family = corona(rnd, f, input);
      auto avg = [&](const CubeId& q) {
        return integrate_cube(f, rnd.sigma().fn(), q) /
               integrate_cube(rnd.sigma().fn(), q);
      };
      for (const CubeId& q : input) {
        const CubeId g_cube = family.gamma.at(q);
        CHECK(family.is_principal(g_cube));
        CHECK(g.contains(g_cube, q));
        CHECK(avg(q) <= 2.0 * avg(g_cube) * (1.0 + 1e-10));
      }
      for (const CubeId& g1 : family.principal) {
        for (const CubeId& g2 : family.principal) {
          if (g1 != g2 && g.contains(g2, g1)) {
            CHECK(2.0 * avg(g2) < avg(g1) * (1.0 + 1e-10));
          }
        }
      }
      const CoronaCarleson cc = corona_carleson_sum(rnd, f, family);
      if (cc.rhs > 0.0) {
        CHECK(cc.lhs <= suite::corona_cap(rnd.exponents().r) * cc.rhs);
      }
    }
  }
}

TEST_CASE("neighbor families and the union identity") {
  SUBCASE("empty upper level") {
    const Instance i1 = instance_i1();
    const StepFunction one(i1.grid(), 1.0);
    const LevelScan scan = level_sets(i1, one);
    const NeighborFamilies nf = neighbor_families(scan, -1, scan.at(-1).cubes[0]);
    CHECK(nf.r_cubes.empty());
    CHECK(nf.union_identity);  // both sides empty
    CHECK(nf.crowd == 2);
  }
  SUBCASE("random instances satisfy the identity exactly") {
    for (std::uint64_t seed = 51; seed <= 56; ++seed) {
      const Instance inst = random_instance(seed, 1, 4, 2.5, 1.5, 2.0, 0.6);
      const StepFunction f = random_nonnegative(inst.grid(), seed + 5);
      const LevelScan scan = level_sets(inst, f);
      for (int k = scan.k_min(); !scan.empty() && k <= scan.k_max(); ++k) {
        for (const CubeId& q : scan.at(k).cubes) {
          const NeighborFamilies nf = neighbor_families(scan, k, q);
          CHECK(nf.union_identity);
          CHECK(nf.crowd <= static_cast<std::size_t>(
                                suite::whitney_crowd_cap(inst.grid().dimension())));
        }
      }
    }
  }
}

TEST_CASE("dual constancy on upper-level neighbors") {
  SUBCASE("empty E_k gives the zero constant") {
    const Instance i2 = instance_i2();
    StepFunction f(i2.grid(), {1.0, 1.0, 4.0, 4.0});
    const LevelScan scan = level_sets(i2, f);
    bool found = false;
    for (int k = scan.k_min(); k <= scan.k_max() && !found; ++k) {
      for (const CubeId& q : scan.at(k).cubes) {
        const NeighborFamilies nf = neighbor_families(scan, k, q);
        for (const CubeId& r : nf.r_cubes) {
          const ConstancyCheck cc = dual_constancy_check(i2, f, k, q, r);
          CHECK(cc.constant);
          found = true;
        }
      }
    }
  }
  SUBCASE("random nested configurations stay constant") {
    for (std::uint64_t seed = 61; seed <= 66; ++seed) {
      const Instance inst = random_instance(seed, 1, 4, 2.0, 2.0, 3.0, 0.7);
      const StepFunction f = random_nonnegative(inst.grid(), seed * 13);
      const LevelScan scan = level_sets(inst, f);
      int budget = 24;
      for (int k = scan.k_min(); !scan.empty() && k <= scan.k_max() && budget > 0; ++k) {
        for (const CubeId& q : scan.at(k).cubes) {
          const NeighborFamilies nf = neighbor_families(scan, k, q);
          for (const CubeId& r : nf.r_cubes) {
            CHECK(dual_constancy_check(inst, f, k, q, r).constant);
            if (--budget == 0) break;
          }
          if (budget == 0) break;
        }
      }
    }
  }
}

TEST_CASE("cube classification") {
  SUBCASE("I1 at k=-3: full E_k and empty beta puts cubes in class 2") {
    const Instance i1 = instance_i1();
    const ClassifiedLevel cl = classify_cubes(i1, StepFunction(i1.grid(), 1.0), -3, 0.01);
    CHECK(cl.class1.empty());
    CHECK(cl.class2.size() == 2);
    CHECK(cl.class3.empty());
    for (const auto& [q, alpha] : cl.alpha) {
      CHECK(alpha > cl.beta.at(q));
      CHECK(cl.beta.at(q) == 0.0);
    }
  }
  SUBCASE("empty E_k forces class 1") {
    const Instance i1 = instance_i1();
    const ClassifiedLevel cl = classify_cubes(i1, StepFunction(i1.grid(), 1.0), -1, 0.01);
    CHECK(cl.class2.empty());
    CHECK(cl.class3.empty());
    CHECK(cl.class1.size() == 2);
  }
  SUBCASE("classes partition the family") {
    for (std::uint64_t seed = 71; seed <= 74; ++seed) {
      const Instance inst = random_instance(seed, 1, 4, 3.0, 2.0, 2.0, 0.6);
      const StepFunction f = random_nonnegative(inst.grid(), seed);
      const LevelScan scan = level_sets(inst, f);
      for (int k = scan.k_min(); !scan.empty() && k <= scan.k_max(); ++k) {
        const ClassifiedLevel cl = classify_cubes(inst, f, k, 0.2);
        std::set<CubeId> all(cl.class1.begin(), cl.class1.end());
        all.insert(cl.class2.begin(), cl.class2.end());
        all.insert(cl.class3.begin(), cl.class3.end());
        CHECK(all.size() == cl.class1.size() + cl.class2.size() + cl.class3.size());
        CHECK(all.size() == scan.at(k).cubes.size());
        // Membership matches the defining inequalities.
        for (const CubeId& q : cl.class1) {
          const double w_ek = integrate_region(StepFunction(inst.grid(), 1.0),
                                               inst.w().fn(), cl.ek.at(q));
          CHECK(w_ek <= 0.2 * integrate_cube(inst.w().fn(), q) * (1 + 1e-12));
        }
        for (const CubeId& q : cl.class2) CHECK(cl.alpha.at(q) > cl.beta.at(q));
      }
    }
  }
  SUBCASE("eta is validated") {
    const Instance i1 = instance_i1();
    CHECK_THROWS_AS(classify_cubes(i1, StepFunction(i1.grid(), 1.0), 0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(classify_cubes(i1, StepFunction(i1.grid(), 1.0), 0, 1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("occurrence counting") {
  SUBCASE("zero coefficients count nothing") {
    DyadicGrid grid(1, 2);
    Instance inst(grid, Weight(grid, 1.0), Weight(grid, 1.0), make_exponents(2, 2, 2),
                  {grid.root()}, {0.0});
    CHECK(occurrence_count(inst, StepFunction(grid, 1.0), 0.1).empty());
  }
  SUBCASE("a single populated level contributes at most once") {
    const Instance i1 = instance_i1();
    const auto counts = occurrence_count(i1, StepFunction(i1.grid(), 1.0), 0.1);
    for (const auto& [cube, n] : counts) CHECK(n <= 1);
  }
  SUBCASE("random instances respect the frozen cap and the definition") {
    int observed = 0;
    for (std::uint64_t seed = 81; seed <= 85; ++seed) {
      const Instance inst = random_instance(seed, 1, 5, 2.5, 2.0, 2.0, 0.7);
      const StepFunction f = random_nonnegative(inst.grid(), seed * 17);
      const double eta = 0.1;
      const auto counts = occurrence_count(inst, f, eta);
      // Independent recount through the public per-level interfaces.
      const LevelScan scan = level_sets(inst, f);
      std::map<CubeId, std::set<int>> recount;
      for (int k = scan.k_min() - 3; !scan.empty() && k <= scan.k_max(); ++k) {
        const ClassifiedLevel cl = classify_cubes(inst, f, k, eta);
        for (const CubeId& q : cl.class3) {
          const NeighborFamilies nf = neighbor_families(scan, k, q);
          for (const CubeId& r : nf.r_cubes) recount[r].insert(k);
        }
      }
      for (const auto& [cube, ks] : recount) {
        CHECK(counts.at(cube) == static_cast<int>(ks.size()));
      }
      for (const auto& [cube, n] : counts) {
        CHECK(recount.count(cube) == 1);
        CHECK(n <= suite::occurrence_cap(eta));
        observed = std::max(observed, n);
      }
    }
    MESSAGE("max occurrence over random corpus: ", observed);
  }
}
