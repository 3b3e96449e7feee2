#include "twl/decompositions.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace twl {

namespace {

constexpr double kRelTol = 1e-10;

void require_nonnegative(const StepFunction& f, const char* where) {
  for (double v : f.values()) {
    if (v < 0.0) throw std::invalid_argument(std::string(where) + ": requires f >= 0");
  }
}

// Maximal dyadic cubes contained in omega; their children form the Whitney
// family. Maximal-with-respect-to-inclusion cubes are unique in a dyadic
// grid, so no tie-breaking arises.
void collect_maximal(const DyadicGrid& grid, const CellSet& omega, const CubeId& cube,
                     std::vector<CubeId>& out) {
  bool all = true;
  bool any = false;
  for (std::size_t c : grid.cells_in(cube)) {
    if (omega.contains(c)) {
      any = true;
    } else {
      all = false;
    }
    if (!all && any) break;
  }
  if (all) {
    out.push_back(cube);
    return;
  }
  if (!any || cube.level >= grid.depth()) return;
  for (const CubeId& child : grid.children(cube)) {
    collect_maximal(grid, omega, child, out);
  }
}

CellSet cells_meeting_cube(const DyadicGrid& grid, const CellSet& cells, const CubeId& cube) {
  CellSet out(cells.capacity());
  cells.for_each([&](std::size_t c) {
    if (grid.overlap(cube, c) > 0.0) out.insert(c);
  });
  return out;
}

double pow2(int k) { return std::ldexp(1.0, k); }

}  // namespace

bool WhitneyFamily::member(const CubeId& cube) const {
  return std::binary_search(cubes.begin(), cubes.end(), cube);
}

WhitneyFamily whitney(const DyadicGrid& grid, const CellSet& omega) {
  if (omega.capacity() != grid.cell_count()) {
    throw std::invalid_argument("whitney: cell set sized for a different grid");
  }
  WhitneyFamily family;
  family.omega = omega;
  if (omega.empty()) return family;
  std::vector<CubeId> maximal;
  collect_maximal(grid, omega, grid.root(), maximal);
  for (const CubeId& parent : maximal) {
    for (const CubeId& child : grid.children(parent)) {
      family.cubes.push_back(child);
    }
  }
  std::sort(family.cubes.begin(), family.cubes.end());
  return family;
}

LevelScan::LevelScan(const DyadicGrid& grid, int k_min, std::vector<WhitneyFamily> levels)
    : grid_(&grid), k_min_(k_min), levels_(std::move(levels)) {
  empty_family_.omega = CellSet(grid.cell_count());
}

const WhitneyFamily& LevelScan::at(int k) const {
  if (levels_.empty() || k > k_max()) return empty_family_;
  if (k < k_min_) return levels_.front();
  return levels_[static_cast<std::size_t>(k - k_min_)];
}

CellSet LevelScan::omega(int k) const { return at(k).omega; }

LevelScan level_sets(const Instance& instance, const StepFunction& f) {
  require_nonnegative(f, "level_sets");
  const DyadicGrid& grid = instance.grid();
  const StepFunction tbar = apply_Tbar(instance, f);
  const double top = tbar.max_value();
  if (!(top > 0.0)) return LevelScan(grid, 0, {});
  const double bottom = tbar.min_positive();
  const int k_min = static_cast<int>(std::floor(std::log2(bottom))) - 1;
  const int k_max = static_cast<int>(std::ceil(std::log2(top)));
  if (k_max - k_min > 8192) {
    throw std::runtime_error("level_sets: value range spans too many dyadic levels");
  }
  std::vector<WhitneyFamily> levels;
  levels.reserve(static_cast<std::size_t>(k_max - k_min + 1));
  for (int k = k_min; k <= k_max; ++k) {
    WhitneyFamily family = whitney(grid, superlevel_set(tbar, pow2(k)));
    family.k = k;
    levels.push_back(std::move(family));
  }
  return LevelScan(grid, k_min, std::move(levels));
}

std::map<CubeId, CubeRegion> ek_sets(const Instance& instance, const StepFunction& f,
                                     int k, const WhitneyFamily& family) {
  const DyadicGrid& grid = instance.grid();
  const StepFunction tbar = apply_Tbar(instance, f);
  if (!(superlevel_set(tbar, pow2(k)) == family.omega)) {
    throw std::invalid_argument("ek_sets: family does not decompose the level-k set");
  }
  const CellSet band =
      superlevel_set(tbar, pow2(k + 2)) - superlevel_set(tbar, pow2(k + 3));
  std::map<CubeId, CubeRegion> out;
  for (const CubeId& q : family.cubes) {
    out.emplace(q, CubeRegion{q, cells_meeting_cube(grid, band, q)});
  }
  return out;
}

MaxPrincipleResult max_principle_check(const Instance& instance, const StepFunction& f,
                                       int k, const CubeId& q) {
  require_nonnegative(f, "max_principle_check");
  const DyadicGrid& grid = instance.grid();
  const StepFunction tbar = apply_Tbar(instance, f);
  const WhitneyFamily family = whitney(grid, superlevel_set(tbar, pow2(k)));
  if (!family.member(q)) {
    throw std::invalid_argument("max_principle_check: cube is not a Whitney cube of the level-" +
                                std::to_string(k) + " set");
  }
  const CubeId q1 = grid.parent(q);
  const CubeId q2 = grid.parent(q1);

  const auto out_masses = tbar_masses(instance, restrict_inside(f, q2));
  const auto masks = split_masks(instance, q1);
  const StepFunction out_part =
      tbar_from_masses(instance, out_masses, instance.exponents().q, &masks.outside);
  const StepFunction far_part = apply_Tbar(instance, restrict_outside(f, q2));

  MaxPrincipleResult res;
  res.bound = pow2(k);
  res.out_val_max = max_over_cube(out_part, q);
  res.far_val_max = max_over_cube(far_part, q);
  res.pass = res.out_val_max <= res.bound * (1.0 + kRelTol) &&
             res.far_val_max <= res.bound * (1.0 + kRelTol);
  return res;
}

EkBoundCheck ek_inner_bound_check(const Instance& instance, const StepFunction& f,
                                  int k, const WhitneyFamily& family) {
  const DyadicGrid& grid = instance.grid();
  const auto regions = ek_sets(instance, f, k, family);
  EkBoundCheck check;
  const double bound = pow2(k);
  for (const auto& [q, region] : regions) {
    if (region.cells.empty()) continue;
    const CubeId q1 = grid.parent(q);
    const auto masses = tbar_masses(instance, restrict_inside(f, q1));
    const auto masks = split_masks(instance, q1);
    const StepFunction in_part =
        tbar_from_masses(instance, masses, instance.exponents().q, &masks.inside);
    region.cells.for_each([&](std::size_t c) {
      if (grid.overlap(q, c) > 0.0) {
        check.min_ratio = std::min(check.min_ratio, in_part[c] / bound);
      }
    });
  }
  check.pass = !(check.min_ratio < 1.0 - kRelTol);
  return check;
}

bool CoronaFamily::is_principal(const CubeId& cube) const {
  return std::binary_search(principal.begin(), principal.end(), cube);
}

CoronaFamily corona(const Instance& instance, const StepFunction& f,
                    const std::vector<CubeId>& input_cubes) {
  require_nonnegative(f, "corona");
  const DyadicGrid& grid = instance.grid();
  CoronaFamily family;
  if (input_cubes.empty()) return family;

  std::vector<CubeId> inputs = input_cubes;
  std::sort(inputs.begin(), inputs.end());
  inputs.erase(std::unique(inputs.begin(), inputs.end()), inputs.end());

  std::map<CubeId, double> avg;
  for (const CubeId& q : inputs) {
    if (!grid.inside_unit(q)) {
      throw std::invalid_argument("corona: input cube " + to_string(q) +
                                  " lies outside the unit cube");
    }
    const double mass = integrate_cube(instance.sigma().fn(), q);
    avg[q] = integrate_cube(f, instance.sigma().fn(), q) / mass;
  }

  auto strictly_contains = [&](const CubeId& outer, const CubeId& inner) {
    return outer != inner && grid.contains(outer, inner);
  };

  // Maximal input cubes seed the principal family.
  std::set<CubeId> input_set(inputs.begin(), inputs.end());
  std::vector<CubeId> stack;
  for (const CubeId& q : inputs) {
    bool covered = false;
    CubeId walk = q;
    while (walk.level > 0) {
      walk = grid.parent(walk);
      if (input_set.count(walk)) {
        covered = true;
        break;
      }
    }
    if (!covered) stack.push_back(q);
  }

  std::set<CubeId> principal(stack.begin(), stack.end());
  while (!stack.empty()) {
    const CubeId g = stack.back();
    stack.pop_back();
    const double threshold = 2.0 * avg[g];
    // Maximal descendants whose σ-average strictly more than doubles.
    std::vector<CubeId> candidates;
    for (const CubeId& q : inputs) {
      if (strictly_contains(g, q) && avg[q] > threshold) candidates.push_back(q);
    }
    std::set<CubeId> candidate_set(candidates.begin(), candidates.end());
    for (const CubeId& q : candidates) {
      bool covered = false;
      CubeId walk = q;
      while (walk != g && walk.level > g.level) {
        walk = grid.parent(walk);
        if (walk != g && candidate_set.count(walk)) {
          covered = true;
          break;
        }
      }
      if (!covered && principal.insert(q).second) stack.push_back(q);
    }
  }

  family.principal.assign(principal.begin(), principal.end());
  for (const CubeId& q : inputs) {
    CubeId walk = q;
    for (;;) {
      if (principal.count(walk)) {
        family.gamma.emplace(q, walk);
        break;
      }
      if (walk.level <= 0) {
        throw std::logic_error("corona: no principal cube contains " + to_string(q));
      }
      walk = grid.parent(walk);
    }
  }
  return family;
}

CoronaCarleson corona_carleson_sum(const Instance& instance, const StepFunction& f,
                                   const CoronaFamily& family) {
  const DyadicGrid& grid = instance.grid();
  const double vcell = grid.cell_measure();
  const double r = instance.exponents().r;
  CoronaCarleson out;
  for (const CubeId& g : family.principal) {
    const double mass = integrate_cube(instance.sigma().fn(), g);
    const double mean = integrate_cube(f, instance.sigma().fn(), g) / mass;
    out.lhs += mass * std::pow(mean, r);
  }
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    out.rhs += std::pow(f[c], r) * instance.sigma()[c] * vcell;
  }
  return out;
}

NeighborFamilies neighbor_families(const LevelScan& scan, int k, const CubeId& q) {
  const DyadicGrid& grid = scan.grid();
  const WhitneyFamily& family = scan.at(k);
  if (!family.member(q)) {
    throw std::invalid_argument("neighbor_families: cube is not a Whitney cube at level " +
                                std::to_string(k));
  }
  const CubeId q1 = grid.parent(q);
  NeighborFamilies out;
  for (const CubeId& other : family.cubes) {
    if (grid.intersects(other, q1)) out.n_cubes.push_back(other);
  }
  out.crowd = out.n_cubes.size();

  const WhitneyFamily& upper = scan.at(k + 3);
  std::uint64_t covered_units = 0;
  bool all_inside = true;
  for (const CubeId& r : upper.cubes) {
    if (grid.intersects(r, q1)) {
      out.r_cubes.push_back(r);
      if (grid.contains(q1, r)) {
        covered_units += grid.measure_units(r);
      } else {
        all_inside = false;
      }
    }
  }
  std::uint64_t target_units = 0;
  for (std::size_t c : grid.cells_in(q1)) {
    if (upper.omega.contains(c)) {
      target_units += grid.measure_units(grid.cell_at(c));
    }
  }
  out.union_identity = all_inside && covered_units == target_units;
  return out;
}

ConstancyCheck dual_constancy_check(const Instance& instance, const StepFunction& f,
                                    int k, const CubeId& q, const CubeId& r) {
  const DyadicGrid& grid = instance.grid();
  const StepFunction tbar = apply_Tbar(instance, f);
  const WhitneyFamily family = whitney(grid, superlevel_set(tbar, pow2(k)));
  if (!family.member(q)) {
    throw std::invalid_argument("dual_constancy_check: cube is not a Whitney cube at level " +
                                std::to_string(k));
  }
  const WhitneyFamily upper = whitney(grid, superlevel_set(tbar, pow2(k + 3)));
  if (!upper.member(r) || !grid.intersects(r, grid.parent(q))) {
    throw std::invalid_argument("dual_constancy_check: cube is not a level-(k+3) neighbor");
  }
  const CellSet band =
      superlevel_set(tbar, pow2(k + 2)) - superlevel_set(tbar, pow2(k + 3));
  const CubeRegion ek{q, cells_meeting_cube(grid, band, q)};
  const BSequence a = canonical_sequence(instance, f);
  const StepFunction u =
      u_from_masses(instance, u_masses_restricted(instance, a.family(), ek));

  ConstancyCheck check;
  if (r.level > grid.depth()) {
    check.values.push_back(u[grid.cell_linear(grid.containing_cell(r))]);
  } else {
    for (std::size_t c : grid.cells_in(r)) check.values.push_back(u[c]);
  }
  double lo = check.values.front();
  double hi = lo;
  for (double v : check.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  check.constant = (hi - lo) <= kRelTol * std::max(scale, 1e-300);
  return check;
}

namespace {

ClassifiedLevel classify_impl(const Instance& instance, const StepFunction& f,
                              const StepFunction& tbar, const ComponentFamily& a,
                              int k, double eta) {
  const DyadicGrid& grid = instance.grid();
  ClassifiedLevel out;
  out.k = k;
  out.eta = eta;
  const WhitneyFamily family = whitney(grid, superlevel_set(tbar, pow2(k)));
  const CellSet omega_k3 = superlevel_set(tbar, pow2(k + 3));
  const CellSet band = superlevel_set(tbar, pow2(k + 2)) - omega_k3;
  const double vcell = grid.cell_measure();
  for (const CubeId& q : family.cubes) {
    const CubeRegion ek{q, cells_meeting_cube(grid, band, q)};
    out.ek.emplace(q, ek);
    const double w_ek = integrate_region(StepFunction(grid, 1.0), instance.w().fn(), ek);
    const double w_q = integrate_cube(instance.w().fn(), q);

    const StepFunction u =
        u_from_masses(instance, u_masses_restricted(instance, a, ek));
    const CubeId q1 = grid.parent(q);
    double alpha = 0.0;
    double beta = 0.0;
    for (std::size_t c : grid.cells_in(q1)) {
      const double term = f[c] * u[c] * instance.sigma()[c] * vcell;
      if (omega_k3.contains(c)) {
        beta += term;
      } else {
        alpha += term;
      }
    }
    out.alpha.emplace(q, alpha);
    out.beta.emplace(q, beta);
    if (w_ek <= eta * w_q) {
      out.class1.push_back(q);
    } else if (alpha > beta) {
      out.class2.push_back(q);
    } else {
      out.class3.push_back(q);
    }
  }
  return out;
}

}  // namespace

ClassifiedLevel classify_cubes(const Instance& instance, const StepFunction& f,
                               int k, double eta) {
  if (!(0.0 < eta && eta < 1.0)) {
    throw std::invalid_argument("classify_cubes: eta must lie in (0,1)");
  }
  require_nonnegative(f, "classify_cubes");
  const StepFunction tbar = apply_Tbar(instance, f);
  const BSequence a = canonical_sequence(instance, f);
  return classify_impl(instance, f, tbar, a.family(), k, eta);
}

std::map<CubeId, int> occurrence_count(const Instance& instance, const StepFunction& f,
                                       double eta) {
  if (!(0.0 < eta && eta < 1.0)) {
    throw std::invalid_argument("occurrence_count: eta must lie in (0,1)");
  }
  require_nonnegative(f, "occurrence_count");
  const DyadicGrid& grid = instance.grid();
  std::map<CubeId, int> counts;
  const LevelScan scan = level_sets(instance, f);
  if (scan.empty()) return counts;
  const StepFunction tbar = apply_Tbar(instance, f);
  const BSequence a = canonical_sequence(instance, f);
  std::map<CubeId, std::set<int>> hits;
  // Levels below the window repeat the support and carry empty E_k bands.
  for (int k = scan.k_min() - 3; k <= scan.k_max(); ++k) {
    const ClassifiedLevel cl = classify_impl(instance, f, tbar, a.family(), k, eta);
    if (cl.class3.empty()) continue;
    const WhitneyFamily& upper = scan.at(k + 3);
    for (const CubeId& q : cl.class3) {
      const CubeId q1 = grid.parent(q);
      for (const CubeId& r : upper.cubes) {
        if (grid.intersects(r, q1)) hits[r].insert(k);
      }
    }
  }
  for (const auto& [cube, ks] : hits) {
    counts[cube] = static_cast<int>(ks.size());
  }
  return counts;
}

}  // namespace twl
