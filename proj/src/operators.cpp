#include "twl/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twl {

ComponentFamily::ComponentFamily(const Instance& instance)
    : inst_(&instance),
      vals_(instance.family_size(),
            std::vector<double>(instance.grid().cell_count(), 0.0)) {}

void ComponentFamily::set_value(std::size_t comp, std::size_t cell, double v) {
  const DyadicGrid& grid = inst_->grid();
  if (!grid.contains(inst_->family_cube(comp), grid.cell_at(cell))) {
    throw std::invalid_argument("component value outside its cube");
  }
  vals_[comp][cell] = v;
}

StepFunction ComponentFamily::pointwise_norm(double s) const {
  const DyadicGrid& grid = inst_->grid();
  StepFunction out(grid, 0.0);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    double acc = 0.0;
    for (std::uint32_t comp : inst_->cover(c)) {
      acc += std::pow(std::abs(vals_[comp][c]), s);
    }
    out[c] = std::pow(acc, 1.0 / s);
  }
  return out;
}

bool ComponentFamily::is_zero() const {
  for (const auto& comp : vals_) {
    for (double v : comp) {
      if (v != 0.0) return false;
    }
  }
  return true;
}

BSequence::BSequence(ComponentFamily family, CellSet support)
    : family_(std::move(family)), support_(std::move(support)) {
  if (support_.capacity() != family_.instance().grid().cell_count()) {
    throw std::invalid_argument("BSequence support set sized for a different grid");
  }
}

double BSequence::normalization_defect() const {
  const Instance& inst = family_.instance();
  const double qc = inst.exponents().q_conj;
  double worst = 0.0;
  for (std::size_t c = 0; c < inst.grid().cell_count(); ++c) {
    double acc = 0.0;
    for (std::uint32_t comp : inst.cover(c)) {
      acc += std::pow(std::abs(family_.value(comp, c)), qc);
    }
    if (support_.contains(c)) {
      worst = std::max(worst, std::abs(acc - 1.0));
    } else {
      worst = std::max(worst, std::max(acc - 1.0, 0.0));
    }
  }
  return worst;
}

std::vector<double> operator_masses(const Instance& instance, const StepFunction& f,
                                    const StepFunction& density) {
  require_same_grid(f, density);
  require_same_grid(f, instance.sigma().fn());
  const DyadicGrid& grid = instance.grid();
  const double vcell = grid.cell_measure();
  std::vector<double> masses(instance.family_size(), 0.0);
  for (std::size_t i = 0; i < instance.family_size(); ++i) {
    double sum = 0.0;
    for (std::size_t c : instance.cells_of(i)) sum += f[c] * density[c];
    masses[i] = instance.tau(i) * sum * vcell / instance.cube_measure(i);
  }
  return masses;
}

std::vector<double> tbar_masses(const Instance& instance, const StepFunction& f) {
  return operator_masses(instance, f, instance.sigma().fn());
}

StepFunction tbar_from_masses(const Instance& instance, const std::vector<double>& masses,
                              double s, const std::vector<char>* keep) {
  const DyadicGrid& grid = instance.grid();
  StepFunction out(grid, 0.0);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    double acc = 0.0;
    for (std::uint32_t comp : instance.cover(c)) {
      if (keep && !(*keep)[comp]) continue;
      acc += std::pow(std::abs(masses[comp]), s);
    }
    out[c] = std::pow(acc, 1.0 / s);
  }
  return out;
}

StepFunction u_from_masses(const Instance& instance, const std::vector<double>& masses) {
  const DyadicGrid& grid = instance.grid();
  StepFunction out(grid, 0.0);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    double acc = 0.0;
    for (std::uint32_t comp : instance.cover(c)) acc += masses[comp];
    out[c] = acc;
  }
  return out;
}

std::vector<double> u_masses(const Instance& instance, const ComponentFamily& g) {
  const DyadicGrid& grid = instance.grid();
  const double vcell = grid.cell_measure();
  std::vector<double> masses(instance.family_size(), 0.0);
  for (std::size_t i = 0; i < instance.family_size(); ++i) {
    double sum = 0.0;
    for (std::size_t c : instance.cells_of(i)) sum += g.value(i, c) * instance.w()[c];
    masses[i] = instance.tau(i) * sum * vcell / instance.cube_measure(i);
  }
  return masses;
}

std::vector<double> u_masses_restricted(const Instance& instance, const ComponentFamily& a,
                                        const CubeRegion& region) {
  const DyadicGrid& grid = instance.grid();
  std::vector<double> masses(instance.family_size(), 0.0);
  for (std::size_t i = 0; i < instance.family_size(); ++i) {
    const CubeId& member = instance.family_cube(i);
    // R ∩ E.cube is the finer of the two cubes, or empty.
    CubeId overlap_cube;
    if (grid.contains(member, region.cube)) {
      overlap_cube = region.cube;
    } else if (grid.contains(region.cube, member)) {
      overlap_cube = member;
    } else {
      continue;
    }
    double sum = 0.0;
    region.cells.for_each([&](std::size_t c) {
      const double o = grid.overlap(overlap_cube, c);
      if (o > 0.0) sum += a.value(i, c) * instance.w()[c] * o;
    });
    masses[i] = instance.tau(i) * sum / instance.cube_measure(i);
  }
  return masses;
}

ComponentFamily apply_T(const Instance& instance, const StepFunction& f) {
  const auto masses = tbar_masses(instance, f);
  ComponentFamily out(instance);
  for (std::size_t i = 0; i < instance.family_size(); ++i) {
    for (std::size_t c : instance.cells_of(i)) out.set_value(i, c, masses[i]);
  }
  return out;
}

StepFunction apply_Tbar(const Instance& instance, const StepFunction& f) {
  return tbar_from_masses(instance, tbar_masses(instance, f), instance.exponents().q);
}

StepFunction apply_Tbar_q(const Instance& instance, const StepFunction& f, double s) {
  if (!(s >= 1.0)) throw std::invalid_argument("apply_Tbar_q: exponent must be >= 1");
  return tbar_from_masses(instance, tbar_masses(instance, f), s);
}

StepFunction apply_U(const Instance& instance, const ComponentFamily& g) {
  return u_from_masses(instance, u_masses(instance, g));
}

SplitMasks split_masks(const Instance& instance, const CubeId& q) {
  const DyadicGrid& grid = instance.grid();
  if (!grid.valid(q)) throw std::out_of_range("split_masks: cube outside padded grid");
  SplitMasks masks;
  masks.inside.assign(instance.family_size(), 0);
  masks.outside.assign(instance.family_size(), 0);
  for (std::size_t i = 0; i < instance.family_size(); ++i) {
    const CubeId& member = instance.family_cube(i);
    if (grid.contains(q, member)) {
      masks.inside[i] = 1;
    } else if (grid.contains(member, q) && member != q) {
      masks.outside[i] = 1;
    }
  }
  return masks;
}

TbarSplit apply_Tbar_split(const Instance& instance, const StepFunction& f, const CubeId& q) {
  const auto masses = tbar_masses(instance, f);
  const auto masks = split_masks(instance, q);
  const double s = instance.exponents().q;
  return {tbar_from_masses(instance, masses, s, &masks.inside),
          tbar_from_masses(instance, masses, s, &masks.outside)};
}

BSequence canonical_sequence(const Instance& instance, const StepFunction& f) {
  for (double v : f.values()) {
    if (v < 0.0) throw std::invalid_argument("canonical_sequence requires f >= 0");
  }
  const Exponents& e = instance.exponents();
  const auto masses = tbar_masses(instance, f);
  const StepFunction tbar = tbar_from_masses(instance, masses, e.q);
  ComponentFamily family(instance);
  CellSet support(instance.grid().cell_count());
  for (std::size_t c = 0; c < instance.grid().cell_count(); ++c) {
    if (tbar[c] > 0.0) support.insert(c);
  }
  const double norm_exp = -e.q / e.q_conj;
  for (std::size_t i = 0; i < instance.family_size(); ++i) {
    const double base = std::pow(masses[i], e.q - 1.0);
    if (base == 0.0) continue;
    for (std::size_t c : instance.cells_of(i)) {
      if (tbar[c] > 0.0) {
        family.set_value(i, c, base * std::pow(tbar[c], norm_exp));
      }
    }
  }
  return BSequence(std::move(family), std::move(support));
}

StepFunction maximal_function(const StepFunction& g, const Weight& omega) {
  require_same_grid(g, omega.fn());
  const DyadicGrid& grid = g.grid();
  const double vcell = grid.cell_measure();
  StepFunction out(grid, 0.0);
  for (int level = 0; level <= grid.depth(); ++level) {
    for (const CubeId& cube : grid.cubes_at_level(level)) {
      double mass = 0.0;
      double num = 0.0;
      for (std::size_t c : grid.cells_in(cube)) {
        mass += omega[c] * vcell;
        num += std::abs(g[c]) * omega[c] * vcell;
      }
      const double avg = num / mass;
      for (std::size_t c : grid.cells_in(cube)) {
        out[c] = std::max(out[c], avg);
      }
    }
  }
  return out;
}

DualityPair duality_pair(const Instance& instance, const StepFunction& f,
                         const ComponentFamily& g) {
  const DyadicGrid& grid = instance.grid();
  const double vcell = grid.cell_measure();
  const auto t_masses = tbar_masses(instance, f);
  DualityPair pair;
  // lhs cell by cell through the pairing, rhs through the dual operator.
  for (std::size_t i = 0; i < instance.family_size(); ++i) {
    double acc = 0.0;
    for (std::size_t c : instance.cells_of(i)) {
      acc += g.value(i, c) * instance.w()[c];
    }
    pair.lhs += t_masses[i] * acc * vcell;
  }
  const StepFunction u = u_from_masses(instance, u_masses(instance, g));
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    pair.rhs += u[c] * f[c] * instance.sigma()[c] * vcell;
  }
  return pair;
}

}  // namespace twl
