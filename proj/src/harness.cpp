#include "twl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "twl/json_io.hpp"
#include "twl/parallel.hpp"
#include "twl/rng.hpp"
#include "twl/suite_constants.hpp"

namespace twl {

namespace {

constexpr double kExactTol = 1e-10;

double rel_gap(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

std::vector<double> profile_values(Rng& rng, WeightProfile profile, std::size_t n) {
  std::vector<double> vals(n);
  switch (profile) {
    case WeightProfile::uniform:
      for (auto& v : vals) v = rng.uniform(0.5, 2.0);
      break;
    case WeightProfile::lognormal:
      for (auto& v : vals) v = std::exp(rng.normal());
      break;
    case WeightProfile::spiky: {
      for (auto& v : vals) v = rng.uniform(0.5, 2.0);
      const std::size_t j = static_cast<std::size_t>(rng.below(n));
      vals[j] = 1e3 * *std::max_element(vals.begin(), vals.end());
      break;
    }
    case WeightProfile::near_degenerate: {
      for (auto& v : vals) v = rng.uniform(0.5, 2.0);
      const std::size_t j = static_cast<std::size_t>(rng.below(n));
      vals[j] = 1e-6 * *std::min_element(vals.begin(), vals.end());
      break;
    }
  }
  return vals;
}

std::uint64_t units_overlap(const DyadicGrid& grid, const CubeId& cube, std::size_t cell) {
  const CubeId c = grid.cell_at(cell);
  if (grid.contains(c, cube)) return grid.measure_units(cube);
  if (grid.contains(cube, c)) return grid.measure_units(c);
  return 0;
}

bool cube_inside_cells(const DyadicGrid& grid, const CubeId& cube, const CellSet& cells) {
  // Virtual ancestors strictly contain [0,1)^d, so they always escape a cell set.
  if (cube.level < 0) return false;
  if (cube.level > grid.depth()) {
    CubeId walk = cube;
    while (walk.level > grid.depth()) walk = grid.parent(walk);
    if (!grid.inside_unit(walk)) return false;
    return cells.contains(grid.cell_linear(walk));
  }
  const auto in = grid.cells_in(cube);
  if (in.empty()) return false;
  for (std::size_t c : in) {
    if (!cells.contains(c)) return false;
  }
  return true;
}

struct ItemBuilder {
  VerifyReport* report;
  const Instance* instance;
  double eta;
  std::uint64_t seed;

  void add(const std::string& name, double value, double bound, std::string detail = "") {
    VerifyItem item;
    item.name = name;
    item.value = value;
    item.bound = bound;
    item.detail = std::move(detail);
    item.pass = value <= bound * (1.0 + kExactTol) || (bound == 0.0 && value == 0.0);
    if (!item.pass && report->failure_context.empty()) {
      nlohmann::json replay;
      replay["instance"] = instance_to_json(*instance);
      replay["eta"] = eta;
      replay["seed"] = seed;
      replay["item"] = name;
      replay["value"] = value;
      replay["bound"] = bound;
      replay["detail"] = item.detail;
      report->failure_context = replay.dump();
    }
    report->pass = report->pass && item.pass;
    report->items.push_back(std::move(item));
  }
};

}  // namespace

WeightProfile profile_from_name(const std::string& name) {
  if (name == "uniform") return WeightProfile::uniform;
  if (name == "lognormal") return WeightProfile::lognormal;
  if (name == "spiky") return WeightProfile::spiky;
  if (name == "near_degenerate") return WeightProfile::near_degenerate;
  throw std::invalid_argument("unknown weight profile: " + name);
}

std::string profile_name(WeightProfile profile) {
  switch (profile) {
    case WeightProfile::uniform: return "uniform";
    case WeightProfile::lognormal: return "lognormal";
    case WeightProfile::spiky: return "spiky";
    case WeightProfile::near_degenerate: return "near_degenerate";
  }
  return "uniform";
}

Instance gen_instance(const SweepConfig& config, int index) {
  if (config.exponents.empty()) {
    throw std::invalid_argument("gen_instance: exponent grid is empty");
  }
  Rng rng(config.seed, static_cast<std::uint64_t>(index));
  const int span = config.depth_max - config.depth_min + 1;
  const int depth = config.depth_min + static_cast<int>(rng.below(span));
  const ExponentTriple t =
      config.exponents[static_cast<std::size_t>(index) % config.exponents.size()];
  DyadicGrid grid(config.dimension, depth);
  const std::size_t n = grid.cell_count();
  Weight sigma(grid, profile_values(rng, config.profile, n));
  Weight w(grid, profile_values(rng, config.profile, n));
  std::vector<CubeId> cubes;
  std::vector<double> taus;
  for (const CubeId& cube : grid.unit_cubes()) {
    if (rng.uniform() < config.cube_density) {
      cubes.push_back(cube);
      taus.push_back(std::abs(rng.normal()));
    }
  }
  return Instance(grid, std::move(sigma), std::move(w),
                  make_exponents(t.p, t.r, t.q), std::move(cubes), std::move(taus));
}

const VerifyItem* VerifyReport::find(const std::string& name) const {
  for (const VerifyItem& item : items) {
    if (item.name == name) return &item;
  }
  return nullptr;
}

VerifyReport run_verify(const Instance& instance, double eta,
                        const OptimizerConfig& config, std::uint64_t seed, int trials,
                        const TestingPair* precomputed, const NormEstimate* norm_estimate) {
  const DyadicGrid& grid = instance.grid();
  const Exponents& e = instance.exponents();
  VerifyReport report;
  ItemBuilder items{&report, &instance, eta, seed};
  Rng rng(seed, 0x76657269667921ull);

  // Adjointness over random pairs plus the all-ones pair.
  {
    double worst = 0.0;
    for (int t = -1; t < trials; ++t) {
      StepFunction f(grid, 1.0);
      ComponentFamily g(instance);
      if (t < 0) {
        for (std::size_t i = 0; i < instance.family_size(); ++i) {
          for (std::size_t c : instance.cells_of(i)) g.set_value(i, c, 1.0);
        }
      } else {
        for (std::size_t c = 0; c < grid.cell_count(); ++c) f[c] = std::abs(rng.normal());
        for (std::size_t i = 0; i < instance.family_size(); ++i) {
          for (std::size_t c : instance.cells_of(i)) g.set_value(i, c, rng.normal());
        }
      }
      const DualityPair pair = duality_pair(instance, f, g);
      if (pair.lhs == 0.0 && pair.rhs == 0.0) continue;
      worst = std::max(worst, rel_gap(pair.lhs, pair.rhs));
    }
    items.add("adjointness", worst, 1e-10);
  }

  // Probe functions reused by the decomposition checks.
  std::vector<StepFunction> probes;
  probes.emplace_back(grid, 1.0);
  {
    StepFunction f(grid, 0.0);
    for (std::size_t c = 0; c < grid.cell_count(); ++c) f[c] = std::abs(rng.normal());
    probes.push_back(std::move(f));
  }
  if (norm_estimate && norm_estimate->witness_f.max_value() > 0.0) {
    probes.push_back(norm_estimate->witness_f);
  }

  // Canonical sequence: unit normalization and the Hölder equality case.
  {
    double defect = 0.0;
    double holder = 0.0;
    for (const StepFunction& f : probes) {
      const BSequence a = canonical_sequence(instance, f);
      defect = std::max(defect, a.normalization_defect());
      const auto masses = tbar_masses(instance, f);
      const StepFunction tbar = tbar_from_masses(instance, masses, e.q);
      for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        if (!(tbar[c] > 0.0)) continue;
        double pairing = 0.0;
        for (std::uint32_t i : instance.cover(c)) {
          pairing += masses[i] * a.family().value(i, c);
        }
        holder = std::max(holder, rel_gap(pairing, tbar[c]));
      }
    }
    items.add("canonical-normalization", defect, 1e-10);
    items.add("canonical-holder-equality", holder, 1e-10);
  }

  // The scalar envelope agrees with the pointwise norm of the vector operator.
  {
    double worst = 0.0;
    for (const StepFunction& f : probes) {
      const StepFunction tbar = apply_Tbar(instance, f);
      const StepFunction via_family = apply_T(instance, f).pointwise_norm(e.q);
      for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        if (tbar[c] == 0.0 && via_family[c] == 0.0) continue;
        worst = std::max(worst, rel_gap(tbar[c], via_family[c]));
      }
    }
    items.add("tbar-pointwise-norm", worst, 1e-12);
  }

  // Maximal function bound with constant s'.
  {
    double worst = 0.0;
    for (int t = 0; t < std::max(trials / 2, 4); ++t) {
      StepFunction g(grid, 0.0);
      for (std::size_t c = 0; c < grid.cell_count(); ++c) g[c] = rng.normal();
      const double s = (t % 2 == 0) ? e.r : e.p;
      const Weight& omega = (t % 2 == 0) ? instance.sigma() : instance.w();
      const double lhs = lp_norm(maximal_function(g, omega), omega, s);
      const double rhs = suite::maximal_function_cap(s) * lp_norm(g, omega, s);
      if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
    }
    items.add("maximal-bound", worst, 1.0);
  }

  // Whitney structure over every probe's level window.
  int structure_violations = 0;
  int whit_violations = 0;
  int nested_violations = 0;
  std::size_t max_overlap = 0;
  std::size_t max_crowd = 0;
  int ek_violations = 0;
  double max_principle_ratio = 0.0;
  double ek_shortfall = 0.0;
  int rcubes_violations = 0;
  int constancy_violations = 0;
  std::string first_detail;
  for (const StepFunction& f : probes) {
    const LevelScan scan = level_sets(instance, f);
    if (scan.empty()) continue;
    const StepFunction tbar = apply_Tbar(instance, f);
    for (int k = scan.k_min(); k <= scan.k_max(); ++k) {
      const WhitneyFamily& family = scan.at(k);
      // Disjointness and exact union in measure units.
      std::uint64_t total_units = 0;
      for (std::size_t a = 0; a < family.cubes.size(); ++a) {
        total_units += grid.measure_units(family.cubes[a]);
        for (std::size_t b = a + 1; b < family.cubes.size(); ++b) {
          if (grid.intersects(family.cubes[a], family.cubes[b])) ++structure_violations;
        }
        if (!cube_inside_cells(grid, family.cubes[a], family.omega)) ++structure_violations;
      }
      std::uint64_t omega_units = 0;
      family.omega.for_each([&](std::size_t c) {
        omega_units += grid.measure_units(grid.cell_at(c));
      });
      if (total_units != omega_units) {
        ++structure_violations;
        if (first_detail.empty()) first_detail = "union mismatch at k=" + std::to_string(k);
      }
      // Whitney condition and parent overlap.
      std::vector<std::uint64_t> overlap(grid.cell_count(), 0);
      for (const CubeId& q : family.cubes) {
        const CubeId q1 = grid.parent(q);
        const CubeId q2 = grid.parent(q1);
        if (!cube_inside_cells(grid, q1, family.omega)) ++whit_violations;
        if (cube_inside_cells(grid, q2, family.omega)) ++whit_violations;
        for (std::size_t c : grid.cells_in(q1)) ++overlap[c];
      }
      for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        // The parent-overlap function must be supported on omega.
        if (overlap[c] > 0 && !family.omega.contains(c)) ++whit_violations;
        max_overlap = std::max(max_overlap, static_cast<std::size_t>(overlap[c]));
      }
      // Neighbor structure, the union identity, and constancy on R-cubes.
      int constancy_budget = 16;
      for (const CubeId& q : family.cubes) {
        const NeighborFamilies nf = neighbor_families(scan, k, q);
        max_crowd = std::max(max_crowd, nf.crowd);
        if (!nf.union_identity) {
          ++rcubes_violations;
          if (first_detail.empty()) {
            first_detail = "rcubes union at k=" + std::to_string(k) + " " + to_string(q);
          }
        }
        if (constancy_budget > 0) {
          for (const CubeId& r : nf.r_cubes) {
            const ConstancyCheck cc = dual_constancy_check(instance, f, k, q, r);
            if (!cc.constant) ++constancy_violations;
            if (--constancy_budget == 0) break;
          }
        }
      }
      // Maximum principle on every cube of the family.
      for (const CubeId& q : family.cubes) {
        const MaxPrincipleResult mp = max_principle_check(instance, f, k, q);
        const double ratio = std::max(mp.out_val_max, mp.far_val_max) / mp.bound;
        if (ratio > max_principle_ratio) {
          max_principle_ratio = ratio;
          if (!mp.pass && first_detail.empty()) {
            first_detail = "max principle at k=" + std::to_string(k) + " " + to_string(q);
          }
        }
      }
      // E_k: containment is structural; check the exact union with the band.
      const auto regions = ek_sets(instance, f, k, family);
      const CellSet band = superlevel_set(tbar, std::ldexp(1.0, k + 2)) -
                           superlevel_set(tbar, std::ldexp(1.0, k + 3));
      std::uint64_t region_units = 0;
      for (const auto& [q, region] : regions) {
        region.cells.for_each([&](std::size_t c) {
          region_units += units_overlap(grid, region.cube, c);
        });
      }
      std::uint64_t band_units = 0;
      band.for_each([&](std::size_t c) {
        band_units += grid.measure_units(grid.cell_at(c));
      });
      if (region_units != band_units) ++ek_violations;
      const EkBoundCheck bound_check = ek_inner_bound_check(instance, f, k, family);
      if (std::isfinite(bound_check.min_ratio)) {
        ek_shortfall = std::max(ek_shortfall, std::max(0.0, 1.0 - bound_check.min_ratio));
      }
    }
    // Nesting across levels: strict inclusion forces a strictly larger k, so
    // a family-k cube strictly inside a family-l cube with k < l violates it.
    for (int k = scan.k_min(); k <= scan.k_max(); ++k) {
      for (int l = k + 1; l <= scan.k_max(); ++l) {
        for (const CubeId& q : scan.at(k).cubes) {
          for (const CubeId& qq : scan.at(l).cubes) {
            if (q != qq && grid.contains(qq, q)) ++nested_violations;
          }
        }
      }
    }
  }
  items.add("whitney-structure", structure_violations, 0, first_detail);
  items.add("whitney-condition", whit_violations, 0, first_detail);
  items.add("whitney-nesting", nested_violations, 0);
  items.add("whitney-overlap", static_cast<double>(max_overlap),
            suite::whitney_overlap_cap(grid.dimension()));
  items.add("whitney-crowd", static_cast<double>(max_crowd),
            suite::whitney_crowd_cap(grid.dimension()));
  items.add("ek-union", ek_violations, 0);
  items.add("ek-lower-bound", ek_shortfall, 1e-10);
  items.add("max-principle", max_principle_ratio, 1.0, first_detail);
  items.add("rcubes-union", rcubes_violations, 0, first_detail);
  items.add("rcubes-constancy", constancy_violations, 0);

  // Corona per residue class over the Whitney cubes of each probe.
  {
    int corona_violations = 0;
    double carleson_ratio = 0.0;
    for (const StepFunction& f : probes) {
      const LevelScan scan = level_sets(instance, f);
      if (scan.empty()) continue;
      for (int m = 0; m < 3; ++m) {
        std::vector<CubeId> inputs;
        for (int k = scan.k_min(); k <= scan.k_max(); ++k) {
          if (((k % 3) + 3) % 3 != m) continue;
          const auto& cubes = scan.at(k).cubes;
          inputs.insert(inputs.end(), cubes.begin(), cubes.end());
        }
        if (inputs.empty()) continue;
        const CoronaFamily family = corona(instance, f, inputs);
        auto avg = [&](const CubeId& cube) {
          return integrate_cube(f, instance.sigma().fn(), cube) /
                 integrate_cube(instance.sigma().fn(), cube);
        };
        for (const CubeId& q : inputs) {
          const auto it = family.gamma.find(q);
          if (it == family.gamma.end()) {
            ++corona_violations;
            continue;
          }
          if (!grid.contains(it->second, q)) ++corona_violations;
          if (avg(q) > 2.0 * avg(it->second) * (1.0 + kExactTol)) ++corona_violations;
        }
        for (const CubeId& g1 : family.principal) {
          for (const CubeId& g2 : family.principal) {
            if (g1 != g2 && grid.contains(g2, g1)) {
              if (!(2.0 * avg(g2) < avg(g1) * (1.0 + kExactTol))) ++corona_violations;
            }
          }
        }
        const CoronaCarleson cc = corona_carleson_sum(instance, f, family);
        if (cc.rhs > 0.0) carleson_ratio = std::max(carleson_ratio, cc.lhs / cc.rhs);
      }
    }
    items.add("corona-structure", corona_violations, 0);
    items.add("corona-carleson", carleson_ratio, suite::corona_cap(e.r));
  }

  // Occurrence bound for the probe functions.
  {
    int max_count = 0;
    for (const StepFunction& f : probes) {
      for (const auto& [cube, count] : occurrence_count(instance, f, eta)) {
        max_count = std::max(max_count, count);
      }
    }
    items.add("occurrence-bound", max_count, suite::occurrence_cap(eta));
  }

  // Testing constants, weak type, strengthened testing, and necessity.
  TestingPair local_pair{TestingReport{}, TestingReport{}};
  const TestingPair* pair = precomputed;
  if (!pair) {
    local_pair.L = compute_L(instance, config);
    local_pair.L_star = compute_L_star(instance);
    pair = &local_pair;
  }
  NormEstimate local_est(grid);
  const NormEstimate* est = norm_estimate;
  if (!est) {
    local_est = opnorm_ascent(instance, config, pair);
    est = &local_est;
  }
  {
    const WeakTypeReport weak = weak_type_check(instance, trials, *pair, seed);
    items.add("weak-type-direct", weak.max_ratio_T, suite::kWeakTypeT);
    items.add("weak-type-dual", weak.max_ratio_U, suite::kWeakTypeU);
    OptimizerConfig light = config;
    light.restarts = std::min(config.restarts, 2);
    light.max_iters = std::min(config.max_iters, 120);
    const StrengthenedReport st = strengthened_testing_check(instance, *pair, light);
    items.add("strengthened-direct", st.max_ratio_direct, suite::kStrengthenedDirect);
    items.add("strengthened-dual", st.max_ratio_dual, suite::kStrengthenedDual);

    const double lb = est->lower_bound;
    const double direct = std::pow(pair->L_star.value, 1.0 / e.p);
    const double dual = std::pow(pair->L.value, 1.0 / e.r_conj);
    items.add("necessity-direct", lb > 0.0 ? direct / lb : (direct > 0.0 ? 2.0 : 0.0),
              1.0 + 1e-9);
    items.add("necessity-dual", lb > 0.0 ? dual / lb : (dual > 0.0 ? 2.0 : 0.0),
              1.0 + 1e-6);
  }
  return report;
}

SweepSummary run_sweep(const SweepConfig& config, std::ostream& csv) {
  struct Row {
    std::string text;
    double ratio = 1.0;
    int max_occ = 0;
    bool failed = false;
  };
  std::vector<Row> rows(static_cast<std::size_t>(config.count));
  parallel_for(rows.size(), [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    const Instance inst = gen_instance(config, static_cast<int>(i));
    const Exponents& e = inst.exponents();
    TestingPair pair{compute_L(inst, config.optimizer), compute_L_star(inst)};
    const NormEstimate est = opnorm_ascent(inst, config.optimizer, &pair);
    const double denom = std::max(std::pow(pair.L.value, 1.0 / e.r_conj),
                                  std::pow(pair.L_star.value, 1.0 / e.p));
    const double ratio = denom > 0.0 ? est.lower_bound / denom : 1.0;

    StepFunction occ_probe = est.witness_f;
    if (!(occ_probe.max_value() > 0.0)) occ_probe = StepFunction(inst.grid(), 1.0);
    int max_occ = 0;
    for (const auto& [cube, count] : occurrence_count(inst, occ_probe, config.eta)) {
      max_occ = std::max(max_occ, count);
    }

    const VerifyReport verify =
        run_verify(inst, config.eta, config.optimizer,
                   config.seed ^ (0x9e3779b97f4a7c15ull + i), config.verify_trials,
                   &pair, &est);
    std::string flags;
    if (ratio < 1.0 - 1e-6) flags = "ratio";
    for (const VerifyItem& item : verify.items) {
      if (!item.pass) {
        if (!flags.empty()) flags += ";";
        flags += item.name;
      }
    }
    if (flags.empty()) flags = "ok";
    const auto t1 = std::chrono::steady_clock::now();
    const long long ms = config.timings
        ? std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()
        : 0;

    std::ostringstream line;
    line << config.seed << "-" << i << "," << format_double(e.p) << ","
         << format_double(e.r) << "," << format_double(e.q) << ","
         << inst.grid().depth() << "," << format_double(pair.L.value) << ","
         << format_double(pair.L_star.value) << "," << format_double(est.lower_bound)
         << "," << format_double(est.upper_bound) << "," << format_double(ratio) << ","
         << max_occ << "," << flags << "," << ms;
    rows[i].text = line.str();
    rows[i].ratio = ratio;
    rows[i].max_occ = max_occ;
    rows[i].failed = flags != "ok";
  });

  csv << "instance_id,p,r,q,depth,L,L_star,opnorm_lb,upper_cert,ratio,max_cR,"
         "lemma_flags,runtime_ms\n";
  SweepSummary summary;
  summary.rows = config.count;
  for (const Row& row : rows) {
    csv << row.text << "\n";
    summary.max_ratio = std::max(summary.max_ratio, row.ratio);
    summary.max_occurrence = std::max(summary.max_occurrence, row.max_occ);
    if (row.failed) ++summary.failures;
  }
  csv << "# summary,rows=" << summary.rows << ",max_ratio="
      << format_double(summary.max_ratio) << ",max_cR=" << summary.max_occurrence
      << ",failures=" << summary.failures << "\n";
  return summary;
}

}  // namespace twl
