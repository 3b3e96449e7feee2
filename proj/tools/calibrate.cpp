// Calibration sweep: measures the observed extremes of every ratio the test
// suite freezes, over oracle-sized corpora. Run before changing the suite
// constants header.
#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "twl/harness.hpp"
#include "twl/json_io.hpp"
#include "twl/parallel.hpp"
#include "twl/suite_constants.hpp"

using namespace twl;

namespace {

struct Extremes {
  std::map<std::string, double> max_seen;
  void note(const std::string& key, double v) {
    auto [it, inserted] = max_seen.emplace(key, v);
    if (!inserted) it->second = std::max(it->second, v);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"suite constant calibration sweep"};
  int count = 500;
  int depth_max = 3;
  std::uint64_t seed = 20240901;
  app.add_option("--count", count, "instances per corpus");
  app.add_option("--depth-max", depth_max, "maximum depth (cells <= 8 keeps the oracle on)");
  app.add_option("--seed", seed, "corpus seed");
  CLI11_PARSE(app, argc, argv);

  Extremes ex;
  const std::vector<WeightProfile> profiles{
      WeightProfile::uniform, WeightProfile::lognormal, WeightProfile::spiky,
      WeightProfile::near_degenerate};

  for (WeightProfile profile : profiles) {
    SweepConfig config;
    config.seed = seed ^ static_cast<std::uint64_t>(profile);
    config.count = count;
    config.depth_min = 0;
    config.depth_max = depth_max;
    config.profile = profile;
    config.optimizer.restarts = 8;
    config.optimizer.max_iters = 300;

    std::vector<Extremes> local(static_cast<std::size_t>(count));
    parallel_for(local.size(), [&](std::size_t i) {
      const Instance inst = gen_instance(config, static_cast<int>(i));
      const Exponents& e = inst.exponents();
      TestingPair pair{compute_L(inst, config.optimizer), compute_L_star(inst)};
      Extremes& out = local[i];

      const bool oracle_ok = inst.grid().cell_count() <= 8;
      double norm_lb = 0.0;
      if (oracle_ok) {
        NormEstimate bf = opnorm_bruteforce(inst, 16);
        const NormEstimate asc = opnorm_ascent(inst, config.optimizer, &pair);
        norm_lb = std::max(bf.lower_bound, asc.lower_bound);
        const double denom = std::max(std::pow(pair.L.value, 1.0 / e.r_conj),
                                      std::pow(pair.L_star.value, 1.0 / e.p));
        if (denom > 0.0) {
          out.note("equivalence", norm_lb / denom);
          out.note("equivalence_min", -norm_lb / denom);
        }
        if (std::abs(e.p - e.r) < 1e-12 && std::abs(e.p - e.q) < 1e-12) {
          const double carl = carleson_constant(inst);
          if (carl > 0.0) out.note("carleson_factor", std::pow(norm_lb, e.p) / carl);
        }
        const LsuConstants lsu = lsu_constants(inst);
        const double lsu_max = std::max(lsu.direct, lsu.dual);
        const NormEstimate lin_bf = opnorm_bruteforce(inst, 16, 1.0);
        const NormEstimate lin_asc = opnorm_ascent(inst, config.optimizer, nullptr, 1.0);
        const double lin = std::max(lin_bf.lower_bound, lin_asc.lower_bound);
        if (lsu_max > 0.0) {
          out.note("lsu_factor", lin / lsu_max);
          out.note("lsu_necessity", lsu_max / std::max(lin, 1e-300));
        }
      } else {
        const NormEstimate asc = opnorm_ascent(inst, config.optimizer, &pair);
        norm_lb = asc.lower_bound;
      }

      const WeakTypeReport weak = weak_type_check(inst, 40, pair, config.seed + i);
      out.note("weak_T", weak.max_ratio_T);
      out.note("weak_U", weak.max_ratio_U);
      OptimizerConfig light = config.optimizer;
      light.restarts = 2;
      const StrengthenedReport st = strengthened_testing_check(inst, pair, light);
      out.note("strengthened_direct", st.max_ratio_direct);
      out.note("strengthened_dual", st.max_ratio_dual);

      StepFunction probe(inst.grid(), 1.0);
      const LevelScan scan = level_sets(inst, probe);
      if (!scan.empty()) {
        for (int m = 0; m < 3; ++m) {
          std::vector<CubeId> inputs;
          for (int k = scan.k_min(); k <= scan.k_max(); ++k) {
            if (((k % 3) + 3) % 3 != m) continue;
            const auto& cubes = scan.at(k).cubes;
            inputs.insert(inputs.end(), cubes.begin(), cubes.end());
          }
          if (inputs.empty()) continue;
          const CoronaFamily fam = corona(inst, probe, inputs);
          const CoronaCarleson cc = corona_carleson_sum(inst, probe, fam);
          if (cc.rhs > 0.0) {
            out.note("corona_ratio_over_cap",
                     (cc.lhs / cc.rhs) / suite::corona_cap(e.r));
          }
        }
      }
      int max_occ = 0;
      for (const auto& [cube, n] : occurrence_count(inst, probe, 0.01)) {
        max_occ = std::max(max_occ, n);
      }
      out.note("occurrence", max_occ);
    });
    for (const Extremes& l : local) {
      for (const auto& [k, v] : l.max_seen) ex.note(k, v);
    }
    std::cerr << "profile " << profile_name(profile) << " done\n";
  }

  for (const auto& [key, value] : ex.max_seen) {
    std::cout << key << " " << format_double(value) << "\n";
  }
  return 0;
}
