// Command-line front end: instance generation, operator evaluation, testing
// constants, norm estimation, decompositions, verification, and sweeps.
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "twl/json_io.hpp"

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text << "\n";
}

twl::StepFunction load_step_function(const twl::DyadicGrid& grid, const std::string& path) {
  const json j = load_json(path);
  std::vector<double> values;
  if (j.is_array()) {
    values = j.get<std::vector<double>>();
  } else {
    values = j.at("values").get<std::vector<double>>();
  }
  return twl::StepFunction(grid, std::move(values));
}

json estimate_to_json(const twl::NormEstimate& est) {
  json j;
  j["lower_bound"] = est.lower_bound;
  j["upper_bound"] = est.upper_bound;
  j["witness"] = est.witness_f.values();
  switch (est.method) {
    case twl::NormMethod::bruteforce: j["method"] = "bruteforce"; break;
    case twl::NormMethod::ascent: j["method"] = "ascent"; break;
    case twl::NormMethod::closed_form: j["method"] = "closed_form"; break;
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"positive dyadic operator testing-constant laboratory"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random instance");
  std::uint64_t gen_seed = 1;
  int gen_depth = 2;
  int gen_dim = 1;
  int gen_index = 0;
  std::string gen_profile = "uniform";
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--depth", gen_depth, "grid depth");
  gen->add_option("--dim", gen_dim, "dimension (1 or 2)");
  gen->add_option("--index", gen_index, "instance index within the seed stream");
  gen->add_option("--profile", gen_profile,
                  "weight profile: uniform|lognormal|spiky|near_degenerate");
  gen->add_option("--out", gen_out, "output file (default stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "apply an operator to a function");
  std::string eval_instance, eval_f, eval_op = "Tbar", eval_weight = "sigma", eval_out;
  eval->add_option("--instance", eval_instance, "instance JSON file")->required();
  eval->add_option("--f", eval_f, "input function or component family JSON")->required();
  eval->add_option("--op", eval_op, "T|Tbar|U|M")->required();
  eval->add_option("--weight", eval_weight, "weight for M: sigma|w");
  eval->add_option("--out", eval_out, "output file (default stdout)");

  // constants
  auto* constants = app.add_subcommand("constants", "compute the testing constants");
  std::string const_instance, const_out;
  bool const_carleson = false, const_q1 = false, const_oracle = false;
  int const_restarts = 8, const_iters = 400;
  constants->add_option("--instance", const_instance, "instance JSON file")->required();
  constants->add_flag("--carleson", const_carleson, "also compute the r=q=p constant");
  constants->add_flag("--q1", const_q1, "also compute the exponent-1 constants");
  constants->add_flag("--oracle", const_oracle, "refine the inner sup with a grid sweep");
  constants->add_option("--restarts", const_restarts, "random restarts");
  constants->add_option("--max-iters", const_iters, "ascent iteration cap");
  constants->add_option("--out", const_out, "output file (default stdout)");

  // opnorm
  auto* opnorm = app.add_subcommand("opnorm", "estimate the operator norm");
  std::string opnorm_instance, opnorm_out;
  bool opnorm_oracle = false;
  int opnorm_resolution = 16;
  int opnorm_restarts = 8, opnorm_iters = 400;
  opnorm->add_option("--instance", opnorm_instance, "instance JSON file")->required();
  opnorm->add_flag("--oracle", opnorm_oracle, "grid search (at most 8 cells)");
  opnorm->add_option("--resolution", opnorm_resolution, "oracle grid resolution");
  opnorm->add_option("--restarts", opnorm_restarts, "random restarts");
  opnorm->add_option("--max-iters", opnorm_iters, "ascent iteration cap");
  opnorm->add_option("--out", opnorm_out, "output file (default stdout)");

  // decompose
  auto* decompose = app.add_subcommand("decompose", "level sets and classifications");
  std::string dec_instance, dec_f, dec_out;
  double dec_eta = 0.01;
  decompose->add_option("--instance", dec_instance, "instance JSON file")->required();
  decompose->add_option("--f", dec_f, "input function JSON")->required();
  decompose->add_option("--eta", dec_eta, "classification parameter in (0,1)");
  decompose->add_option("--out", dec_out, "output file (default stdout)");

  // corona
  auto* corona_cmd = app.add_subcommand("corona", "principal cubes of the sigma-averages");
  std::string cor_instance, cor_f, cor_out, cor_input = "whitney";
  int cor_mod = 0;
  corona_cmd->add_option("--instance", cor_instance, "instance JSON file")->required();
  corona_cmd->add_option("--f", cor_f, "input function JSON")->required();
  corona_cmd->add_option("--input", cor_input, "whitney|collection");
  corona_cmd->add_option("--mod", cor_mod, "residue class of levels mod 3 (whitney input)");
  corona_cmd->add_option("--out", cor_out, "output file (default stdout)");

  // verify
  auto* verify = app.add_subcommand("verify", "run the invariant suite on an instance");
  std::string ver_instance, ver_out, ver_replay;
  double ver_eta = 0.01;
  int ver_trials = 25;
  std::uint64_t ver_seed = 7;
  bool ver_json = false;
  verify->add_option("--instance", ver_instance, "instance JSON file")->required();
  verify->add_option("--eta", ver_eta, "classification parameter");
  verify->add_option("--trials", ver_trials, "random trials per property");
  verify->add_option("--seed", ver_seed, "trial seed");
  verify->add_flag("--json", ver_json, "emit JSON instead of the table");
  verify->add_option("--replay-out", ver_replay, "write replay payload on failure");
  verify->add_option("--out", ver_out, "output file (default stdout)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "generate instances and verify in bulk");
  std::string sweep_config_path, sweep_csv;
  bool sweep_timings = false;
  sweep->add_option("--config", sweep_config_path, "sweep configuration JSON");
  sweep->add_option("--out-csv", sweep_csv, "CSV output file (default stdout)");
  sweep->add_flag("--timings", sweep_timings,
                  "record wall-clock times (breaks byte-identical reruns)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      twl::SweepConfig config;
      config.seed = gen_seed;
      config.depth_min = config.depth_max = gen_depth;
      config.dimension = gen_dim;
      config.profile = twl::profile_from_name(gen_profile);
      const twl::Instance inst = twl::gen_instance(config, gen_index);
      write_output(gen_out, twl::instance_to_json(inst).dump(2));
      return 0;
    }
    if (*eval) {
      const twl::Instance inst = twl::instance_from_json(load_json(eval_instance));
      json out;
      if (eval_op == "T") {
        const auto family = twl::apply_T(inst, load_step_function(inst.grid(), eval_f));
        out = twl::family_to_json(family);
      } else if (eval_op == "Tbar") {
        out["values"] = twl::apply_Tbar(inst, load_step_function(inst.grid(), eval_f)).values();
      } else if (eval_op == "U") {
        const auto family = twl::family_from_json(inst, load_json(eval_f));
        out["values"] = twl::apply_U(inst, family).values();
      } else if (eval_op == "M") {
        const twl::Weight& omega = eval_weight == "w" ? inst.w() : inst.sigma();
        out["values"] =
            twl::maximal_function(load_step_function(inst.grid(), eval_f), omega).values();
      } else {
        std::cerr << "unknown operator " << eval_op << " (expected T|Tbar|U|M)\n";
        return 2;
      }
      write_output(eval_out, out.dump(2));
      return 0;
    }
    if (*constants) {
      const twl::Instance inst = twl::instance_from_json(load_json(const_instance));
      twl::OptimizerConfig config;
      config.restarts = const_restarts;
      config.max_iters = const_iters;
      config.use_oracle = const_oracle;
      const twl::TestingReport l = twl::compute_L(inst, config);
      const twl::TestingReport l_star = twl::compute_L_star(inst);
      json out;
      out["L"] = l.value;
      out["L_star"] = l_star.value;
      out["L_witness"] = twl::cube_to_json(l.witness_cube, inst.grid().dimension());
      out["L_star_witness"] =
          twl::cube_to_json(l_star.witness_cube, inst.grid().dimension());
      out["converged"] = l.trace.converged;
      out["carleson"] = nullptr;
      out["lsu"] = nullptr;
      if (const_carleson) out["carleson"] = twl::carleson_constant(inst);
      if (const_q1) {
        const twl::LsuConstants lsu = twl::lsu_constants(inst);
        json lj;
        lj["direct"] = lsu.direct;
        lj["dual"] = lsu.dual;
        lj["direct_witness"] = twl::cube_to_json(lsu.direct_witness, inst.grid().dimension());
        lj["dual_witness"] = twl::cube_to_json(lsu.dual_witness, inst.grid().dimension());
        out["lsu"] = std::move(lj);
      }
      write_output(const_out, out.dump(2));
      return 0;
    }
    if (*opnorm) {
      const twl::Instance inst = twl::instance_from_json(load_json(opnorm_instance));
      twl::OptimizerConfig config;
      config.restarts = opnorm_restarts;
      config.max_iters = opnorm_iters;
      twl::TestingPair pair{twl::compute_L(inst, config), twl::compute_L_star(inst)};
      twl::NormEstimate est(inst.grid());
      if (opnorm_oracle) {
        est = twl::opnorm_bruteforce(inst, opnorm_resolution);
        const twl::NormEstimate with_reports = twl::opnorm_ascent(inst, config, &pair);
        est.upper_bound = with_reports.upper_bound;
        if (with_reports.lower_bound > est.lower_bound) {
          est.lower_bound = with_reports.lower_bound;
          est.witness_f = with_reports.witness_f;
        }
      } else {
        est = twl::opnorm_ascent(inst, config, &pair);
      }
      write_output(opnorm_out, estimate_to_json(est).dump(2));
      return 0;
    }
    if (*decompose) {
      const twl::Instance inst = twl::instance_from_json(load_json(dec_instance));
      const twl::StepFunction f = load_step_function(inst.grid(), dec_f);
      const twl::LevelScan scan = twl::level_sets(inst, f);
      json out;
      auto& records = out["levels"] = json::array();
      for (int k = scan.k_min(); !scan.empty() && k <= scan.k_max(); ++k) {
        const twl::ClassifiedLevel cl = twl::classify_cubes(inst, f, k, dec_eta);
        json rec;
        rec["k"] = k;
        rec["omega_cells"] = scan.at(k).omega.cells();
        auto cubes_json = [&](const std::vector<twl::CubeId>& cubes) {
          json arr = json::array();
          for (const auto& cube : cubes) {
            arr.push_back(twl::cube_to_json(cube, inst.grid().dimension()));
          }
          return arr;
        };
        rec["whitney_cubes"] = cubes_json(scan.at(k).cubes);
        rec["classes"] = {{"class1", cubes_json(cl.class1)},
                          {"class2", cubes_json(cl.class2)},
                          {"class3", cubes_json(cl.class3)}};
        auto& ek = rec["E_k"] = json::array();
        for (const auto& [cube, region] : cl.ek) {
          json entry;
          entry["cube"] = twl::cube_to_json(cube, inst.grid().dimension());
          entry["cells"] = region.cells.cells();
          ek.push_back(std::move(entry));
        }
        auto& alpha = rec["alpha"] = json::array();
        auto& beta = rec["beta"] = json::array();
        for (const auto& [cube, value] : cl.alpha) {
          alpha.push_back({{"cube", twl::cube_to_json(cube, inst.grid().dimension())},
                           {"value", value}});
        }
        for (const auto& [cube, value] : cl.beta) {
          beta.push_back({{"cube", twl::cube_to_json(cube, inst.grid().dimension())},
                          {"value", value}});
        }
        records.push_back(std::move(rec));
      }
      write_output(dec_out, out.dump(2));
      return 0;
    }
    if (*corona_cmd) {
      const twl::Instance inst = twl::instance_from_json(load_json(cor_instance));
      const twl::StepFunction f = load_step_function(inst.grid(), cor_f);
      std::vector<twl::CubeId> inputs;
      if (cor_input == "collection") {
        inputs = inst.family();
      } else {
        const twl::LevelScan scan = twl::level_sets(inst, f);
        for (int k = scan.k_min(); !scan.empty() && k <= scan.k_max(); ++k) {
          if (((k % 3) + 3) % 3 != cor_mod) continue;
          const auto& cubes = scan.at(k).cubes;
          inputs.insert(inputs.end(), cubes.begin(), cubes.end());
        }
      }
      const twl::CoronaFamily family = twl::corona(inst, f, inputs);
      const twl::CoronaCarleson cc = twl::corona_carleson_sum(inst, f, family);
      json out;
      auto& principal = out["principal_cubes"] = json::array();
      for (const auto& g : family.principal) {
        principal.push_back(twl::cube_to_json(g, inst.grid().dimension()));
      }
      auto& gamma = out["gamma"] = json::array();
      for (const auto& [cube, g] : family.gamma) {
        gamma.push_back({{"cube", twl::cube_to_json(cube, inst.grid().dimension())},
                         {"principal", twl::cube_to_json(g, inst.grid().dimension())}});
      }
      out["carleson_lhs"] = cc.lhs;
      out["carleson_rhs"] = cc.rhs;
      write_output(cor_out, out.dump(2));
      return 0;
    }
    if (*verify) {
      const twl::Instance inst = twl::instance_from_json(load_json(ver_instance));
      const twl::VerifyReport report =
          twl::run_verify(inst, ver_eta, {}, ver_seed, ver_trials);
      if (ver_json) {
        write_output(ver_out, twl::verify_report_to_json(report).dump(2));
      } else {
        std::ostringstream table;
        for (const auto& item : report.items) {
          table << (item.pass ? "[PASS] " : "[FAIL] ") << item.name << "  value="
                << twl::format_double(item.value) << " bound="
                << twl::format_double(item.bound);
          if (!item.detail.empty()) table << "  (" << item.detail << ")";
          table << "\n";
        }
        table << (report.pass ? "all checks passed" : "invariant failure");
        write_output(ver_out, table.str());
      }
      if (!report.pass && !ver_replay.empty()) {
        write_output(ver_replay, report.failure_context);
      }
      return report.pass ? 0 : 1;
    }
    if (*sweep) {
      twl::SweepConfig config;
      if (!sweep_config_path.empty()) {
        config = twl::sweep_config_from_json(load_json(sweep_config_path));
      }
      config.timings = config.timings || sweep_timings;
      twl::SweepSummary summary;
      if (sweep_csv.empty() || sweep_csv == "-") {
        summary = twl::run_sweep(config, std::cout);
      } else {
        std::ofstream out(sweep_csv);
        if (!out) throw std::runtime_error("cannot write " + sweep_csv);
        summary = twl::run_sweep(config, out);
      }
      std::cerr << "rows=" << summary.rows << " max_ratio=" << summary.max_ratio
                << " max_cR=" << summary.max_occurrence
                << " failures=" << summary.failures << "\n";
      return summary.failures == 0 ? 0 : 1;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
