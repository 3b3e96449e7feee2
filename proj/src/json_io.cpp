#include "twl/json_io.hpp"

#include <charconv>
#include <stdexcept>

namespace twl {

nlohmann::json cube_to_json(const CubeId& cube, int dimension) {
  nlohmann::json j;
  j["level"] = cube.level;
  auto& idx = j["index"] = nlohmann::json::array();
  for (int i = 0; i < dimension; ++i) idx.push_back(cube.index[i]);
  return j;
}

CubeId cube_from_json(const nlohmann::json& j) {
  CubeId cube;
  cube.level = j.at("level").get<int>();
  const auto& idx = j.at("index");
  if (!idx.is_array() || idx.size() > static_cast<std::size_t>(kMaxDim)) {
    throw std::invalid_argument("cube index must be an array of at most " +
                                std::to_string(kMaxDim) + " entries");
  }
  for (std::size_t i = 0; i < idx.size(); ++i) {
    cube.index[i] = idx[i].get<std::uint32_t>();
  }
  return cube;
}

nlohmann::json instance_to_json(const Instance& instance) {
  nlohmann::json j;
  const DyadicGrid& grid = instance.grid();
  j["dimension"] = grid.dimension();
  j["depth"] = grid.depth();
  j["p"] = instance.exponents().p;
  j["r"] = instance.exponents().r;
  j["q"] = instance.exponents().q;
  j["sigma"] = instance.sigma().fn().values();
  j["w"] = instance.w().fn().values();
  auto& cubes = j["cubes"] = nlohmann::json::array();
  for (std::size_t i = 0; i < instance.family_size(); ++i) {
    nlohmann::json c = cube_to_json(instance.family_cube(i), grid.dimension());
    c["tau"] = instance.tau(i);
    cubes.push_back(std::move(c));
  }
  return j;
}

Instance instance_from_json(const nlohmann::json& j) {
  const int dimension = j.at("dimension").get<int>();
  const int depth = j.at("depth").get<int>();
  DyadicGrid grid(dimension, depth);
  auto sigma_values = j.at("sigma").get<std::vector<double>>();
  auto w_values = j.at("w").get<std::vector<double>>();
  const Exponents exps = make_exponents(j.at("p").get<double>(), j.at("r").get<double>(),
                                        j.at("q").get<double>());
  std::vector<CubeId> cubes;
  std::vector<double> taus;
  for (const auto& c : j.at("cubes")) {
    cubes.push_back(cube_from_json(c));
    taus.push_back(c.at("tau").get<double>());
  }
  return Instance(grid, Weight(grid, std::move(sigma_values)),
                  Weight(grid, std::move(w_values)), exps, std::move(cubes),
                  std::move(taus));
}

nlohmann::json family_to_json(const ComponentFamily& family) {
  const Instance& inst = family.instance();
  nlohmann::json j;
  auto& comps = j["components"] = nlohmann::json::array();
  for (std::size_t i = 0; i < family.size(); ++i) {
    nlohmann::json values = nlohmann::json::array();
    bool nonzero = false;
    for (std::size_t c : inst.cells_of(i)) {
      const double v = family.value(i, c);
      nonzero = nonzero || v != 0.0;
      values.push_back(v);
    }
    if (!nonzero) continue;
    nlohmann::json entry;
    entry["cube"] = cube_to_json(inst.family_cube(i), inst.grid().dimension());
    entry["values"] = std::move(values);
    comps.push_back(std::move(entry));
  }
  return j;
}

ComponentFamily family_from_json(const Instance& instance, const nlohmann::json& j) {
  ComponentFamily family(instance);
  for (const auto& entry : j.at("components")) {
    const CubeId cube = cube_from_json(entry.at("cube"));
    const auto idx = instance.family_index(cube);
    if (!idx) {
      throw std::invalid_argument("component cube " + to_string(cube) +
                                  " is not in the instance collection");
    }
    const auto& cells = instance.cells_of(*idx);
    const auto values = entry.at("values").get<std::vector<double>>();
    if (values.size() != cells.size()) {
      throw std::invalid_argument("component for " + to_string(cube) +
                                  " must list one value per cell of the cube");
    }
    for (std::size_t n = 0; n < cells.size(); ++n) {
      family.set_value(*idx, cells[n], values[n]);
    }
  }
  return family;
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  SweepConfig config;
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("count")) config.count = j.at("count").get<int>();
  if (j.contains("depth_range")) {
    const auto& range = j.at("depth_range");
    config.depth_min = range.at(0).get<int>();
    config.depth_max = range.at(1).get<int>();
  }
  if (j.contains("dimension")) config.dimension = j.at("dimension").get<int>();
  if (j.contains("exponents")) {
    config.exponents.clear();
    for (const auto& triple : j.at("exponents")) {
      config.exponents.push_back(ExponentTriple{triple.at(0).get<double>(),
                                                triple.at(1).get<double>(),
                                                triple.at(2).get<double>()});
    }
  }
  if (j.contains("profile")) {
    config.profile = profile_from_name(j.at("profile").get<std::string>());
  }
  if (j.contains("eta")) config.eta = j.at("eta").get<double>();
  if (j.contains("cube_density")) config.cube_density = j.at("cube_density").get<double>();
  if (j.contains("verify_trials")) config.verify_trials = j.at("verify_trials").get<int>();
  if (j.contains("timings")) config.timings = j.at("timings").get<bool>();
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    if (o.contains("restarts")) config.optimizer.restarts = o.at("restarts").get<int>();
    if (o.contains("max_iters")) config.optimizer.max_iters = o.at("max_iters").get<int>();
    if (o.contains("tol")) config.optimizer.tol = o.at("tol").get<double>();
    if (o.contains("seed")) config.optimizer.seed = o.at("seed").get<std::uint64_t>();
    if (o.contains("use_oracle")) config.optimizer.use_oracle = o.at("use_oracle").get<bool>();
    if (o.contains("oracle_resolution")) {
      config.optimizer.oracle_resolution = o.at("oracle_resolution").get<int>();
    }
  }
  if (config.count < 0) throw std::invalid_argument("sweep count must be >= 0");
  if (config.depth_min < 0 || config.depth_max < config.depth_min) {
    throw std::invalid_argument("sweep depth range must satisfy 0 <= lo <= hi");
  }
  return config;
}

nlohmann::json verify_report_to_json(const VerifyReport& report) {
  nlohmann::json j;
  j["pass"] = report.pass;
  auto& items = j["items"] = nlohmann::json::array();
  for (const VerifyItem& item : report.items) {
    nlohmann::json entry;
    entry["name"] = item.name;
    entry["pass"] = item.pass;
    entry["value"] = item.value;
    entry["bound"] = item.bound;
    if (!item.detail.empty()) entry["detail"] = item.detail;
    items.push_back(std::move(entry));
  }
  if (!report.failure_context.empty()) {
    j["replay"] = nlohmann::json::parse(report.failure_context);
  }
  return j;
}

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace twl
