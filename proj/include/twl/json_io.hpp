#pragma once

#include <string>

#include <json.hpp>

#include "twl/harness.hpp"

namespace twl {

nlohmann::json cube_to_json(const CubeId& cube, int dimension);
CubeId cube_from_json(const nlohmann::json& j);

// Canonical instance schema:
// {"dimension", "depth", "p", "r", "q", "sigma": [...], "w": [...],
//  "cubes": [{"level", "index": [...], "tau"}...]}
// Cell arrays are ordered lexicographically by index at the finest level.
nlohmann::json instance_to_json(const Instance& instance);
Instance instance_from_json(const nlohmann::json& j);

// {"components": [{"cube": {...}, "values": [...]}...]} with values on the
// cells inside the cube, ascending by linear cell index; zero components are
// omitted.
nlohmann::json family_to_json(const ComponentFamily& family);
ComponentFamily family_from_json(const Instance& instance, const nlohmann::json& j);

SweepConfig sweep_config_from_json(const nlohmann::json& j);

nlohmann::json verify_report_to_json(const VerifyReport& report);

// Shortest round-trip decimal form with a fixed C locale.
std::string format_double(double value);

}  // namespace twl
