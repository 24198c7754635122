#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "windcommit/simulator.hpp"

namespace windcommit {

// YAML document with optional sections simulation, scenario, system,
// generators, agent and solver. Missing fields keep their defaults. Costs
// use the units of the reference generator table: startup_cost in M$,
// gen_cost in k$/GWh; voll is in $/GWh. Everything is stored in $.
SimulationConfig parse_config(const std::string& text);
SimulationConfig load_config(const std::filesystem::path& path);

// Effective configuration in the same layout and units as the input
// document; parse_config accepts its dump.
nlohmann::json config_to_json(const SimulationConfig& cfg);

// Stand-alone UC instance document: generators (config units), dt, voll,
// demand, wind[scenario][stage], probabilities and optional initial_commitment,
// initial_output, nonanticipativity_stages, ramp_mode.
UcInstance instance_from_json(const nlohmann::json& doc);
nlohmann::json instance_to_json(const UcInstance& instance);

}  // namespace windcommit
