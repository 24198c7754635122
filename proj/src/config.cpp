#include "windcommit/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "windcommit/error.hpp"

namespace windcommit {

namespace {

constexpr double kMillion = 1e6;
constexpr double kThousand = 1e3;

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(path + ": expected a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(path + "." + key + ": unknown field");
  }
}

template <typename T>
T read(const YAML::Node& node, const std::string& path, const char* what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path + ": expected " + what);
  }
}

double number(const YAML::Node& n, const std::string& path) { return read<double>(n, path, "a number"); }

std::size_t count(const YAML::Node& n, const std::string& path) {
  const long long v = read<long long>(n, path, "a non-negative integer");
  if (v < 0) throw ConfigError(path + ": expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::string text(const YAML::Node& n, const std::string& path) { return read<std::string>(n, path, "a string"); }

std::vector<double> numbers(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) throw ConfigError(path + ": expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n.size(); ++i)
    out.push_back(number(n[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <typename F>
void field(const YAML::Node& section, const std::string& path, const char* key, F&& apply) {
  const YAML::Node n = section[key];
  if (!n || n.IsNull()) return;
  const std::string p = path + "." + key;
  try {
    apply(n, p);
  } catch (const DomainError& e) {
    throw ConfigError(p + ": " + e.what());
  }
}

void parse_simulation(const YAML::Node& s, SimulationConfig& cfg) {
  const std::string p = "simulation";
  check_keys(s, p, {"dt", "total_steps", "lookahead", "mode", "trials", "seed"});
  field(s, p, "dt", [&](auto& n, auto& q) { cfg.dt = number(n, q); });
  field(s, p, "total_steps", [&](auto& n, auto& q) { cfg.total_steps = count(n, q); });
  field(s, p, "lookahead", [&](auto& n, auto& q) { cfg.lookahead = count(n, q); });
  field(s, p, "mode", [&](auto& n, auto& q) { cfg.mode = sim_mode_from_string(text(n, q)); });
  field(s, p, "trials", [&](auto& n, auto& q) { cfg.trials = count(n, q); });
  field(s, p, "seed", [&](auto& n, auto& q) { cfg.seed = read<std::uint64_t>(n, q, "a non-negative integer"); });
}

void parse_scenario(const YAML::Node& s, SimulationConfig& cfg) {
  const std::string p = "scenario";
  check_keys(s, p, {"phi", "eps_c", "quantiles", "probability_rule", "probabilities", "error_mode", "wind_cap"});
  field(s, p, "phi", [&](auto& n, auto& q) { cfg.ar.phi = number(n, q); });
  field(s, p, "eps_c", [&](auto& n, auto& q) { cfg.ar.eps_c = number(n, q); });
  field(s, p, "quantiles", [&](auto& n, auto& q) { cfg.quantiles = QuantileSet(numbers(n, q)); });
  field(s, p, "probability_rule",
        [&](auto& n, auto& q) { cfg.probability_rule = probability_rule_from_string(text(n, q)); });
  field(s, p, "probabilities", [&](auto& n, auto& q) {
    cfg.probabilities = numbers(n, q);
    ProbabilityVector check(*cfg.probabilities);
  });
  field(s, p, "error_mode", [&](auto& n, auto& q) { cfg.error_mode = error_mode_from_string(text(n, q)); });
  field(s, p, "wind_cap", [&](auto& n, auto& q) { cfg.wind_cap = number(n, q); });
}

void parse_system(const YAML::Node& s, SimulationConfig& cfg) {
  const std::string p = "system";
  check_keys(s, p, {"voll", "ramp_mode", "nonanticipativity_stages", "initial_commitment", "initial_output"});
  field(s, p, "voll", [&](auto& n, auto& q) { cfg.voll = number(n, q); });
  field(s, p, "ramp_mode", [&](auto& n, auto& q) { cfg.ramp_mode = ramp_mode_from_string(text(n, q)); });
  field(s, p, "nonanticipativity_stages",
        [&](auto& n, auto& q) { cfg.nonanticipativity_stages = count(n, q); });
  field(s, p, "initial_commitment", [&](auto& n, auto& q) {
    if (!n.IsSequence()) throw ConfigError(q + ": expected a list of booleans");
    std::vector<bool> v;
    for (std::size_t i = 0; i < n.size(); ++i)
      v.push_back(read<bool>(n[i], q + "[" + std::to_string(i) + "]", "a boolean"));
    cfg.initial_commitment = v;
  });
  field(s, p, "initial_output", [&](auto& n, auto& q) { cfg.initial_output = numbers(n, q); });
}

Generator parse_generator(const YAML::Node& g, std::size_t index) {
  std::string p = "generators[" + std::to_string(index) + "]";
  check_keys(g, p, {"name", "startup_cost", "p_max", "p_min", "gen_cost", "ramp_up", "ramp_down"});
  Generator gen;
  gen.name = g["name"] ? text(g["name"], p + ".name") : "G" + std::to_string(index + 1);
  p += " (" + gen.name + ")";
  auto required = [&](const char* key) {
    if (!g[key] || g[key].IsNull()) throw ConfigError(p + "." + key + ": missing");
    return number(g[key], p + "." + key);
  };
  gen.startup_cost = required("startup_cost") * kMillion;
  gen.p_max = required("p_max");
  gen.p_min = required("p_min");
  gen.gen_cost = required("gen_cost") * kThousand;
  gen.ramp_up = required("ramp_up");
  gen.ramp_down = required("ramp_down");
  if (!(gen.p_max >= 0.0)) throw ConfigError(p + ".p_max: must be >= 0");
  if (!(gen.p_min >= 0.0 && gen.p_min <= gen.p_max)) throw ConfigError(p + ".p_min: must lie in [0, p_max]");
  if (!(gen.startup_cost >= 0.0)) throw ConfigError(p + ".startup_cost: must be >= 0");
  if (!(gen.gen_cost >= 0.0)) throw ConfigError(p + ".gen_cost: must be >= 0");
  if (!(gen.ramp_up > 0.0)) throw ConfigError(p + ".ramp_up: must be > 0");
  if (!(gen.ramp_down > 0.0)) throw ConfigError(p + ".ramp_down: must be > 0");
  return gen;
}

void parse_agent(const YAML::Node& s, SimulationConfig& cfg) {
  const std::string p = "agent";
  check_keys(s, p, {"max_retries", "history_window", "floor", "shrink", "audit_log", "base_url", "model",
                    "temperature", "timeout", "http_retries", "retry_backoff"});
  auto& a = cfg.agent;
  field(s, p, "max_retries", [&](auto& n, auto& q) { a.max_retries = count(n, q); });
  field(s, p, "history_window", [&](auto& n, auto& q) { a.history_window = count(n, q); });
  field(s, p, "floor", [&](auto& n, auto& q) { a.calibration.floor = number(n, q); });
  field(s, p, "shrink", [&](auto& n, auto& q) { a.calibration.shrink = number(n, q); });
  field(s, p, "audit_log", [&](auto& n, auto& q) { a.audit_log = text(n, q); });
  field(s, p, "base_url", [&](auto& n, auto& q) { a.backend.base_url = text(n, q); });
  field(s, p, "model", [&](auto& n, auto& q) { a.backend.model = text(n, q); });
  field(s, p, "temperature", [&](auto& n, auto& q) { a.backend.temperature = number(n, q); });
  field(s, p, "timeout", [&](auto& n, auto& q) { a.backend.timeout_seconds = number(n, q); });
  field(s, p, "http_retries", [&](auto& n, auto& q) { a.backend.max_retries = static_cast<int>(count(n, q)); });
  field(s, p, "retry_backoff", [&](auto& n, auto& q) { a.backend.retry_backoff_seconds = number(n, q); });
  if (!(a.backend.timeout_seconds > 0.0)) throw ConfigError("agent.timeout: must be > 0");
  if (!(a.backend.temperature >= 0.0)) throw ConfigError("agent.temperature: must be >= 0");
}

void parse_solver(const YAML::Node& s, SimulationConfig& cfg) {
  const std::string p = "solver";
  check_keys(s, p, {"gap_tol", "int_tol", "node_limit", "time_limit"});
  field(s, p, "gap_tol", [&](auto& n, auto& q) { cfg.solver.gap_tol = number(n, q); });
  field(s, p, "int_tol", [&](auto& n, auto& q) { cfg.solver.int_tol = number(n, q); });
  field(s, p, "node_limit", [&](auto& n, auto& q) { cfg.solver.node_limit = count(n, q); });
  field(s, p, "time_limit", [&](auto& n, auto& q) { cfg.solver.time_limit = number(n, q); });
  if (!(cfg.solver.gap_tol >= 0.0)) throw ConfigError("solver.gap_tol: must be >= 0");
  if (!(cfg.solver.int_tol > 0.0 && cfg.solver.int_tol < 0.5)) throw ConfigError("solver.int_tol: must lie in (0, 0.5)");
  if (!(cfg.solver.time_limit > 0.0)) throw ConfigError("solver.time_limit: must be > 0");
}

}  // namespace

SimulationConfig parse_config(const std::string& document) {
  YAML::Node root;
  try {
    root = YAML::Load(document);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed config document: ") + e.what());
  }
  SimulationConfig cfg;
  if (!root || root.IsNull()) return cfg;
  check_keys(root, "config", {"simulation", "scenario", "system", "generators", "agent", "solver"});
  if (root["simulation"]) parse_simulation(root["simulation"], cfg);
  if (root["scenario"]) parse_scenario(root["scenario"], cfg);
  if (root["system"]) parse_system(root["system"], cfg);
  if (const YAML::Node g = root["generators"]) {
    if (!g.IsSequence() || g.size() == 0) throw ConfigError("generators: expected a non-empty list");
    cfg.generators.clear();
    for (std::size_t i = 0; i < g.size(); ++i) cfg.generators.push_back(parse_generator(g[i], i));
  }
  if (root["agent"]) parse_agent(root["agent"], cfg);
  if (root["solver"]) parse_solver(root["solver"], cfg);
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

nlohmann::json config_to_json(const SimulationConfig& cfg) {
  using nlohmann::json;
  json j;
  j["simulation"] = {{"dt", cfg.dt},
                     {"total_steps", cfg.total_steps},
                     {"lookahead", cfg.lookahead},
                     {"mode", to_string(cfg.mode)},
                     {"trials", cfg.trials},
                     {"seed", cfg.seed}};
  j["scenario"] = {{"phi", cfg.ar.phi},
                   {"eps_c", cfg.ar.eps_c},
                   {"quantiles", cfg.quantiles.levels()},
                   {"probability_rule", to_string(cfg.probability_rule)},
                   {"error_mode", to_string(cfg.error_mode)},
                   {"wind_cap", cfg.wind_cap}};
  if (cfg.probabilities) j["scenario"]["probabilities"] = *cfg.probabilities;
  j["system"] = {{"voll", cfg.voll},
                 {"ramp_mode", to_string(cfg.ramp_mode)},
                 {"nonanticipativity_stages", cfg.nonanticipativity_stages}};
  const SystemState init = initial_state(cfg);
  j["system"]["initial_commitment"] = init.commitment;
  j["system"]["initial_output"] = init.output;
  j["generators"] = json::array();
  for (const auto& g : cfg.generators)
    j["generators"].push_back({{"name", g.name},
                               {"startup_cost", g.startup_cost / kMillion},
                               {"p_max", g.p_max},
                               {"p_min", g.p_min},
                               {"gen_cost", g.gen_cost / kThousand},
                               {"ramp_up", g.ramp_up},
                               {"ramp_down", g.ramp_down}});
  const auto& a = cfg.agent;
  j["agent"] = {{"max_retries", a.max_retries},
                {"history_window", a.history_window},
                {"floor", a.calibration.floor},
                {"shrink", a.calibration.shrink},
                {"audit_log", a.audit_log},
                {"base_url", a.backend.base_url},
                {"model", a.backend.model},
                {"temperature", a.backend.temperature},
                {"timeout", a.backend.timeout_seconds},
                {"http_retries", a.backend.max_retries},
                {"retry_backoff", a.backend.retry_backoff_seconds}};
  j["solver"] = {{"gap_tol", cfg.solver.gap_tol},
                 {"int_tol", cfg.solver.int_tol},
                 {"node_limit", cfg.solver.node_limit},
                 {"time_limit", cfg.solver.time_limit}};
  return j;
}

namespace {

template <typename T>
T json_field(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(std::string("instance.") + key + ": missing");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("instance.") + key + ": wrong type");
  }
}

}  // namespace

UcInstance instance_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("instance: expected a JSON object");
  UcInstance inst;
  if (doc.contains("generators")) {
    // Reuse the config parser so both documents share units and checks.
    YAML::Node gens = YAML::Load(doc.at("generators").dump());
    if (!gens.IsSequence()) throw ConfigError("instance.generators: expected a list");
    for (std::size_t i = 0; i < gens.size(); ++i) inst.generators.push_back(parse_generator(gens[i], i));
  } else {
    inst.generators = reference_generators();
  }
  inst.dt = doc.value("dt", 1.0);
  inst.voll = doc.value("voll", 300000.0);
  inst.demand = json_field<std::vector<double>>(doc, "demand");
  inst.wind = json_field<std::vector<std::vector<double>>>(doc, "wind");
  inst.stages = inst.demand.size();
  inst.scenarios = inst.wind.size();
  try {
    if (doc.contains("probabilities"))
      inst.probabilities = ProbabilityVector(json_field<std::vector<double>>(doc, "probabilities"));
    else
      inst.probabilities = ProbabilityVector(std::vector<double>(inst.scenarios, 1.0 / static_cast<double>(inst.scenarios)));
    const std::size_t G = inst.generators.size();
    inst.initial_commitment = doc.contains("initial_commitment")
                                  ? json_field<std::vector<bool>>(doc, "initial_commitment")
                                  : std::vector<bool>(G, true);
    if (doc.contains("initial_output")) {
      inst.initial_output = json_field<std::vector<double>>(doc, "initial_output");
    } else {
      inst.initial_output.resize(G);
      for (std::size_t g = 0; g < G && g < inst.initial_commitment.size(); ++g)
        inst.initial_output[g] = inst.initial_commitment[g] ? inst.generators[g].p_min : 0.0;
    }
    inst.nonanticipativity_stages = doc.value("nonanticipativity_stages", std::size_t{1});
    inst.ramp_mode = ramp_mode_from_string(doc.value("ramp_mode", std::string("startup-aware")));
    inst.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("instance: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("instance: ") + e.what());
  }
  return inst;
}

nlohmann::json instance_to_json(const UcInstance& inst) {
  nlohmann::json gens = nlohmann::json::array();
  for (const auto& g : inst.generators)
    gens.push_back({{"name", g.name},
                    {"startup_cost", g.startup_cost / kMillion},
                    {"p_max", g.p_max},
                    {"p_min", g.p_min},
                    {"gen_cost", g.gen_cost / kThousand},
                    {"ramp_up", g.ramp_up},
                    {"ramp_down", g.ramp_down}});
  return {{"generators", gens},
          {"dt", inst.dt},
          {"voll", inst.voll},
          {"demand", inst.demand},
          {"wind", inst.wind},
          {"probabilities", inst.probabilities.values()},
          {"initial_commitment", inst.initial_commitment},
          {"initial_output", inst.initial_output},
          {"nonanticipativity_stages", inst.nonanticipativity_stages},
          {"ramp_mode", to_string(inst.ramp_mode)}};
}

}  // namespace windcommit
