#include "windcommit/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "windcommit/agents.hpp"
#include "windcommit/chat_backend.hpp"
#include "windcommit/config.hpp"
#include "windcommit/day_data.hpp"
#include "windcommit/error.hpp"
#include "windcommit/lp_format.hpp"
#include "windcommit/report.hpp"
#include "windcommit/simulator.hpp"

namespace windcommit {

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kSolver = 3 };

// Raised for configuration problems detected by the CLI itself.
struct StartupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_levels(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw StartupError("--quantiles: '" + item + "' is not a number");
    out.push_back(v);
  }
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StartupError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw StartupError("cannot write " + path);
}

struct RunOptions {
  std::string config;
  std::string data;
  std::string mode;
  std::string mock_script;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> steps;
};

SimulationConfig effective_config(const RunOptions& o) {
  SimulationConfig cfg = o.config.empty() ? SimulationConfig{} : load_config(o.config);
  if (!o.mode.empty()) cfg.mode = sim_mode_from_string(o.mode);
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (o.steps) cfg.total_steps = *o.steps;
  cfg.validate();
  return cfg;
}

DayData day_for(const RunOptions& o, const SimulationConfig& cfg, std::ostream& err) {
  if (o.data.empty()) return generate_synthetic_day(cfg.seed, cfg);
  DayData day = load_day_csv(o.data);
  for (const auto& w : clamp_wind(day, cfg.wind_cap)) err << "warning: " << w << "\n";
  return day;
}

// Decided before any solve so a missing key fails fast.
BackendFactory backend_factory(const RunOptions& o, const SimulationConfig& cfg) {
  if (!o.mock_script.empty()) {
    auto replies = std::make_shared<std::vector<std::string>>(load_mock_script(o.mock_script));
    if (replies->empty()) throw StartupError("mock script " + o.mock_script + " contains no replies");
    return [replies](std::size_t trial) -> std::unique_ptr<ChatBackend> {
      return std::make_unique<ScriptedBackend>(*replies, trial == 0 ? 0 : trial - 1);
    };
  }
  const auto key = api_key_from_env();
  if (!key)
    throw StartupError(std::string("mode llm needs an API key in the environment variable ") + kApiKeyVariable +
                       " (or pass --mock-script)");
  return [cfg, key](std::size_t trial) -> std::unique_ptr<ChatBackend> {
    HttpBackendConfig hc = cfg.agent.backend;
    hc.seed = static_cast<std::int64_t>(cfg.seed + trial);
    return std::make_unique<HttpChatBackend>(hc, *key);
  };
}

std::unique_ptr<AuditLog> open_audit(const SimulationConfig& cfg, const std::filesystem::path& out_dir,
                                     std::filesystem::path& path) {
  path = cfg.agent.audit_log.empty() ? out_dir / "audit.jsonl" : std::filesystem::path(cfg.agent.audit_log);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  return std::make_unique<AuditLog>(path);
}

void print_summary(std::ostream& out, const RunArtifacts& art, const std::string& row) {
  out << "total_cost_musd, load_curtailment_gwh, wind_curtailment_gwh\n" << row << "\n";
  out << "report: " << art.report.string() << "\n";
}

int cmd_tree(const std::string& quantiles, std::size_t stages, double phi, double eps_c,
             const std::string& rule, std::ostream& out) {
  SimulationConfig cfg;
  if (!quantiles.empty()) cfg.quantiles = QuantileSet(parse_levels(quantiles));
  cfg.ar.phi = phi;
  cfg.ar.eps_c = eps_c;
  cfg.ar.validate();
  cfg.probability_rule = probability_rule_from_string(rule);
  ScenarioTree tree = build_error_tree(cfg.quantiles, cfg.ar, stages);
  tree.probabilities = cfg.default_probabilities();
  out << render_tree(tree);
  return kOk;
}

int cmd_solve(const std::string& lp_file, const std::string& instance_file, const std::string& solution_out,
              const std::string& external, const MilpOptions& options, std::ostream& out) {
  if (lp_file.empty() == instance_file.empty())
    throw CLI::ValidationError("solve", "exactly one of --lp-file or --instance is required");
  std::unique_ptr<MilpSolver> solver;
  if (external.empty())
    solver = std::make_unique<InternalSolver>(options);
  else
    solver = std::make_unique<ExternalSolverAdapter>(external);

  if (!lp_file.empty()) {
    const MilpProblem problem = parse_lp(read_text(lp_file));
    const MilpSolution sol = solver->solve(problem);
    const std::string text = write_solution_file(problem, sol);
    if (!solution_out.empty()) write_text(solution_out, text);
    else out << text;
    if (!solution_out.empty()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.10g", sol.objective);
      out << "status " << to_string(sol.status) << "\nobjective " << buf << "\n";
    }
    // Infeasible and Unbounded are answers; only a limit without an incumbent is a failure.
    const bool limit = sol.status == SolveStatus::GapLimit || sol.status == SolveStatus::NodeLimit;
    return limit && !sol.has_incumbent ? kSolver : kOk;
  }

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text(instance_file));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("instance: malformed JSON: ") + e.what());
  }
  const UcInstance inst = instance_from_json(doc);
  const UcMilp milp = build_milp(inst);
  const MilpSolution sol = solver->solve(milp.problem);
  nlohmann::json result = {{"status", to_string(sol.status)}, {"nodes", sol.nodes_explored}};
  if (sol.has_incumbent) {
    const UcSolution us = decode_solution(inst, milp.map, sol.values, sol.objective);
    const CostBreakdown cost = evaluate_solution(inst, us);
    result["objective_usd"] = sol.objective;
    result["gap"] = sol.gap;
    result["cost"] = {{"startup_usd", cost.startup_total},
                      {"generation_usd", cost.generation_total},
                      {"load_curtail_usd", cost.load_curtail_cost},
                      {"total_usd", cost.total},
                      {"per_stage_usd", cost.per_stage},
                      {"load_curtailment_gwh", cost.load_curtail_energy},
                      {"wind_curtailment_gwh", cost.wind_curtail_energy}};
    result["commitment"] = us.commitment;
    result["output_gw"] = us.output;
    result["load_curtail_gw"] = us.load_curtail;
    result["wind_curtail_gw"] = us.wind_curtail;
    result["violations"] = check_feasibility(inst, us).size();
  }
  const std::string text = result.dump(2) + "\n";
  if (!solution_out.empty()) write_text(solution_out, text);
  else out << text;
  return sol.has_incumbent ? kOk : kSolver;
}

int cmd_simulate(const RunOptions& o, std::ostream& out, std::ostream& err) {
  const SimulationConfig cfg = effective_config(o);
  std::unique_ptr<ChatBackend> backend;
  if (cfg.mode == SimMode::Llm) backend = backend_factory(o, cfg)(0);
  const DayData day = day_for(o, cfg, err);
  std::filesystem::create_directories(o.out);
  std::filesystem::path audit_path;
  std::unique_ptr<AuditLog> audit;
  if (cfg.mode == SimMode::Llm) audit = open_audit(cfg, o.out, audit_path);
  InternalSolver solver(cfg.solver);
  const SimulationReport rep = run_simulation(cfg, day, backend.get(), solver, audit.get(), 0);
  const RunArtifacts art = write_report(rep, {}, cfg, o.out, audit_path);
  print_summary(out, art, render_table_row(rep.total_cost, rep.load_curtail_energy, rep.wind_curtail_energy));
  return kOk;
}

int cmd_trials(const RunOptions& o, std::ostream& out, std::ostream& err) {
  const SimulationConfig cfg = effective_config(o);
  const BackendFactory factory = backend_factory(o, cfg);
  const DayData day = day_for(o, cfg, err);
  std::filesystem::create_directories(o.out);
  std::filesystem::path audit_path;
  auto audit = open_audit(cfg, o.out, audit_path);
  InternalSolver solver(cfg.solver);
  const TrialsOutcome res = run_trials(cfg, day, factory, solver, audit.get());
  const RunArtifacts art = write_report(res.baseline, res.trials, cfg, o.out, audit_path);
  const auto& c = res.summary;
  out << "baseline, " << render_table_row(res.baseline.total_cost, res.baseline.load_curtail_energy,
                                          res.baseline.wind_curtail_energy)
      << "\n";
  out << "llm_mean, " << render_table_row(c.cost.mean, c.load_curtail.mean, c.wind_curtail.mean) << "\n";
  out << "success_rate " << c.success_rate << "\n";
  out << "report: " << art.report.string() << "\n";
  return kOk;
}

int cmd_synth(const RunOptions& o, const std::string& out_file, std::ostream& out) {
  const SimulationConfig cfg = effective_config(o);
  const DayData day = generate_synthetic_day(cfg.seed, cfg);
  write_day_csv(day, out_file);
  out << "wrote " << day.size() << " steps to " << out_file << "\n";
  return kOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic unit commitment with wind scenario trees", "windcommit"};
  app.require_subcommand(1);

  std::string quantiles, rule = "published";
  std::size_t stages = 8;
  double phi = 1.2, eps_c = 0.14;
  auto* tree = app.add_subcommand("tree", "Print a wind-error scenario tree");
  tree->add_option("--quantiles", quantiles, "Comma-separated quantile levels");
  tree->add_option("--stages", stages, "Number of stages")->check(CLI::PositiveNumber);
  tree->add_option("--phi", phi, "AR(1) persistence");
  tree->add_option("--eps-c", eps_c, "Error scaling");
  tree->add_option("--probability-rule", rule, "published or midpoint");

  std::string lp_file, instance_file, solution_out, external;
  MilpOptions mopts;
  auto* solve = app.add_subcommand("solve", "Solve an LP file or a UC instance");
  solve->add_option("--lp-file", lp_file, "Problem in LP text format");
  solve->add_option("--instance", instance_file, "UC instance as JSON");
  solve->add_option("--solution-out", solution_out, "Write the solution here instead of stdout");
  solve->add_option("--external", external, "External solver command template with {lp} and {sol}");
  solve->add_option("--gap-tol", mopts.gap_tol, "Relative optimality gap");
  solve->add_option("--node-limit", mopts.node_limit, "Branch-and-bound node limit");
  solve->add_option("--time-limit", mopts.time_limit, "Time limit in seconds");

  RunOptions run;
  auto add_run = [&](CLI::App* sub, bool with_data) {
    sub->add_option("--config", run.config, "YAML configuration file");
    sub->add_option("--seed", run.seed, "Override the configured seed");
    sub->add_option("--steps", run.steps, "Override the number of steps");
    if (with_data) {
      sub->add_option("--data", run.data, "Day CSV (default: synthetic day from the seed)");
      sub->add_option("--mock-script", run.mock_script, "Scripted replies instead of the live backend");
    }
  };
  auto* simulate = app.add_subcommand("simulate", "Run one rolling-horizon day");
  add_run(simulate, true);
  simulate->add_option("--mode", run.mode, "baseline or llm");
  simulate->add_option("--out", run.out, "Output directory");
  auto* trials = app.add_subcommand("trials", "Baseline plus repeated llm-mode runs");
  add_run(trials, true);
  trials->add_option("--trials", run.trials, "Override the number of trials");
  trials->add_option("--out", run.out, "Output directory");
  std::string synth_out = "day.csv";
  auto* synth = app.add_subcommand("synth", "Write a synthetic day CSV");
  add_run(synth, false);
  synth->add_option("--out", synth_out, "Output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*tree) return cmd_tree(quantiles, stages, phi, eps_c, rule, out);
    if (*solve) return cmd_solve(lp_file, instance_file, solution_out, external, mopts, out);
    if (*simulate) return cmd_simulate(run, out, err);
    if (*trials) return cmd_trials(run, out, err);
    if (*synth) return cmd_synth(run, synth_out, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const AdapterError& e) {
    err << "error: " << e.what() << "\n" << e.output() << "\n";
    return kSolver;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << "\n";
    return kSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace windcommit
