#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "windcommit/agents.hpp"
#include "windcommit/chat_backend.hpp"
#include "windcommit/day_data.hpp"
#include "windcommit/milp.hpp"
#include "windcommit/scenario_tree.hpp"
#include "windcommit/uc_model.hpp"

namespace windcommit {

enum class SimMode { Baseline, Llm };
std::string to_string(SimMode mode);
SimMode sim_mode_from_string(const std::string& s);

// Source of the default branch probabilities. Published uses the fixed
// five-entry vector when the quantiles are the canonical set and falls back
// to the midpoint rule otherwise.
enum class ProbabilityRule { Published, Midpoint };
std::string to_string(ProbabilityRule rule);
ProbabilityRule probability_rule_from_string(const std::string& s);

std::string to_string(ErrorMode mode);
ErrorMode error_mode_from_string(const std::string& s);

struct AgentSettings {
  std::size_t max_retries = 2;
  std::size_t history_window = 0;  // steps of realized history; 0 = all
  CalibrationParams calibration;
  HttpBackendConfig backend;
  std::string audit_log;  // empty: audit.jsonl next to the report
};

struct SimulationConfig {
  double dt = 0.5;
  std::size_t total_steps = 48;
  std::size_t lookahead = 8;
  SimMode mode = SimMode::Baseline;
  std::size_t trials = 10;
  std::uint64_t seed = 42;

  ArParams ar;
  QuantileSet quantiles = QuantileSet::canonical();
  ProbabilityRule probability_rule = ProbabilityRule::Published;
  std::optional<std::vector<double>> probabilities;  // explicit override
  ErrorMode error_mode = ErrorMode::PerUnit;
  double wind_cap = 20.0;

  std::vector<Generator> generators = reference_generators();
  double voll = 300000.0;  // $/GWh
  RampMode ramp_mode = RampMode::StartupAware;
  std::size_t nonanticipativity_stages = 1;
  // Unset: every unit on at p_min.
  std::optional<std::vector<bool>> initial_commitment;
  std::optional<std::vector<double>> initial_output;

  AgentSettings agent;
  MilpOptions solver;

  void validate() const;
  ProbabilityVector default_probabilities() const;
};

struct SystemState {
  std::vector<bool> commitment;
  std::vector<double> output;
};

SystemState initial_state(const SimulationConfig& cfg);

struct Window {
  std::vector<double> demand;
  std::vector<double> wind;  // entry 0 is the actual reading, the rest forecasts
};

Window assemble_window(const DayData& day, std::size_t step, const SimulationConfig& cfg);

struct StepRecord {
  std::size_t step = 0;
  std::vector<int> commitment;
  std::vector<double> output;
  double wind = 0.0;
  double demand = 0.0;
  double load_curtail = 0.0;
  double wind_curtail = 0.0;
  double startup_cost = 0.0;
  double generation_cost = 0.0;
  double curtail_cost = 0.0;
  double cost = 0.0;
  double planned_objective = 0.0;  // expected cost of the window solve
  std::vector<double> probabilities;
  Provenance provenance = Provenance::Default;
  std::size_t exchanges = 0;
  std::size_t nodes = 0;
  double solve_seconds = 0.0;
};

struct StepResult {
  StepRecord record;
  SystemState next;
};

// Builds the window instance (scenario tree over the window, errors applied
// to the wind forecast; branches with zero probability are left out), solves
// it, then fixes the first-interval commitments and redispatches against the
// actual wind and demand.
UcInstance window_instance(const SystemState& state, const Window& window,
                           const ProbabilityVector& probs, const SimulationConfig& cfg);
StepResult run_step(const SystemState& state, const Window& window, const ProbabilityVector& probs,
                    const SimulationConfig& cfg, MilpSolver& solver);

struct SimulationReport {
  std::vector<StepRecord> records;
  double total_cost = 0.0;           // $
  double load_curtail_energy = 0.0;  // GWh
  double wind_curtail_energy = 0.0;  // GWh
  SimMode mode = SimMode::Baseline;
  std::size_t trial_id = 0;
  std::uint64_t seed = 0;
};

// llm mode requires a backend; baseline ignores it.
SimulationReport run_simulation(const SimulationConfig& cfg, const DayData& day,
                                ChatBackend* backend, MilpSolver& solver,
                                AuditLog* audit = nullptr, std::size_t trial_id = 0);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample, N-1
  double min = 0.0;
  double max = 0.0;
  double cv = 0.0;  // std / mean, 0 when mean is 0
};

MetricSummary summarize(const std::vector<double>& values);

struct EnvelopeRow {
  std::size_t step = 0;
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  double baseline = 0.0;
};

struct ComparisonSummary {
  std::size_t trials = 0;
  MetricSummary cost;
  MetricSummary load_curtail;
  MetricSummary wind_curtail;
  double success_rate = 0.0;  // share of trials strictly cheaper than baseline
  std::vector<double> trial_costs;
  double baseline_cost = 0.0;
  std::vector<EnvelopeRow> envelope;
};

ComparisonSummary compare_trials(const SimulationReport& baseline,
                                 const std::vector<SimulationReport>& trials);

struct TrialsOutcome {
  SimulationReport baseline;
  std::vector<SimulationReport> trials;
  ComparisonSummary summary;
};

using BackendFactory = std::function<std::unique_ptr<ChatBackend>(std::size_t trial_id)>;

// One baseline run and cfg.trials llm-mode runs, executed in order.
TrialsOutcome run_trials(const SimulationConfig& cfg, const DayData& day,
                         const BackendFactory& make_backend, MilpSolver& solver,
                         AuditLog* audit = nullptr);

}  // namespace windcommit
