#include "windcommit/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "windcommit/error.hpp"

namespace windcommit {

std::string to_string(SimMode mode) { return mode == SimMode::Llm ? "llm" : "baseline"; }

SimMode sim_mode_from_string(const std::string& s) {
  if (s == "baseline") return SimMode::Baseline;
  if (s == "llm") return SimMode::Llm;
  throw DomainError("unknown mode '" + s + "' (expected baseline or llm)");
}

std::string to_string(ProbabilityRule rule) {
  return rule == ProbabilityRule::Midpoint ? "midpoint" : "published";
}

ProbabilityRule probability_rule_from_string(const std::string& s) {
  if (s == "published") return ProbabilityRule::Published;
  if (s == "midpoint") return ProbabilityRule::Midpoint;
  throw DomainError("unknown probability rule '" + s + "' (expected published or midpoint)");
}

std::string to_string(ErrorMode mode) { return mode == ErrorMode::Absolute ? "absolute" : "per-unit"; }

ErrorMode error_mode_from_string(const std::string& s) {
  if (s == "per-unit") return ErrorMode::PerUnit;
  if (s == "absolute") return ErrorMode::Absolute;
  throw DomainError("unknown error mode '" + s + "' (expected per-unit or absolute)");
}

void SimulationConfig::validate() const {
  if (!(dt > 0.0)) throw DomainError("dt must be > 0");
  if (total_steps < 1) throw DomainError("total_steps must be >= 1");
  if (lookahead < 1) throw DomainError("lookahead must be >= 1");
  if (trials < 1) throw DomainError("trials must be >= 1");
  ar.validate();
  if (!(wind_cap > 0.0)) throw DomainError("wind_cap must be > 0");
  if (!(voll >= 0.0)) throw DomainError("voll must be >= 0");
  if (generators.empty()) throw DomainError("at least one generator is required");
  for (const auto& g : generators) g.validate();
  if (nonanticipativity_stages < 1) throw DomainError("nonanticipativity_stages must be >= 1");
  if (probabilities && probabilities->size() != quantiles.size())
    throw DomainError("probabilities must have one entry per quantile");
  if (initial_commitment && initial_commitment->size() != generators.size())
    throw DomainError("initial_commitment must have one entry per generator");
  if (initial_output && initial_output->size() != generators.size())
    throw DomainError("initial_output must have one entry per generator");
  if (agent.calibration.floor < 0.0) throw DomainError("calibration floor must be >= 0");
  if (!(agent.calibration.shrink >= 0.0 && agent.calibration.shrink <= 1.0))
    throw DomainError("calibration shrink must lie in [0,1]");
  default_probabilities();
  initial_state(*this);
}

ProbabilityVector SimulationConfig::default_probabilities() const {
  if (probabilities) return ProbabilityVector(*probabilities);
  if (probability_rule == ProbabilityRule::Published && quantiles.is_canonical())
    return ProbabilityVector::published_default();
  return branch_probabilities(quantiles);
}

SystemState initial_state(const SimulationConfig& cfg) {
  SystemState s;
  const std::size_t G = cfg.generators.size();
  s.commitment = cfg.initial_commitment.value_or(std::vector<bool>(G, true));
  if (cfg.initial_output) {
    s.output = *cfg.initial_output;
  } else {
    s.output.resize(G);
    for (std::size_t g = 0; g < G; ++g) s.output[g] = s.commitment[g] ? cfg.generators[g].p_min : 0.0;
  }
  for (std::size_t g = 0; g < G; ++g) {
    const auto& gen = cfg.generators[g];
    if (s.output[g] < 0.0 || s.output[g] > gen.p_max)
      throw DomainError("initial output of " + gen.name + " outside [0, p_max]");
    if (!s.commitment[g] && s.output[g] != 0.0)
      throw DomainError("initial output of " + gen.name + " must be 0 when it starts off");
  }
  return s;
}

Window assemble_window(const DayData& day, std::size_t step, const SimulationConfig& cfg) {
  if (step >= day.size()) throw DomainError("step " + std::to_string(step) + " outside the day");
  const std::size_t len = std::min(cfg.lookahead, day.size() - step);
  auto cap = [&](double w) { return std::clamp(w, 0.0, cfg.wind_cap); };
  Window w;
  w.demand.push_back(day.demand_actual[step]);
  w.wind.push_back(cap(day.wind_actual[step]));
  for (std::size_t k = 1; k < len; ++k) {
    w.demand.push_back(day.demand_forecast[step + k]);
    w.wind.push_back(cap(day.wind_forecast[step + k]));
  }
  return w;
}

UcInstance window_instance(const SystemState& state, const Window& window,
                           const ProbabilityVector& probs, const SimulationConfig& cfg) {
  const std::size_t K = window.wind.size();
  if (K == 0 || window.demand.size() != K) throw DomainError("malformed window");
  ScenarioTree tree = build_error_tree(cfg.quantiles, cfg.ar, K);
  UcInstance inst;
  inst.generators = cfg.generators;
  inst.stages = K;
  inst.dt = cfg.dt;
  inst.voll = cfg.voll;
  inst.demand = window.demand;
  if (probs.size() != tree.branches()) throw DomainError("probability vector does not match the quantiles");
  // Zero-mass branches add nothing to the expected cost; keeping them only
  // hands branch and bound binaries that can never move the bound.
  const auto wind = apply_errors(tree, window.wind, cfg.wind_cap, cfg.error_mode);
  std::vector<double> kept;
  for (std::size_t n = 0; n < wind.size(); ++n) {
    if (probs[n] <= 0.0) continue;
    inst.wind.push_back(wind[n]);
    kept.push_back(probs[n]);
  }
  inst.scenarios = kept.size();
  inst.probabilities = ProbabilityVector(std::move(kept));
  inst.initial_commitment = state.commitment;
  inst.initial_output = state.output;
  inst.nonanticipativity_stages = std::min(cfg.nonanticipativity_stages, K);
  inst.ramp_mode = cfg.ramp_mode;
  return inst;
}

StepResult run_step(const SystemState& state, const Window& window, const ProbabilityVector& probs,
                    const SimulationConfig& cfg, MilpSolver& solver) {
  const UcInstance inst = window_instance(state, window, probs, cfg);
  const UcMilp milp = build_milp(inst);
  const auto t0 = std::chrono::steady_clock::now();
  const MilpSolution sol = solver.solve(milp.problem);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!sol.has_incumbent)
    throw SolverError("window solve returned no solution (status " + to_string(sol.status) + ")");
  const UcSolution plan = decode_solution(inst, milp.map, sol.values, sol.objective);
  const std::size_t G = cfg.generators.size();

  // Redispatch the first interval against actuals with commitments fixed.
  UcInstance real;
  real.generators = cfg.generators;
  real.stages = 1;
  real.scenarios = 1;
  real.dt = cfg.dt;
  real.voll = cfg.voll;
  real.demand = {window.demand[0]};
  real.wind = {{window.wind[0]}};
  real.initial_commitment = state.commitment;
  real.initial_output = state.output;
  real.nonanticipativity_stages = 1;
  real.ramp_mode = cfg.ramp_mode;
  UcMilp ed = build_milp(real);
  std::vector<int> y(G);
  for (std::size_t g = 0; g < G; ++g) {
    y[g] = plan.commitment[0][g][0] > 0.5 ? 1 : 0;
    const std::size_t j = ed.map.commitment(0, g, 0);
    ed.problem.lower[j] = ed.problem.upper[j] = y[g];
    ed.problem.types[j] = VarType::Continuous;
  }
  const LpSolution lp = solve_lp(ed.problem);
  if (lp.status != SolveStatus::Optimal)
    throw SolverError("redispatch with fixed commitments failed (status " + to_string(lp.status) + ")");

  StepRecord r;
  r.commitment = y;
  r.output.resize(G);
  r.wind = window.wind[0];
  r.demand = window.demand[0];
  for (std::size_t g = 0; g < G; ++g) {
    const auto& gen = cfg.generators[g];
    r.output[g] = std::clamp(lp.values[ed.map.output(0, g, 0)], 0.0, y[g] ? gen.p_max : 0.0);
    if (y[g] && !state.commitment[g]) r.startup_cost += gen.startup_cost;
    r.generation_cost += cfg.dt * gen.gen_cost * r.output[g];
  }
  r.wind_curtail = std::clamp(lp.values[ed.map.wind_curtail(0, 0)], 0.0, r.wind);
  r.load_curtail = std::clamp(lp.values[ed.map.load_curtail(0, 0)], 0.0, r.demand);
  r.curtail_cost = cfg.voll * cfg.dt * r.load_curtail;
  r.cost = r.startup_cost + r.generation_cost + r.curtail_cost;
  r.planned_objective = sol.objective;
  r.probabilities = probs.values();
  r.nodes = sol.nodes_explored;
  r.solve_seconds = seconds;

  SystemState next;
  next.commitment.resize(G);
  for (std::size_t g = 0; g < G; ++g) next.commitment[g] = y[g] == 1;
  next.output = r.output;
  return {std::move(r), std::move(next)};
}

SimulationReport run_simulation(const SimulationConfig& cfg, const DayData& day,
                                ChatBackend* backend, MilpSolver& solver, AuditLog* audit,
                                std::size_t trial_id) {
  cfg.validate();
  day.validate();
  if (day.size() < cfg.total_steps)
    throw DomainError("day data has " + std::to_string(day.size()) + " steps, need " +
                      std::to_string(cfg.total_steps));
  if (cfg.mode == SimMode::Llm && backend == nullptr)
    throw DomainError("llm mode needs a chat backend");

  const ProbabilityVector defaults = cfg.default_probabilities();
  SimulationReport report;
  report.mode = cfg.mode;
  report.trial_id = trial_id;
  report.seed = cfg.seed;
  SystemState state = initial_state(cfg);

  for (std::size_t step = 0; step < cfg.total_steps; ++step) {
    const Window window = assemble_window(day, step, cfg);
    ProbabilityVector probs = defaults;
    Provenance provenance = Provenance::Default;
    std::size_t exchanges = 0;
    if (cfg.mode == SimMode::Llm) {
      // Realized history includes the reading at the current step.
      const std::size_t hw = cfg.agent.history_window;
      const std::size_t begin = (hw == 0 || step + 1 <= hw) ? 0 : step + 1 - hw;
      RefinementContext ctx;
      ctx.stats = compute_error_stats(
          std::span<const double>(day.wind_actual).subspan(begin, step + 1 - begin),
          std::span<const double>(day.wind_forecast).subspan(begin, step + 1 - begin));
      for (std::size_t t = begin; t <= step; ++t)
        ctx.history.push_back({day.wind_actual[t], day.wind_forecast[t]});
      ctx.quantiles = cfg.quantiles;
      ctx.defaults = defaults;
      ctx.calibration = cfg.agent.calibration;
      const std::string session = "trial" + std::to_string(trial_id) + "/step" + std::to_string(step);
      RefinementResult res = refine_probabilities(*backend, ctx, cfg.agent.max_retries, audit, session);
      probs = std::move(res.probabilities);
      provenance = res.provenance;
      exchanges = res.exchanges;
    }
    StepResult result = run_step(state, window, probs, cfg, solver);
    result.record.step = step;
    result.record.provenance = provenance;
    result.record.exchanges = exchanges;
    report.total_cost += result.record.cost;
    report.load_curtail_energy += result.record.load_curtail * cfg.dt;
    report.wind_curtail_energy += result.record.wind_curtail * cfg.dt;
    report.records.push_back(std::move(result.record));
    state = std::move(result.next);
  }
  return report;
}

MetricSummary summarize(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("cannot summarize an empty list");
  MetricSummary m;
  const double n = static_cast<double>(values.size());
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / (n - 1.0));
  }
  m.min = *std::min_element(values.begin(), values.end());
  m.max = *std::max_element(values.begin(), values.end());
  m.cv = m.mean != 0.0 ? m.std / m.mean : 0.0;
  return m;
}

ComparisonSummary compare_trials(const SimulationReport& baseline,
                                 const std::vector<SimulationReport>& trials) {
  if (trials.empty()) throw DomainError("comparison needs at least one trial");
  ComparisonSummary c;
  c.trials = trials.size();
  c.baseline_cost = baseline.total_cost;
  std::vector<double> load, wind;
  std::size_t wins = 0;
  for (const auto& t : trials) {
    if (t.records.size() != baseline.records.size())
      throw DomainError("trial and baseline cover different numbers of steps");
    c.trial_costs.push_back(t.total_cost);
    load.push_back(t.load_curtail_energy);
    wind.push_back(t.wind_curtail_energy);
    if (t.total_cost < baseline.total_cost) ++wins;
  }
  c.cost = summarize(c.trial_costs);
  c.load_curtail = summarize(load);
  c.wind_curtail = summarize(wind);
  c.success_rate = static_cast<double>(wins) / static_cast<double>(trials.size());
  for (std::size_t s = 0; s < baseline.records.size(); ++s) {
    std::vector<double> costs;
    for (const auto& t : trials) costs.push_back(t.records[s].cost);
    const MetricSummary m = summarize(costs);
    c.envelope.push_back({baseline.records[s].step, m.min, m.mean, m.max, baseline.records[s].cost});
  }
  return c;
}

TrialsOutcome run_trials(const SimulationConfig& cfg, const DayData& day,
                         const BackendFactory& make_backend, MilpSolver& solver, AuditLog* audit) {
  TrialsOutcome out;
  SimulationConfig base = cfg;
  base.mode = SimMode::Baseline;
  out.baseline = run_simulation(base, day, nullptr, solver, audit, 0);
  SimulationConfig llm = cfg;
  llm.mode = SimMode::Llm;
  for (std::size_t i = 1; i <= cfg.trials; ++i) {
    std::unique_ptr<ChatBackend> backend = make_backend(i);
    out.trials.push_back(run_simulation(llm, day, backend.get(), solver, audit, i));
  }
  out.summary = compare_trials(out.baseline, out.trials);
  return out;
}

}  // namespace windcommit
