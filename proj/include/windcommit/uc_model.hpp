#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "windcommit/milp.hpp"
#include "windcommit/scenario_tree.hpp"

namespace windcommit {

// Thermal unit. Costs are held in $ and $/GWh, powers in GW, ramps in GW/h.
struct Generator {
  std::string name;
  double startup_cost = 0.0;
  double p_max = 0.0;
  double p_min = 0.0;
  double gen_cost = 0.0;
  double ramp_up = 0.0;
  double ramp_down = 0.0;

  void validate() const;
};

// The three units of the reference system (startup 4/2/4 M$, 10/12/15 GW,
// min 3/2/0 GW, 40/60/120 k$/GWh, ramps 4/4/6 GW/h).
std::vector<Generator> reference_generators();

enum class RampMode {
  StartupAware,  // off units may start straight to max(p_min, dt*RU)
  Literal,       // -dt*RD*y(t-1) <= P(t)-P(t-1) <= dt*RU*y(t-1)
};

std::string to_string(RampMode mode);
RampMode ramp_mode_from_string(const std::string& s);

struct UcInstance {
  std::vector<Generator> generators;
  std::size_t stages = 1;
  std::size_t scenarios = 1;
  double dt = 1.0;     // h
  double voll = 0.0;   // $/GWh
  std::vector<double> demand;              // [stage], GW
  std::vector<std::vector<double>> wind;   // [scenario][stage], GW
  ProbabilityVector probabilities{std::vector<double>{1.0}};
  std::vector<bool> initial_commitment;    // [generator]
  std::vector<double> initial_output;      // [generator], GW
  std::size_t nonanticipativity_stages = 1;
  RampMode ramp_mode = RampMode::StartupAware;

  void validate() const;
};

// Arrays indexed [scenario][generator][stage] (y, s, p) and [scenario][stage].
struct UcSolution {
  std::vector<std::vector<std::vector<double>>> commitment;
  std::vector<std::vector<std::vector<double>>> startup;
  std::vector<std::vector<std::vector<double>>> output;
  std::vector<std::vector<double>> wind_curtail;
  std::vector<std::vector<double>> load_curtail;
  double objective = 0.0;

  static UcSolution zeros(const UcInstance& instance);
};

struct CostBreakdown {
  double startup_total = 0.0;
  double generation_total = 0.0;
  double load_curtail_cost = 0.0;
  double total = 0.0;
  std::vector<double> per_stage;
  double load_curtail_energy = 0.0;  // GWh, probability weighted
  double wind_curtail_energy = 0.0;  // GWh, probability weighted
};

// Column positions of the UC variables inside the generated MILP.
class VariableMap {
 public:
  VariableMap() = default;
  VariableMap(std::size_t scenarios, std::size_t generators, std::size_t stages);

  std::size_t commitment(std::size_t n, std::size_t g, std::size_t t) const { return gen_block(n, g, t) + 0; }
  std::size_t startup(std::size_t n, std::size_t g, std::size_t t) const { return gen_block(n, g, t) + 1; }
  std::size_t output(std::size_t n, std::size_t g, std::size_t t) const { return gen_block(n, g, t) + 2; }
  std::size_t wind_curtail(std::size_t n, std::size_t t) const { return sys_block(n, t) + 0; }
  std::size_t load_curtail(std::size_t n, std::size_t t) const { return sys_block(n, t) + 1; }
  std::size_t size() const { return scenarios_ * stages_ * (3 * generators_ + 2); }

 private:
  // Per scenario and stage: 3 columns per generator, then the two curtailments.
  std::size_t gen_block(std::size_t n, std::size_t g, std::size_t t) const {
    return (n * stages_ + t) * (3 * generators_ + 2) + 3 * g;
  }
  std::size_t sys_block(std::size_t n, std::size_t t) const {
    return (n * stages_ + t) * (3 * generators_ + 2) + 3 * generators_;
  }

  std::size_t scenarios_ = 0, generators_ = 0, stages_ = 0;
};

struct UcMilp {
  MilpProblem problem;
  VariableMap map;
};

UcMilp build_milp(const UcInstance& instance);

UcSolution decode_solution(const UcInstance& instance, const VariableMap& map,
                           const std::vector<double>& values, double objective);

// Recomputes every cost term from the decision values.
CostBreakdown evaluate_solution(const UcInstance& instance, const UcSolution& sol);

enum class UcConstraint {
  Bounds,
  PowerBalance,
  GenerationLimit,
  Startup,
  RampUp,
  RampDown,
  Nonanticipativity,
  Integrality,
};

std::string to_string(UcConstraint c);

struct Violation {
  UcConstraint constraint;
  std::size_t scenario;   // 0-based
  std::size_t stage;      // 0-based
  std::size_t generator;  // 0-based; meaningless for system-level rows
  double magnitude;
};

std::vector<Violation> check_feasibility(const UcInstance& instance, const UcSolution& sol,
                                         double tol = 1e-6);

}  // namespace windcommit
