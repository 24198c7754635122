#include "windcommit/uc_model.hpp"

#include <algorithm>
#include <cmath>

#include "windcommit/error.hpp"

namespace windcommit {

void Generator::validate() const {
  auto fail = [&](const std::string& field, const std::string& why) {
    throw DomainError("generator '" + name + "': " + field + " " + why);
  };
  if (!(p_min >= 0.0)) fail("p_min", "must be >= 0");
  if (!(p_max >= p_min)) fail("p_max", "must be >= p_min");
  if (!(startup_cost >= 0.0)) fail("startup_cost", "must be >= 0");
  if (!(gen_cost >= 0.0)) fail("gen_cost", "must be >= 0");
  if (!(ramp_up > 0.0)) fail("ramp_up", "must be > 0");
  if (!(ramp_down > 0.0)) fail("ramp_down", "must be > 0");
}

std::vector<Generator> reference_generators() {
  return {
      {"G1", 4e6, 10.0, 3.0, 40e3, 4.0, 4.0},
      {"G2", 2e6, 12.0, 2.0, 60e3, 4.0, 4.0},
      {"G3", 4e6, 15.0, 0.0, 120e3, 6.0, 6.0},
  };
}

std::string to_string(RampMode mode) {
  return mode == RampMode::StartupAware ? "startup-aware" : "literal";
}

RampMode ramp_mode_from_string(const std::string& s) {
  if (s == "startup-aware") return RampMode::StartupAware;
  if (s == "literal") return RampMode::Literal;
  throw DomainError("unknown ramp mode '" + s + "'");
}

void UcInstance::validate() const {
  if (generators.empty()) throw DomainError("instance has no generators");
  for (const auto& g : generators) g.validate();
  if (stages < 1 || scenarios < 1) throw DomainError("instance needs >= 1 stage and scenario");
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (!(voll >= 0.0)) throw DomainError("voll must be >= 0");
  if (demand.size() != stages) throw DomainError("demand length must equal stages");
  if (wind.size() != scenarios) throw DomainError("wind rows must equal scenarios");
  for (const auto& row : wind)
    if (row.size() != stages) throw DomainError("wind columns must equal stages");
  for (double d : demand)
    if (!(d >= 0.0)) throw DomainError("demand must be >= 0");
  for (const auto& row : wind)
    for (double w : row)
      if (!(w >= 0.0)) throw DomainError("wind must be >= 0");
  if (probabilities.size() != scenarios) throw DomainError("probabilities must match scenarios");
  if (initial_commitment.size() != generators.size() || initial_output.size() != generators.size())
    throw DomainError("initial state must cover every generator");
  for (std::size_t g = 0; g < generators.size(); ++g) {
    const double p0 = initial_output[g];
    if (!(p0 >= 0.0 && p0 <= generators[g].p_max))
      throw DomainError("initial output of '" + generators[g].name + "' outside [0, p_max]");
    if (!initial_commitment[g] && p0 != 0.0)
      throw DomainError("initial output of uncommitted '" + generators[g].name + "' must be 0");
  }
  if (nonanticipativity_stages < 1 || nonanticipativity_stages > stages)
    throw DomainError("nonanticipativity_stages must lie in [1, stages]");
}

VariableMap::VariableMap(std::size_t scenarios, std::size_t generators, std::size_t stages)
    : scenarios_(scenarios), generators_(generators), stages_(stages) {}

UcSolution UcSolution::zeros(const UcInstance& inst) {
  UcSolution s;
  const std::size_t G = inst.generators.size();
  auto cube = std::vector(inst.scenarios, std::vector(G, std::vector<double>(inst.stages, 0.0)));
  s.commitment = s.startup = s.output = cube;
  s.wind_curtail = s.load_curtail =
      std::vector(inst.scenarios, std::vector<double>(inst.stages, 0.0));
  return s;
}

namespace {

std::string idx(const char* prefix, std::size_t n, std::size_t g, std::size_t t) {
  return std::string(prefix) + "_s" + std::to_string(n + 1) + "_g" + std::to_string(g + 1) +
         "_t" + std::to_string(t + 1);
}

std::string idx(const char* prefix, std::size_t n, std::size_t t) {
  return std::string(prefix) + "_s" + std::to_string(n + 1) + "_t" + std::to_string(t + 1);
}

}  // namespace

UcMilp build_milp(const UcInstance& inst) {
  inst.validate();
  const std::size_t N = inst.scenarios, G = inst.generators.size(), K = inst.stages;
  UcMilp out{MilpProblem{}, VariableMap(N, G, K)};
  MilpProblem& p = out.problem;
  const VariableMap& map = out.map;

  for (std::size_t n = 0; n < N; ++n) {
    const double pi = inst.probabilities[n];
    for (std::size_t t = 0; t < K; ++t) {
      for (std::size_t g = 0; g < G; ++g) {
        const Generator& gen = inst.generators[g];
        p.add_variable(idx("y", n, g, t), 0.0, 1.0, 0.0, VarType::Binary);
        p.add_variable(idx("s", n, g, t), 0.0, 1.0, pi * gen.startup_cost);
        p.add_variable(idx("P", n, g, t), 0.0, gen.p_max, pi * inst.dt * gen.gen_cost);
      }
      p.add_variable(idx("wcur", n, t), 0.0, inst.wind[n][t], 0.0);
      p.add_variable(idx("lcur", n, t), 0.0, inst.demand[t], pi * inst.voll * inst.dt);
    }
  }

  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t t = 0; t < K; ++t) {
      // sum P + wind - wcur = demand - lcur
      std::vector<Term> bal;
      for (std::size_t g = 0; g < G; ++g) bal.push_back({map.output(n, g, t), 1.0});
      bal.push_back({map.wind_curtail(n, t), -1.0});
      bal.push_back({map.load_curtail(n, t), 1.0});
      p.add_constraint(idx("balance", n, t), std::move(bal), Sense::Equal,
                       inst.demand[t] - inst.wind[n][t]);

      for (std::size_t g = 0; g < G; ++g) {
        const Generator& gen = inst.generators[g];
        const std::size_t y = map.commitment(n, g, t), s = map.startup(n, g, t),
                          P = map.output(n, g, t);
        p.add_constraint(idx("pmin", n, g, t), {{P, 1.0}, {y, -gen.p_min}}, Sense::GreaterEqual, 0.0);
        p.add_constraint(idx("pmax", n, g, t), {{P, 1.0}, {y, -gen.p_max}}, Sense::LessEqual, 0.0);

        // s >= y(t) - y(t-1)
        if (t == 0) {
          p.add_constraint(idx("start", n, g, t), {{s, 1.0}, {y, -1.0}}, Sense::GreaterEqual,
                           inst.initial_commitment[g] ? -1.0 : 0.0);
        } else {
          p.add_constraint(idx("start", n, g, t),
                           {{s, 1.0}, {y, -1.0}, {map.commitment(n, g, t - 1), 1.0}},
                           Sense::GreaterEqual, 0.0);
        }

        const double ru = inst.dt * gen.ramp_up, rd = inst.dt * gen.ramp_down;
        const double y0 = inst.initial_commitment[g] ? 1.0 : 0.0, p0 = inst.initial_output[g];
        if (inst.ramp_mode == RampMode::StartupAware) {
          const double mu = std::max(gen.p_min, ru), md = std::max(gen.p_min, rd);
          // P(t) - P(t-1) + (mu - ru) y(t-1) <= mu
          // P(t-1) - P(t) + (md - rd) y(t) <= md
          if (t == 0) {
            p.add_constraint(idx("rampup", n, g, t), {{P, 1.0}}, Sense::LessEqual,
                             mu + p0 - (mu - ru) * y0);
            p.add_constraint(idx("rampdn", n, g, t), {{P, -1.0}, {y, md - rd}}, Sense::LessEqual,
                             md - p0);
          } else {
            const std::size_t Pp = map.output(n, g, t - 1), yp = map.commitment(n, g, t - 1);
            p.add_constraint(idx("rampup", n, g, t), {{P, 1.0}, {Pp, -1.0}, {yp, mu - ru}},
                             Sense::LessEqual, mu);
            p.add_constraint(idx("rampdn", n, g, t), {{Pp, 1.0}, {P, -1.0}, {y, md - rd}},
                             Sense::LessEqual, md);
          }
        } else {
          // P(t) - P(t-1) - ru y(t-1) <= 0 and P(t-1) - P(t) - rd y(t-1) <= 0
          if (t == 0) {
            p.add_constraint(idx("rampup", n, g, t), {{P, 1.0}}, Sense::LessEqual, p0 + ru * y0);
            p.add_constraint(idx("rampdn", n, g, t), {{P, -1.0}}, Sense::LessEqual, rd * y0 - p0);
          } else {
            const std::size_t Pp = map.output(n, g, t - 1), yp = map.commitment(n, g, t - 1);
            p.add_constraint(idx("rampup", n, g, t), {{P, 1.0}, {Pp, -1.0}, {yp, -ru}},
                             Sense::LessEqual, 0.0);
            p.add_constraint(idx("rampdn", n, g, t), {{Pp, 1.0}, {P, -1.0}, {yp, -rd}},
                             Sense::LessEqual, 0.0);
          }
        }
      }
    }
  }

  for (std::size_t n = 1; n < N; ++n)
    for (std::size_t t = 0; t < inst.nonanticipativity_stages; ++t)
      for (std::size_t g = 0; g < G; ++g) {
        p.add_constraint(idx("na_y", n, g, t),
                         {{map.commitment(n, g, t), 1.0}, {map.commitment(0, g, t), -1.0}},
                         Sense::Equal, 0.0);
        p.add_constraint(idx("na_P", n, g, t),
                         {{map.output(n, g, t), 1.0}, {map.output(0, g, t), -1.0}},
                         Sense::Equal, 0.0);
      }
  return out;
}

UcSolution decode_solution(const UcInstance& inst, const VariableMap& map,
                           const std::vector<double>& values, double objective) {
  if (values.size() != map.size()) throw DomainError("solution vector does not match variable map");
  UcSolution s = UcSolution::zeros(inst);
  for (std::size_t n = 0; n < inst.scenarios; ++n)
    for (std::size_t t = 0; t < inst.stages; ++t) {
      for (std::size_t g = 0; g < inst.generators.size(); ++g) {
        s.commitment[n][g][t] = values[map.commitment(n, g, t)];
        s.startup[n][g][t] = values[map.startup(n, g, t)];
        s.output[n][g][t] = values[map.output(n, g, t)];
      }
      s.wind_curtail[n][t] = values[map.wind_curtail(n, t)];
      s.load_curtail[n][t] = values[map.load_curtail(n, t)];
    }
  s.objective = objective;
  return s;
}

namespace {

void check_dims(const UcInstance& inst, const UcSolution& sol) {
  const std::size_t G = inst.generators.size();
  auto cube_ok = [&](const auto& c) {
    if (c.size() != inst.scenarios) return false;
    for (const auto& a : c) {
      if (a.size() != G) return false;
      for (const auto& b : a)
        if (b.size() != inst.stages) return false;
    }
    return true;
  };
  auto sq_ok = [&](const auto& c) {
    if (c.size() != inst.scenarios) return false;
    for (const auto& a : c)
      if (a.size() != inst.stages) return false;
    return true;
  };
  if (!cube_ok(sol.commitment) || !cube_ok(sol.startup) || !cube_ok(sol.output) ||
      !sq_ok(sol.wind_curtail) || !sq_ok(sol.load_curtail))
    throw DomainError("solution dimensions do not match the instance");
}

}  // namespace

CostBreakdown evaluate_solution(const UcInstance& inst, const UcSolution& sol) {
  check_dims(inst, sol);
  CostBreakdown c;
  c.per_stage.assign(inst.stages, 0.0);
  for (std::size_t n = 0; n < inst.scenarios; ++n) {
    const double pi = inst.probabilities[n];
    for (std::size_t t = 0; t < inst.stages; ++t) {
      double st = 0.0, gen = 0.0;
      for (std::size_t g = 0; g < inst.generators.size(); ++g) {
        st += inst.generators[g].startup_cost * sol.startup[n][g][t];
        gen += inst.dt * inst.generators[g].gen_cost * sol.output[n][g][t];
      }
      const double lc = inst.voll * inst.dt * sol.load_curtail[n][t];
      c.startup_total += pi * st;
      c.generation_total += pi * gen;
      c.load_curtail_cost += pi * lc;
      c.per_stage[t] += pi * (st + gen + lc);
      c.load_curtail_energy += pi * inst.dt * sol.load_curtail[n][t];
      c.wind_curtail_energy += pi * inst.dt * sol.wind_curtail[n][t];
    }
  }
  c.total = c.startup_total + c.generation_total + c.load_curtail_cost;
  return c;
}

std::string to_string(UcConstraint c) {
  switch (c) {
    case UcConstraint::Bounds: return "bounds";
    case UcConstraint::PowerBalance: return "power-balance";
    case UcConstraint::GenerationLimit: return "generation-limit";
    case UcConstraint::Startup: return "startup";
    case UcConstraint::RampUp: return "ramp-up";
    case UcConstraint::RampDown: return "ramp-down";
    case UcConstraint::Nonanticipativity: return "nonanticipativity";
    case UcConstraint::Integrality: return "integrality";
  }
  return "unknown";
}

std::vector<Violation> check_feasibility(const UcInstance& inst, const UcSolution& sol,
                                         double tol) {
  check_dims(inst, sol);
  std::vector<Violation> out;
  auto report = [&](UcConstraint c, std::size_t n, std::size_t t, std::size_t g, double mag) {
    if (mag > tol) out.push_back({c, n, t, g, mag});
  };
  auto outside = [](double v, double lo, double hi) { return std::max({lo - v, v - hi, 0.0}); };
  const std::size_t G = inst.generators.size();

  for (std::size_t n = 0; n < inst.scenarios; ++n) {
    for (std::size_t t = 0; t < inst.stages; ++t) {
      double supply = 0.0;
      for (std::size_t g = 0; g < G; ++g) {
        const Generator& gen = inst.generators[g];
        const double y = sol.commitment[n][g][t], s = sol.startup[n][g][t],
                     P = sol.output[n][g][t];
        supply += P;
        report(UcConstraint::Bounds, n, t, g,
               std::max({outside(y, 0, 1), outside(s, 0, 1), outside(P, 0, gen.p_max)}));
        report(UcConstraint::Integrality, n, t, g, std::abs(y - std::round(y)));
        report(UcConstraint::GenerationLimit, n, t, g,
               std::max({y * gen.p_min - P, P - y * gen.p_max, 0.0}));

        const double y_prev = t == 0 ? (inst.initial_commitment[g] ? 1.0 : 0.0)
                                     : sol.commitment[n][g][t - 1];
        const double p_prev = t == 0 ? inst.initial_output[g] : sol.output[n][g][t - 1];
        report(UcConstraint::Startup, n, t, g, y - y_prev - s);

        const double ru = inst.dt * gen.ramp_up, rd = inst.dt * gen.ramp_down;
        double up_limit, down_limit;
        if (inst.ramp_mode == RampMode::StartupAware) {
          up_limit = ru * y_prev + std::max(gen.p_min, ru) * (1.0 - y_prev);
          down_limit = rd * y + std::max(gen.p_min, rd) * (1.0 - y);
        } else {
          up_limit = ru * y_prev;
          down_limit = rd * y_prev;
        }
        report(UcConstraint::RampUp, n, t, g, (P - p_prev) - up_limit);
        report(UcConstraint::RampDown, n, t, g, (p_prev - P) - down_limit);

        if (n > 0 && t < inst.nonanticipativity_stages) {
          report(UcConstraint::Nonanticipativity, n, t, g,
                 std::max(std::abs(y - sol.commitment[0][g][t]),
                          std::abs(P - sol.output[0][g][t])));
        }
      }
      const double wc = sol.wind_curtail[n][t], lc = sol.load_curtail[n][t];
      report(UcConstraint::Bounds, n, t, G,
             std::max(outside(wc, 0, inst.wind[n][t]), outside(lc, 0, inst.demand[t])));
      report(UcConstraint::PowerBalance, n, t, G,
             std::abs(supply + inst.wind[n][t] - wc - (inst.demand[t] - lc)));
    }
  }
  return out;
}

}  // namespace windcommit
