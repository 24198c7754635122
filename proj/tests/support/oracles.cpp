#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>

namespace oracle {

using windcommit::kInf;
using windcommit::MilpProblem;
using windcommit::Sense;
using windcommit::SolveStatus;

double normal_cdf(double x) {
  const double a = std::min(std::abs(x), 40.0);
  const int n = 20000;
  const double h = a / n;
  auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  double s = pdf(0.0) + pdf(a);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
  const double half = s * h / 3.0;
  return x >= 0 ? 0.5 + half : 0.5 - half;
}

double inverse_normal_cdf(double q) {
  double lo = -40.0, hi = 40.0;
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < q) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

constexpr double kEps = 1e-9;

struct Tableau {
  std::vector<std::vector<double>> a;  // rows x (cols + 1), last column rhs
  std::vector<std::size_t> basis;
  std::size_t cols = 0;

  void pivot(std::size_t r, std::size_t c) {
    const double p = a[r][c];
    for (double& v : a[r]) v /= p;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == r || a[i][c] == 0.0) continue;
      const double f = a[i][c];
      for (std::size_t j = 0; j <= cols; ++j) a[i][j] -= f * a[r][j];
    }
    basis[r] = c;
  }

  // Minimizes cost over the current basis with Bland's rule. Columns with
  // allowed[c] false never enter. Returns false when unbounded.
  bool minimize(const std::vector<double>& cost, const std::vector<bool>& allowed) {
    const std::size_t m = a.size();
    for (int guard = 0; guard < 100000; ++guard) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols && enter == cols; ++j) {
        if (!allowed[j]) continue;
        if (std::find(basis.begin(), basis.end(), j) != basis.end()) continue;
        double d = cost[j];
        for (std::size_t i = 0; i < m; ++i) d -= cost[basis[i]] * a[i][j];
        if (d < -kEps) enter = j;
      }
      if (enter == cols) return true;
      std::size_t leave = m;
      double best = kInf;
      for (std::size_t i = 0; i < m; ++i) {
        if (a[i][enter] <= kEps) continue;
        const double ratio = a[i][cols] / a[i][enter];
        if (ratio < best - 1e-12 || (ratio <= best + 1e-12 && leave < m && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
    throw std::runtime_error("reference simplex did not terminate");
  }
};

}  // namespace

LpResult reference_lp(const MilpProblem& p) {
  const std::size_t n = p.num_vars();
  for (std::size_t j = 0; j < n; ++j)
    if (!std::isfinite(p.lower[j])) throw std::invalid_argument("reference_lp needs finite lower bounds");

  // Rows over shifted variables x' = x - lb >= 0.
  struct Row {
    std::vector<double> coef;
    Sense sense;
    double rhs;
  };
  std::vector<Row> rows;
  for (const auto& c : p.constraints) {
    Row r{std::vector<double>(n, 0.0), c.sense, c.rhs};
    for (const auto& t : c.terms) {
      r.coef[t.var] += t.coef;
      r.rhs -= t.coef * p.lower[t.var];
    }
    rows.push_back(std::move(r));
  }
  for (std::size_t j = 0; j < n; ++j)
    if (std::isfinite(p.upper[j])) {
      Row r{std::vector<double>(n, 0.0), Sense::LessEqual, p.upper[j] - p.lower[j]};
      r.coef[j] = 1.0;
      rows.push_back(std::move(r));
    }
  for (auto& r : rows)
    if (r.rhs < 0) {
      for (double& v : r.coef) v = -v;
      r.rhs = -r.rhs;
      if (r.sense == Sense::LessEqual) r.sense = Sense::GreaterEqual;
      else if (r.sense == Sense::GreaterEqual) r.sense = Sense::LessEqual;
    }

  const std::size_t m = rows.size();
  // Columns: structurals, one slack/surplus per inequality, one artificial per row.
  std::size_t slacks = 0;
  for (const auto& r : rows) slacks += r.sense != Sense::Equal;
  const std::size_t cols = n + slacks + m;
  Tableau t;
  t.cols = cols;
  t.a.assign(m, std::vector<double>(cols + 1, 0.0));
  t.basis.resize(m);
  std::vector<bool> artificial(cols, false);
  std::size_t s = n;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t.a[i][j] = rows[i].coef[j];
    if (rows[i].sense == Sense::LessEqual) t.a[i][s++] = 1.0;
    else if (rows[i].sense == Sense::GreaterEqual) t.a[i][s++] = -1.0;
    const std::size_t art = n + slacks + i;
    t.a[i][art] = 1.0;
    artificial[art] = true;
    t.a[i][cols] = rows[i].rhs;
    t.basis[i] = art;
  }

  std::vector<double> phase1(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) phase1[j] = artificial[j] ? 1.0 : 0.0;
  std::vector<bool> all(cols, true);
  t.minimize(phase1, all);
  double infeas = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    if (artificial[t.basis[i]]) infeas += t.a[i][cols];
  LpResult res;
  if (infeas > 1e-7) return res;

  // Drive zero-level artificials out of the basis where possible.
  for (std::size_t i = 0; i < m; ++i) {
    if (!artificial[t.basis[i]]) continue;
    for (std::size_t j = 0; j < cols; ++j)
      if (!artificial[j] && std::abs(t.a[i][j]) > 1e-9) {
        t.pivot(i, j);
        break;
      }
  }
  std::vector<double> cost(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = p.objective[j];
  std::vector<bool> allowed(cols);
  for (std::size_t j = 0; j < cols; ++j) allowed[j] = !artificial[j];
  if (!t.minimize(cost, allowed)) {
    res.status = SolveStatus::Unbounded;
    return res;
  }
  res.status = SolveStatus::Optimal;
  res.x = p.lower;
  for (std::size_t i = 0; i < m; ++i)
    if (t.basis[i] < n) res.x[t.basis[i]] += t.a[i][cols];
  for (std::size_t j = 0; j < n; ++j) res.objective += p.objective[j] * res.x[j];
  return res;
}

namespace {

LpResult best_over(MilpProblem& work, const std::vector<std::size_t>& vars,
                   const std::vector<std::pair<long, long>>& ranges) {
  LpResult best;
  bool any_unbounded = false;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == vars.size()) {
      LpResult r = reference_lp(work);
      if (r.status == SolveStatus::Unbounded) any_unbounded = true;
      if (r.status == SolveStatus::Optimal &&
          (best.status != SolveStatus::Optimal || r.objective < best.objective))
        best = std::move(r);
      return;
    }
    for (long v = ranges[k].first; v <= ranges[k].second; ++v) {
      work.lower[vars[k]] = work.upper[vars[k]] = static_cast<double>(v);
      rec(k + 1);
    }
  };
  rec(0);
  if (any_unbounded) best.status = SolveStatus::Unbounded;
  return best;
}

}  // namespace

LpResult enumerate_milp(const MilpProblem& problem) {
  MilpProblem work = problem;
  std::vector<std::size_t> vars;
  std::vector<std::pair<long, long>> ranges;
  for (std::size_t j = 0; j < problem.num_vars(); ++j) {
    if (!problem.is_integral(j)) continue;
    if (!std::isfinite(problem.lower[j]) || !std::isfinite(problem.upper[j]))
      throw std::invalid_argument("enumerate_milp needs finite integer ranges");
    vars.push_back(j);
    ranges.emplace_back(static_cast<long>(std::ceil(problem.lower[j] - 1e-9)),
                        static_cast<long>(std::floor(problem.upper[j] + 1e-9)));
  }
  return best_over(work, vars, ranges);
}

LpResult enumerate_uc(const windcommit::UcInstance& inst) {
  windcommit::UcMilp milp = windcommit::build_milp(inst);
  MilpProblem& work = milp.problem;
  const std::size_t G = inst.generators.size();
  // Free commitment decisions: shared stages once, then per scenario.
  std::vector<std::vector<std::size_t>> groups;  // columns tied to one decision
  for (std::size_t g = 0; g < G; ++g)
    for (std::size_t t = 0; t < inst.stages; ++t) {
      if (t < inst.nonanticipativity_stages) {
        std::vector<std::size_t> cols;
        for (std::size_t n = 0; n < inst.scenarios; ++n) cols.push_back(milp.map.commitment(n, g, t));
        groups.push_back(cols);
      } else {
        for (std::size_t n = 0; n < inst.scenarios; ++n) groups.push_back({milp.map.commitment(n, g, t)});
      }
    }
  LpResult best;
  const std::size_t patterns = std::size_t{1} << groups.size();
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    for (std::size_t k = 0; k < groups.size(); ++k)
      for (std::size_t c : groups[k]) work.lower[c] = work.upper[c] = (mask >> k) & 1u;
    LpResult r = reference_lp(work);
    if (r.status == SolveStatus::Optimal && (best.status != SolveStatus::Optimal || r.objective < best.objective))
      best = std::move(r);
  }
  return best;
}

Dispatch merit_order(const std::vector<windcommit::Generator>& gens, const std::vector<int>& y,
                     const std::vector<bool>& prior_y, const std::vector<double>& prior_p, double demand,
                     double wind, double dt, double voll) {
  const std::size_t G = gens.size();
  std::vector<double> lo(G, 0.0), hi(G, 0.0);
  for (std::size_t g = 0; g < G; ++g) {
    if (!y[g]) {
      // Ramping down to zero must be possible from the prior output.
      continue;
    }
    const auto& gen = gens[g];
    const double up = prior_y[g] ? dt * gen.ramp_up : std::max(gen.p_min, dt * gen.ramp_up);
    const double down = dt * gen.ramp_down;
    lo[g] = std::max(gen.p_min, prior_p[g] - down);
    hi[g] = std::min(gen.p_max, prior_p[g] + up);
  }
  Dispatch d;
  d.output = lo;
  double net = demand - wind;
  for (double v : lo) net -= v;
  if (net < 0.0) {
    d.wind_curtail = -net;  // excess must be absorbed by curtailing wind
  } else {
    std::vector<std::size_t> order(G);
    for (std::size_t g = 0; g < G; ++g) order[g] = g;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return gens[a].gen_cost < gens[b].gen_cost; });
    for (std::size_t g : order) {
      if (net <= 0.0 || gens[g].gen_cost >= voll) break;
      const double add = std::min(net, hi[g] - lo[g]);
      d.output[g] += add;
      net -= add;
    }
    d.load_curtail = std::max(0.0, net);
  }
  for (std::size_t g = 0; g < G; ++g) d.cost += dt * gens[g].gen_cost * d.output[g];
  d.cost += voll * dt * d.load_curtail;
  return d;
}

}  // namespace oracle

namespace fixture {

windcommit::UcInstance random_uc_instance(std::uint64_t seed, std::size_t max_gens, std::size_t max_stages,
                                          std::size_t max_scenarios) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };

  windcommit::UcInstance inst;
  const std::size_t G = pick(1, max_gens);
  inst.stages = pick(1, max_stages);
  inst.scenarios = pick(1, max_scenarios);
  inst.dt = pick(0, 1) ? 1.0 : 0.5;
  inst.voll = uniform(5e4, 4e5);
  inst.ramp_mode = windcommit::RampMode::StartupAware;
  for (std::size_t g = 0; g < G; ++g) {
    windcommit::Generator gen;
    gen.name = "U" + std::to_string(g + 1);
    gen.p_max = std::round(uniform(3.0, 15.0) * 4.0) / 4.0;
    gen.p_min = std::round(uniform(0.0, 0.5) * gen.p_max * 4.0) / 4.0;
    gen.startup_cost = std::round(uniform(0.0, 4e6));
    gen.gen_cost = std::round(uniform(2e4, 1.5e5));
    gen.ramp_up = std::round(uniform(1.0, 8.0) * 2.0) / 2.0;
    gen.ramp_down = std::round(uniform(1.0, 8.0) * 2.0) / 2.0;
    inst.generators.push_back(gen);
    const bool on = pick(0, 1) == 1;
    inst.initial_commitment.push_back(on);
    // Keep shutdown reachable at the first stage so every instance is feasible.
    const double p0_max = std::min(gen.p_max, std::max(gen.p_min, inst.dt * gen.ramp_down));
    inst.initial_output.push_back(on ? std::clamp(std::round(uniform(gen.p_min, p0_max) * 4.0) / 4.0, gen.p_min, p0_max) : 0.0);
  }
  for (std::size_t t = 0; t < inst.stages; ++t) inst.demand.push_back(std::round(uniform(2.0, 25.0) * 4.0) / 4.0);
  inst.wind.assign(inst.scenarios, std::vector<double>(inst.stages));
  for (auto& row : inst.wind)
    for (double& w : row) w = std::round(uniform(0.0, 12.0) * 4.0) / 4.0;
  std::vector<double> p(inst.scenarios);
  double sum = 0.0;
  for (double& v : p) sum += (v = uniform(0.1, 1.0));
  for (double& v : p) v /= sum;
  inst.probabilities = windcommit::ProbabilityVector(p);
  inst.nonanticipativity_stages = pick(1, inst.stages);
  return inst;
}

}  // namespace fixture
