#include "windcommit/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "lp_simplex.hpp"
#include "windcommit/error.hpp"

namespace windcommit {

std::size_t MilpProblem::add_variable(std::string name, double lb, double ub, double cost,
                                      VarType type) {
  names.push_back(std::move(name));
  lower.push_back(lb);
  upper.push_back(ub);
  objective.push_back(cost);
  types.push_back(type);
  return objective.size() - 1;
}

void MilpProblem::add_constraint(std::string name, std::vector<Term> terms, Sense sense,
                                 double rhs) {
  constraints.push_back({std::move(name), std::move(terms), sense, rhs});
}

void MilpProblem::validate() const {
  const std::size_t n = objective.size();
  if (lower.size() != n || upper.size() != n || types.size() != n)
    throw DomainError("problem arrays have inconsistent lengths");
  if (!names.empty() && names.size() != n) throw DomainError("names length mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j])) throw DomainError("non-finite objective coefficient");
    if (std::isnan(lower[j]) || std::isnan(upper[j])) throw DomainError("NaN bound");
    if (lower[j] > upper[j]) throw DomainError("lower bound exceeds upper bound");
    if (lower[j] == kInf || upper[j] == -kInf) throw DomainError("bound is infinite on wrong side");
    if (types[j] == VarType::Binary && (lower[j] < 0.0 || upper[j] > 1.0))
      throw DomainError("binary variable with bounds outside [0,1]");
  }
  for (const auto& c : constraints) {
    if (!std::isfinite(c.rhs)) throw DomainError("non-finite right-hand side");
    for (const auto& t : c.terms) {
      if (t.var >= n) throw DomainError("constraint references unknown variable");
      if (!std::isfinite(t.coef)) throw DomainError("non-finite constraint coefficient");
    }
  }
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::GapLimit: return "GapLimit";
    case SolveStatus::NodeLimit: return "NodeLimit";
  }
  return "Unknown";
}

SolveStatus status_from_string(const std::string& s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "optimal") return SolveStatus::Optimal;
  if (lower == "infeasible") return SolveStatus::Infeasible;
  if (lower == "unbounded") return SolveStatus::Unbounded;
  if (lower == "gaplimit") return SolveStatus::GapLimit;
  if (lower == "nodelimit") return SolveStatus::NodeLimit;
  throw DomainError("unknown solve status '" + s + "'");
}

double objective_value(const MilpProblem& problem, const std::vector<double>& values) {
  double s = 0.0;
  for (std::size_t j = 0; j < problem.num_vars(); ++j) s += problem.objective[j] * values.at(j);
  return s;
}

std::vector<RowViolation> check_solution(const MilpProblem& problem,
                                         const std::vector<double>& values, double feas_tol,
                                         double int_tol) {
  std::vector<RowViolation> out;
  const std::size_t m = problem.num_rows();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = problem.constraints[i];
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * values.at(t.var);
    double viol = 0.0;
    switch (c.sense) {
      case Sense::LessEqual: viol = lhs - c.rhs; break;
      case Sense::GreaterEqual: viol = c.rhs - lhs; break;
      case Sense::Equal: viol = std::abs(lhs - c.rhs); break;
    }
    if (viol > feas_tol) out.push_back({i, viol});
  }
  for (std::size_t j = 0; j < problem.num_vars(); ++j) {
    const double v = values.at(j);
    double viol = std::max(problem.lower[j] - v, v - problem.upper[j]);
    if (problem.is_integral(j)) viol = std::max(viol, std::abs(v - std::round(v)) - int_tol + feas_tol);
    if (viol > feas_tol) out.push_back({m + j, viol});
  }
  return out;
}

LpSolution solve_lp(const MilpProblem& problem) {
  problem.validate();
  detail::SimplexEngine engine(problem);
  LpSolution sol;
  switch (engine.solve()) {
    case detail::LpStatus::Optimal: sol.status = SolveStatus::Optimal; break;
    case detail::LpStatus::Infeasible: sol.status = SolveStatus::Infeasible; break;
    case detail::LpStatus::Unbounded: sol.status = SolveStatus::Unbounded; break;
    case detail::LpStatus::IterationLimit: throw SolverError("simplex iteration limit reached");
  }
  sol.iterations = engine.iterations();
  if (sol.status == SolveStatus::Optimal) {
    sol.values = engine.primal();
    sol.objective = engine.objective();
    sol.bound = sol.objective;
  }
  return sol;
}

namespace {

struct Node {
  double bound;
  std::size_t id;
  std::shared_ptr<detail::SimplexEngine> parent;  // may be null
  std::shared_ptr<const detail::Basis> parent_basis;
  // Bounds along the path from the root, replayed when no snapshot is kept.
  std::shared_ptr<const std::vector<std::tuple<std::size_t, double, double>>> path;
  std::size_t var;
  double lb, ub;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

double relative_gap(double incumbent, double bound) {
  const double diff = incumbent - bound;
  if (diff <= 1e-9 * std::max(1.0, std::abs(incumbent))) return 0.0;
  return diff / std::max(std::abs(incumbent), 1e-9);
}

}  // namespace

MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options) {
  problem.validate();
  if (options.gap_tol < 0.0) throw DomainError("gap_tol must be >= 0");
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = problem.num_vars();

  MilpSolution result;
  const detail::SimplexEngine pristine(problem);
  auto root = std::make_shared<detail::SimplexEngine>(pristine);

  auto run = [](detail::SimplexEngine& e) {
    auto st = e.solve();
    if (st == detail::LpStatus::IterationLimit)
      throw SolverError("simplex iteration limit reached in branch and bound");
    return st;
  };

  auto root_status = run(*root);
  result.nodes_explored = 1;
  if (root_status == detail::LpStatus::Infeasible) {
    result.status = SolveStatus::Infeasible;
    return result;
  }
  if (root_status == detail::LpStatus::Unbounded) {
    result.status = SolveStatus::Unbounded;
    return result;
  }

  double incumbent = kInf;
  std::vector<double> best;
  double pruned_bound = kInf;  // smallest bound discarded only because of the gap tolerance
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  // Until the first incumbent, nodes are taken depth first (up branch first);
  // equal-bound plateaus would otherwise be searched breadth first.
  std::vector<Node> dive;
  std::size_t next_id = 0;
  std::size_t snapshot_bytes = 0;

  auto prune_threshold = [&] {
    if (!std::isfinite(incumbent)) return kInf;
    return incumbent - std::max(options.gap_tol * std::abs(incumbent),
                                1e-9 * std::max(1.0, std::abs(incumbent)));
  };

  // Returns true if the node's LP produced children or an incumbent.
  auto process = [&](const std::shared_ptr<detail::SimplexEngine>& engine,
                     std::shared_ptr<const std::vector<std::tuple<std::size_t, double, double>>> path) {
    const double obj = engine->objective();
    if (obj >= prune_threshold()) {
      if (obj < incumbent) pruned_bound = std::min(pruned_bound, obj);
      return;
    }
    std::vector<double> x = engine->primal();
    std::size_t branch = static_cast<std::size_t>(-1);
    double most = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!problem.is_integral(j)) continue;
      const double f = x[j] - std::floor(x[j]);
      const double dist = std::min(f, 1.0 - f);
      if (dist > options.int_tol && dist > most) {
        most = dist;
        branch = j;
      }
    }
    if (branch == static_cast<std::size_t>(-1)) {
      for (std::size_t j = 0; j < n; ++j)
        if (problem.is_integral(j)) x[j] = std::round(x[j]);
      const double value = objective_value(problem, x);
      if (value < incumbent) {
        incumbent = value;
        best = std::move(x);
        for (auto& d : dive) open.push(std::move(d));
        dive.clear();
      }
      return;
    }
    const double v = x[branch];
    std::shared_ptr<detail::SimplexEngine> snap;
    if (snapshot_bytes + engine->tableau_bytes() <= options.snapshot_budget_bytes) {
      snap = engine;
      snapshot_bytes += engine->tableau_bytes();
    }
    auto basis = std::make_shared<const detail::Basis>(engine->basis());
    const double lb = engine->lower(branch), ub = engine->upper(branch);
    Node down{obj, next_id++, snap, basis, path, branch, lb, std::floor(v)};
    Node up{obj, next_id++, snap, basis, path, branch, std::ceil(v), ub};
    if (std::isfinite(incumbent)) {
      open.push(std::move(down));
      open.push(std::move(up));
    } else {
      dive.push_back(std::move(down));
      dive.push_back(std::move(up));
    }
  };

  // Finished engines are kept for reuse: copy-assigning into one reuses its
  // tableau storage instead of allocating a fresh block per node.
  std::vector<std::shared_ptr<detail::SimplexEngine>> pool;
  auto recycle = [&](std::shared_ptr<detail::SimplexEngine>& e) {
    if (e && e.use_count() == 1 && pool.size() < 8) pool.push_back(std::move(e));
    e.reset();
  };
  auto copy_of = [&](const detail::SimplexEngine& src) {
    if (pool.empty()) return std::make_shared<detail::SimplexEngine>(src);
    auto e = std::move(pool.back());
    pool.pop_back();
    *e = src;
    return e;
  };

  process(root, std::make_shared<const std::vector<std::tuple<std::size_t, double, double>>>());
  recycle(root);

  bool hit_nodes = false, hit_time = false;
  while (!open.empty() || !dive.empty()) {
    if (dive.empty() && std::isfinite(incumbent) &&
        relative_gap(incumbent, std::min(open.top().bound, pruned_bound)) <= options.gap_tol)
      break;
    if (result.nodes_explored >= options.node_limit) {
      hit_nodes = true;
      break;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (elapsed > options.time_limit) {
      hit_time = true;
      break;
    }

    Node node;
    if (!dive.empty()) {
      node = std::move(dive.back());
      dive.pop_back();
    } else {
      node = open.top();
      open.pop();
    }
    if (node.bound >= prune_threshold()) {
      if (node.bound < incumbent) pruned_bound = std::min(pruned_bound, node.bound);
      if (node.parent && node.parent.use_count() == 1) {
        snapshot_bytes -= node.parent->tableau_bytes();
        recycle(node.parent);
      }
      continue;
    }

    std::shared_ptr<detail::SimplexEngine> engine;
    if (node.parent) {
      // The last child of a parent takes its engine instead of copying it.
      if (node.parent.use_count() == 1) {
        snapshot_bytes -= node.parent->tableau_bytes();
        engine = std::move(node.parent);
      } else {
        engine = copy_of(*node.parent);
      }
      node.parent.reset();
    } else {
      engine = copy_of(pristine);
      for (const auto& [j, lb, ub] : *node.path) engine->set_bounds(j, lb, ub);
      engine->load_basis(*node.parent_basis);
    }
    engine->set_bounds(node.var, node.lb, node.ub);
    auto path = std::make_shared<std::vector<std::tuple<std::size_t, double, double>>>(*node.path);
    path->emplace_back(node.var, node.lb, node.ub);

    ++result.nodes_explored;
    auto st = run(*engine);
    // A child of a bounded root cannot be unbounded, so anything else is infeasible.
    if (st == detail::LpStatus::Optimal) process(engine, std::move(path));
    recycle(engine);
  }

  double bound = std::min(incumbent, pruned_bound);
  if (!open.empty()) bound = std::min(bound, open.top().bound);
  for (const auto& d : dive) bound = std::min(bound, d.bound);
  result.bound = bound;
  result.has_incumbent = std::isfinite(incumbent);
  if (result.has_incumbent) {
    result.values = best;
    result.objective = incumbent;
    result.gap = relative_gap(incumbent, bound);
  }
  if (hit_nodes) {
    result.status = SolveStatus::NodeLimit;
  } else if (hit_time) {
    result.status = SolveStatus::GapLimit;
  } else if (result.has_incumbent) {
    result.status = SolveStatus::Optimal;
  } else {
    result.status = SolveStatus::Infeasible;
  }
  return result;
}

MilpSolution InternalSolver::solve(const MilpProblem& problem) {
  return solve_milp(problem, options_);
}

}  // namespace windcommit
