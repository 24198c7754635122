#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace windcommit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarType { Continuous, Binary, Integer };
enum class Sense { LessEqual, Equal, GreaterEqual };

struct Term {
  std::size_t var;
  double coef;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

// Minimization problem over bounded variables with sparse linear rows.
struct MilpProblem {
  std::vector<std::string> names;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<VarType> types;
  std::vector<Constraint> constraints;

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return constraints.size(); }

  std::size_t add_variable(std::string name, double lb, double ub, double cost,
                           VarType type = VarType::Continuous);
  void add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs);

  bool is_integral(std::size_t j) const { return types[j] != VarType::Continuous; }

  // Throws DomainError on inconsistent sizes, bad indices, NaN/inf
  // coefficients, or binaries with bounds outside [0,1].
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, GapLimit, NodeLimit };

std::string to_string(SolveStatus s);
SolveStatus status_from_string(const std::string& s);

struct LpSolution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  double bound = 0.0;  // equals objective at an LP optimum
  std::size_t iterations = 0;
};

struct MilpSolution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  double bound = -kInf;
  double gap = kInf;
  std::size_t nodes_explored = 0;
  bool has_incumbent = false;
};

struct MilpOptions {
  double gap_tol = 1e-6;
  double int_tol = 1e-6;
  std::size_t node_limit = 200000;
  double time_limit = 600.0;  // seconds
  // Open nodes keep a copy of their parent's tableau while the total stays
  // under this budget; beyond it they are rebuilt from the stored basis.
  std::size_t snapshot_budget_bytes = std::size_t{1} << 30;
};

// LP relaxation (integrality ignored).
LpSolution solve_lp(const MilpProblem& problem);

// Best-bound branch and bound with most-fractional branching.
MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options = {});

struct RowViolation {
  std::size_t row;  // num_rows() + j for a bound or integrality violation on var j
  double magnitude;
};

// Independent re-check of bounds, rows and integrality.
std::vector<RowViolation> check_solution(const MilpProblem& problem,
                                         const std::vector<double>& values,
                                         double feas_tol = 1e-6, double int_tol = 1e-6);

double objective_value(const MilpProblem& problem, const std::vector<double>& values);

// Anything that turns a MilpProblem into a MilpSolution.
class MilpSolver {
 public:
  virtual ~MilpSolver() = default;
  virtual MilpSolution solve(const MilpProblem& problem) = 0;
};

class InternalSolver : public MilpSolver {
 public:
  explicit InternalSolver(MilpOptions options = {}) : options_(options) {}
  MilpSolution solve(const MilpProblem& problem) override;
  const MilpOptions& options() const { return options_; }

 private:
  MilpOptions options_;
};

}  // namespace windcommit
