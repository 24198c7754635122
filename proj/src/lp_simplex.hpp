#pragma once

// Bounded-variable simplex on a dense tableau: dual iterations while the
// basis is dual feasible, primal iterations otherwise. Internal to the
// solver; branch and bound copies engines to warm-start child nodes.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "windcommit/milp.hpp"

namespace windcommit::detail {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

struct Basis {
  std::vector<std::size_t> header;  // basic variable of each row
  std::vector<VarStatus> status;    // per column, structurals then logicals
};

class SimplexEngine {
 public:
  explicit SimplexEngine(const MilpProblem& problem);

  LpStatus solve();

  // Structural bound change; nonbasic variables move to the new bound.
  void set_bounds(std::size_t j, double lb, double ub);
  double lower(std::size_t j) const { return lb_[j]; }
  double upper(std::size_t j) const { return ub_[j]; }

  // Replaces the basis and rebuilds the tableau from the original rows.
  void load_basis(const Basis& basis);
  Basis basis() const;

  std::vector<double> primal() const;  // structural values
  double objective() const;            // unscaled
  std::size_t iterations() const { return iterations_; }
  std::size_t tableau_bytes() const { return tableau_.size() * sizeof(double); }

 private:
  struct Rows;  // original data, shared between copies

  double& at(std::size_t i, std::size_t j) { return tableau_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return tableau_[i * cols_ + j]; }

  void refactor();
  void recompute_basic_values();
  void recompute_reduced_costs();
  void pivot(std::size_t row, std::size_t col);
  double max_row_residual() const;
  LpStatus iterate();
  bool dual_feasible() const;
  enum class DualOutcome { Feasible, Infeasible, Stalled };
  DualOutcome dual_iterate();

  std::shared_ptr<const Rows> rows_;
  std::size_t m_ = 0;     // rows
  std::size_t n_ = 0;     // structurals
  std::size_t cols_ = 0;  // n + m
  std::vector<double> tableau_;
  std::vector<double> lb_, ub_, x_, d_;
  std::vector<std::size_t> header_;
  std::vector<std::ptrdiff_t> row_of_;
  std::vector<VarStatus> status_;
  std::size_t iterations_ = 0;
};

}  // namespace windcommit::detail
