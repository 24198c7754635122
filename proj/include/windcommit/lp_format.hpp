#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "windcommit/milp.hpp"

namespace windcommit {

class LpFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Carries the external solver's captured output.
class AdapterError : public std::runtime_error {
 public:
  AdapterError(const std::string& what, std::string output)
      : std::runtime_error(what), output_(std::move(output)) {}
  const std::string& output() const { return output_; }

 private:
  std::string output_;
};

// CPLEX-style LP text. Every variable is listed in the objective (zero
// coefficients included) so that parsing restores the variable order, and
// every variable gets an explicit Bounds line. Numbers use 17 significant
// digits, so write -> parse reproduces the problem exactly.
std::string write_lp(const MilpProblem& problem);
MilpProblem parse_lp(std::string_view text);

// Names as they appear in the LP text (sanitized, unique).
std::vector<std::string> lp_names(const MilpProblem& problem);

// "status <Status>" line followed by one "<name> <value>" line per variable.
std::string write_solution_file(const MilpProblem& problem, const MilpSolution& solution);
MilpSolution parse_solution_file(std::string_view text, const MilpProblem& problem);

// Runs an external MILP solver through file interchange. The command is a
// shell template; "{lp}" and "{sol}" are replaced by the problem and
// solution file paths.
class ExternalSolverAdapter : public MilpSolver {
 public:
  explicit ExternalSolverAdapter(std::string command_template,
                                 std::filesystem::path work_dir = {});
  MilpSolution solve(const MilpProblem& problem) override;

 private:
  std::string command_template_;
  std::filesystem::path work_dir_;
};

}  // namespace windcommit
