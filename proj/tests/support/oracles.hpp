#pragma once

// Test-only reference implementations. They share no code with the library
// beyond the problem containers and the UC model builder.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "windcommit/milp.hpp"
#include "windcommit/uc_model.hpp"

namespace oracle {

// Standard normal CDF by composite Simpson integration of the density.
double normal_cdf(double x);
// Bisection on normal_cdf to 1e-14.
double inverse_normal_cdf(double q);

struct LpResult {
  windcommit::SolveStatus status = windcommit::SolveStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

// Dense two-phase simplex with Bland's rule. All lower bounds must be finite.
LpResult reference_lp(const windcommit::MilpProblem& problem);

// Every assignment of the integer variables (finite ranges only), each
// completed by reference_lp.
LpResult enumerate_milp(const windcommit::MilpProblem& problem);

// Enumerates commitment patterns that respect the shared leading stages and
// completes each with reference_lp on the model with y fixed.
LpResult enumerate_uc(const windcommit::UcInstance& instance);

// Single-interval economic dispatch with fixed commitments by merit order.
// Returns the cost of generation plus load curtailment (no startup costs).
struct Dispatch {
  std::vector<double> output;
  double wind_curtail = 0.0;
  double load_curtail = 0.0;
  double cost = 0.0;
};
Dispatch merit_order(const std::vector<windcommit::Generator>& gens, const std::vector<int>& commitment,
                     const std::vector<bool>& prior_commitment, const std::vector<double>& prior_output,
                     double demand, double wind, double dt, double voll);

}  // namespace oracle

namespace fixture {

// Small seeded UC instance: 1..max_gens units, 1..max_stages stages,
// 1..max_scenarios scenarios, dt in {0.5, 1}.
windcommit::UcInstance random_uc_instance(std::uint64_t seed, std::size_t max_gens, std::size_t max_stages,
                                          std::size_t max_scenarios);

}  // namespace fixture
