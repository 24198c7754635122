#include <gtest/gtest.h>

#include <random>

#include "windcommit/lp_format.hpp"
#include "windcommit/uc_model.hpp"

using namespace windcommit;

namespace {

MilpProblem sample() {
  MilpProblem p;
  p.add_variable("y[1,G1,1]", 0, 1, 0.1, VarType::Binary);
  p.add_variable("p", 0.5, 12.25, 1.0 / 3.0);
  p.add_variable("free var", -kInf, kInf, 0.0);
  p.add_variable("k", -2, 7, -4, VarType::Integer);
  p.add_constraint("bal", {{1, 1.0}, {2, -1.0}, {3, 0.125}}, Sense::Equal, 3.3);
  p.add_constraint("cap", {{0, -12.25}, {1, 1.0}}, Sense::LessEqual, 0.0);
  p.add_constraint("lo", {{2, 1e-7}, {3, 2.0}}, Sense::GreaterEqual, -1e6);
  return p;
}

void expect_same(const MilpProblem& a, const MilpProblem& b) {
  ASSERT_EQ(a.num_vars(), b.num_vars());
  ASSERT_EQ(a.num_rows(), b.num_rows());
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.lower, b.lower);
  EXPECT_EQ(a.upper, b.upper);
  EXPECT_EQ(a.types, b.types);
  for (std::size_t i = 0; i < a.num_rows(); ++i) {
    const auto& ca = a.constraints[i];
    const auto& cb = b.constraints[i];
    EXPECT_EQ(ca.sense, cb.sense) << i;
    EXPECT_EQ(ca.rhs, cb.rhs) << i;
    ASSERT_EQ(ca.terms.size(), cb.terms.size()) << i;
    for (std::size_t k = 0; k < ca.terms.size(); ++k) {
      EXPECT_EQ(ca.terms[k].var, cb.terms[k].var);
      EXPECT_EQ(ca.terms[k].coef, cb.terms[k].coef);
    }
  }
}

std::string cli() { return WINDCOMMIT_CLI; }

}  // namespace

TEST(LpText, RoundTripIsExact) {
  const auto p = sample();
  const auto text = write_lp(p);
  const auto q = parse_lp(text);
  expect_same(p, q);
  EXPECT_EQ(write_lp(q), text);
}

TEST(LpText, RoundTripOfUcModel) {
  UcInstance inst;
  inst.generators = reference_generators();
  inst.stages = 3;
  inst.scenarios = 2;
  inst.dt = 0.5;
  inst.voll = 3e5;
  inst.demand = {25, 27, 29};
  inst.wind = {{5, 6, 7}, {5, 4, 3}};
  inst.probabilities = ProbabilityVector({0.3, 0.7});
  inst.initial_commitment = {true, true, false};
  inst.initial_output = {3, 2, 0};
  const auto model = build_milp(inst);
  const auto q = parse_lp(write_lp(model.problem));
  expect_same(model.problem, q);
  EXPECT_NEAR(solve_milp(q).objective, solve_milp(model.problem).objective, 1e-6);
}

TEST(LpText, RandomCoefficientsSurvive) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  MilpProblem p;
  for (int j = 0; j < 20; ++j) p.add_variable("v" + std::to_string(j), u(rng) - 2e3, u(rng) + 2e3, u(rng));
  for (int i = 0; i < 10; ++i) {
    std::vector<Term> t;
    for (std::size_t j = 0; j < 20; j += 1 + i % 3) t.push_back({j, u(rng)});
    p.add_constraint("r" + std::to_string(i), t, static_cast<Sense>(i % 3), u(rng));
  }
  expect_same(p, parse_lp(write_lp(p)));
}

TEST(LpText, NamesAreSanitizedAndUnique) {
  MilpProblem p;
  p.add_variable("a b", 0, 1, 0);
  p.add_variable("a_b", 0, 1, 0);
  p.add_variable("", 0, 1, 0);
  const auto names = lp_names(p);
  ASSERT_EQ(names.size(), 3u);
  EXPECT_NE(names[0], names[1]);
  for (const auto& n : names) {
    EXPECT_FALSE(n.empty());
    EXPECT_EQ(n.find(' '), std::string::npos);
  }
}

TEST(LpText, MalformedInputThrows) {
  EXPECT_THROW(parse_lp("Subject To\n c: x <= 1\nEnd\n"), LpFormatError);
  EXPECT_THROW(parse_lp("Minimize\n obj: 1 x\nSubject To\n c: 2 x <== 1\nEnd\n"), LpFormatError);
  EXPECT_THROW(parse_lp(""), LpFormatError);
}

TEST(SolutionFile, RoundTrip) {
  const auto p = sample();
  const auto s = solve_milp(p);
  ASSERT_TRUE(s.has_incumbent);
  const auto back = parse_solution_file(write_solution_file(p, s), p);
  EXPECT_EQ(back.status, s.status);
  EXPECT_EQ(back.values, s.values);
  EXPECT_NEAR(back.objective, s.objective, 1e-12);
}

TEST(SolutionFile, Errors) {
  const auto p = sample();
  EXPECT_THROW(parse_solution_file("", p), LpFormatError);
  EXPECT_THROW(parse_solution_file("y_1_G1_1_ 1\n", p), LpFormatError);
  EXPECT_THROW(parse_solution_file("status Optimal\nnobody 1\n", p), LpFormatError);
  const auto names = lp_names(p);
  EXPECT_THROW(parse_solution_file("status Optimal\n" + names[0] + " 1\n", p), LpFormatError);
  EXPECT_THROW(parse_solution_file("status Optimal\n" + names[0] + " abc\n", p), LpFormatError);
  const auto none = parse_solution_file("status Infeasible\n", p);
  EXPECT_EQ(none.status, SolveStatus::Infeasible);
  EXPECT_FALSE(none.has_incumbent);
}

TEST(ExternalAdapter, SolvesThroughOwnCli) {
  const auto p = sample();
  ExternalSolverAdapter adapter(cli() + " solve --lp-file {lp} --solution-out {sol}");
  const auto ext = adapter.solve(p);
  const auto internal = solve_milp(p);
  ASSERT_TRUE(ext.has_incumbent);
  EXPECT_EQ(ext.status, SolveStatus::Optimal);
  EXPECT_NEAR(ext.objective, internal.objective, 1e-9);
}

TEST(ExternalAdapter, NonzeroExitCarriesOutput) {
  ExternalSolverAdapter adapter("echo solver exploded; exit 4");
  try {
    adapter.solve(sample());
    FAIL() << "expected AdapterError";
  } catch (const AdapterError& e) {
    EXPECT_NE(std::string(e.what()).find("exit code 4"), std::string::npos);
    EXPECT_NE(e.output().find("solver exploded"), std::string::npos);
  }
}

TEST(ExternalAdapter, MissingSolutionFile) {
  ExternalSolverAdapter adapter("true");
  EXPECT_THROW(adapter.solve(sample()), AdapterError);
}

TEST(ExternalAdapter, GarbageSolutionFile) {
  ExternalSolverAdapter adapter("echo nonsense > {sol}");
  EXPECT_THROW(adapter.solve(sample()), AdapterError);
}

TEST(ExternalAdapter, InfeasibleValuesRejected) {
  const auto p = sample();
  std::string body = "status Optimal";
  for (const auto& n : lp_names(p)) body += "\\n" + n + " 100";
  ExternalSolverAdapter adapter("printf '" + body + "\\n' > {sol}");
  EXPECT_THROW(adapter.solve(p), AdapterError);
}

TEST(ExternalAdapter, EmptyTemplate) {
  ExternalSolverAdapter adapter("");
  EXPECT_THROW(adapter.solve(sample()), AdapterError);
}

namespace {

MilpProblem binary_below_1_5() {
  MilpProblem p;
  p.add_variable("x", 0, 1, -1, VarType::Binary);
  p.add_constraint("c", {{0, 1}}, Sense::LessEqual, 1.5);
  return p;
}

MilpProblem table_one_single_period() {
  UcInstance inst;
  inst.generators = reference_generators();
  inst.dt = 1.0;
  inst.voll = 3e5;
  inst.demand = {25};
  inst.wind = {{0}};
  inst.initial_commitment = {true, true, true};
  inst.initial_output = {3, 2, 0};
  return build_milp(inst).problem;
}

MilpProblem short_supply() {
  MilpProblem p;
  p.add_variable("p", 0, 3, 1);
  p.add_variable("lcur", 0, 0, 1);
  p.add_constraint("bal", {{0, 1}, {1, 1}}, Sense::Equal, 5);
  return p;
}

}  // namespace

TEST(ExternalAdapter, MatchesInternalSolverOnReferenceProblems) {
  ExternalSolverAdapter adapter(cli() + " solve --lp-file {lp} --solution-out {sol}");
  for (const auto& p : {binary_below_1_5(), table_one_single_period(), short_supply()}) {
    const auto internal = solve_milp(p);
    const auto ext = adapter.solve(p);
    EXPECT_EQ(ext.status, internal.status);
    if (internal.has_incumbent)
      EXPECT_LE(std::abs(ext.objective - internal.objective), 1e-6 * std::max(1.0, std::abs(internal.objective)));
  }
}

TEST(ExternalAdapter, EmptyProblemIsOptimalAtZero) {
  ExternalSolverAdapter adapter(cli() + " solve --lp-file {lp} --solution-out {sol}");
  const auto s = adapter.solve(MilpProblem{});
  EXPECT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_EQ(s.objective, 0.0);
}

TEST(ExternalAdapter, UnboundedIsReported) {
  MilpProblem p;
  p.add_variable("x", 0, kInf, -1);
  ExternalSolverAdapter adapter(cli() + " solve --lp-file {lp} --solution-out {sol}");
  EXPECT_EQ(adapter.solve(p).status, SolveStatus::Unbounded);
}

TEST(ExternalAdapter, MissingExecutable) {
  ExternalSolverAdapter adapter("/nonexistent/solver {lp} {sol}");
  EXPECT_THROW(adapter.solve(sample()), AdapterError);
}
