#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "windcommit/config.hpp"
#include "windcommit/day_data.hpp"
#include "windcommit/error.hpp"
#include "windcommit/report.hpp"
#include "windcommit/simulator.hpp"

using namespace windcommit;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("windcommit_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Expects a ConfigError whose message contains the given field path.
void expect_config_error(const std::string& yaml, const std::string& field) {
  try {
    parse_config(yaml);
    FAIL() << "accepted: " << yaml;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
  }
}

SimulationReport hand_report(double cost, double load, double wind, std::size_t trial) {
  SimulationReport r;
  r.total_cost = cost;
  r.load_curtail_energy = load;
  r.wind_curtail_energy = wind;
  r.mode = trial == 0 ? SimMode::Baseline : SimMode::Llm;
  r.trial_id = trial;
  for (std::size_t t = 0; t < 3; ++t) {
    StepRecord s;
    s.step = t;
    s.cost = cost / 3.0;
    s.probabilities = {0.1, 0.2, 0.4, 0.2, 0.1};
    r.records.push_back(s);
  }
  return r;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

// ---- config

TEST(Config, EmptyDocumentKeepsDefaults) {
  const SimulationConfig cfg = parse_config("");
  const SimulationConfig def;
  EXPECT_EQ(cfg.dt, def.dt);
  EXPECT_EQ(cfg.total_steps, 48u);
  EXPECT_EQ(cfg.lookahead, 8u);
  EXPECT_EQ(cfg.trials, 10u);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_DOUBLE_EQ(cfg.ar.phi, 1.2);
  EXPECT_DOUBLE_EQ(cfg.ar.eps_c, 0.14);
  EXPECT_DOUBLE_EQ(cfg.voll, 300000.0);
  EXPECT_EQ(cfg.generators.size(), reference_generators().size());
}

TEST(Config, SectionsOverrideFields) {
  const SimulationConfig cfg = parse_config(R"(
simulation:
  lookahead: 4
  mode: llm
  seed: 9
scenario:
  phi: 1.1
  quantiles: [0.2, 0.5, 0.8]
  probability_rule: midpoint
system:
  voll: 150000
  ramp_mode: literal
agent:
  max_retries: 5
  floor: 0.02
solver:
  gap_tol: 0.001
  node_limit: 777
)");
  EXPECT_EQ(cfg.lookahead, 4u);
  EXPECT_EQ(cfg.mode, SimMode::Llm);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_DOUBLE_EQ(cfg.ar.phi, 1.1);
  EXPECT_EQ(cfg.quantiles.size(), 3u);
  EXPECT_EQ(cfg.probability_rule, ProbabilityRule::Midpoint);
  EXPECT_DOUBLE_EQ(cfg.voll, 150000.0);
  EXPECT_EQ(cfg.ramp_mode, RampMode::Literal);
  EXPECT_EQ(cfg.agent.max_retries, 5u);
  EXPECT_DOUBLE_EQ(cfg.agent.calibration.floor, 0.02);
  EXPECT_DOUBLE_EQ(cfg.solver.gap_tol, 0.001);
  EXPECT_EQ(cfg.solver.node_limit, 777u);
}

TEST(Config, GeneratorUnitsAreConvertedToDollars) {
  const SimulationConfig cfg = parse_config(R"(
generators:
  - {name: A, startup_cost: 4, p_max: 10, p_min: 3, gen_cost: 40, ramp_up: 6, ramp_down: 6}
)");
  ASSERT_EQ(cfg.generators.size(), 1u);
  EXPECT_EQ(cfg.generators[0].name, "A");
  EXPECT_DOUBLE_EQ(cfg.generators[0].startup_cost, 4e6);
  EXPECT_DOUBLE_EQ(cfg.generators[0].gen_cost, 4e4);
  EXPECT_DOUBLE_EQ(cfg.generators[0].p_max, 10.0);
}

TEST(Config, ZeroVollIsAccepted) {
  EXPECT_DOUBLE_EQ(parse_config("system:\n  voll: 0\n").voll, 0.0);
}

TEST(Config, ErrorsNameTheField) {
  expect_config_error("simulation:\n  lookahed: 3\n", "simulation.lookahed");
  expect_config_error("simulation:\n  lookahead: -1\n", "simulation.lookahead");
  expect_config_error("scenario:\n  phi: abc\n", "scenario.phi");
  expect_config_error("bogus: 1\n", "config.bogus");
  expect_config_error(
      "generators:\n  - {startup_cost: 1, p_max: -2, p_min: 0, gen_cost: 1, ramp_up: 1, ramp_down: 1}\n",
      "p_max");
  expect_config_error("generators:\n  - {startup_cost: 1, p_max: 2, p_min: 0, gen_cost: 1, ramp_up: 1}\n",
                      "ramp_down");
  expect_config_error("solver:\n  int_tol: 0.7\n", "solver.int_tol");
  expect_config_error("agent:\n  timeout: 0\n", "agent.timeout");
}

TEST(Config, MalformedYamlIsAConfigError) {
  EXPECT_THROW(parse_config("simulation: [1, 2\n"), ConfigError);
  EXPECT_THROW(parse_config("- just\n- a list\n"), ConfigError);
}

TEST(Config, MissingFileIsAnError) {
  EXPECT_THROW(load_config("/nonexistent/windcommit.yaml"), std::exception);
}

TEST(Config, EchoParsesBackToTheSameConfig) {
  SimulationConfig a = parse_config(R"(
simulation: {lookahead: 5, trials: 3, seed: 11}
scenario: {eps_c: 0.2, probabilities: [0.1, 0.2, 0.4, 0.2, 0.1]}
system: {voll: 123456, initial_commitment: [true, false, true]}
)");
  const nlohmann::json echo = config_to_json(a);
  const SimulationConfig b = parse_config(echo.dump());
  EXPECT_EQ(config_to_json(b), echo);
  EXPECT_EQ(b.lookahead, 5u);
  ASSERT_TRUE(b.probabilities.has_value());
  EXPECT_EQ(*b.probabilities, *a.probabilities);
  ASSERT_TRUE(b.initial_commitment.has_value());
  EXPECT_EQ(*b.initial_commitment, *a.initial_commitment);
}

TEST(Config, InstanceJsonRoundTrip) {
  SimulationConfig cfg;
  cfg.lookahead = 2;
  const Window w{{30.0, 31.0}, {8.0, 9.0}};
  const UcInstance inst = window_instance(initial_state(cfg), w, cfg.default_probabilities(), cfg);
  const nlohmann::json doc = instance_to_json(inst);
  const UcInstance back = instance_from_json(doc);
  EXPECT_EQ(instance_to_json(back), doc);
}

TEST(Config, InstanceJsonRejectsMissingFields) {
  EXPECT_THROW(instance_from_json(nlohmann::json::object()), std::exception);
}

// ---- day data

TEST(DayCsv, RoundTripIsExact) {
  DayData d;
  d.demand_actual = {20.125, 30.1, 1.0 / 3.0};
  d.demand_forecast = {20.0, 29.9, 0.1 + 0.2};
  d.wind_actual = {5.0, 0.0, 1e-7};
  d.wind_forecast = {4.5, 0.25, 19.999999999999996};
  const DayData back = parse_day_csv(render_day_csv(d));
  EXPECT_EQ(back.demand_actual, d.demand_actual);
  EXPECT_EQ(back.demand_forecast, d.demand_forecast);
  EXPECT_EQ(back.wind_actual, d.wind_actual);
  EXPECT_EQ(back.wind_forecast, d.wind_forecast);
}

TEST(DayCsv, FileRoundTrip) {
  const fs::path dir = scratch("csv");
  DayData d;
  d.demand_actual = {25.0, 26.0};
  d.demand_forecast = {25.5, 26.5};
  d.wind_actual = {3.0, 4.0};
  d.wind_forecast = {3.5, 4.5};
  write_day_csv(d, dir / "day.csv");
  const DayData back = load_day_csv(dir / "day.csv");
  EXPECT_EQ(back.wind_forecast, d.wind_forecast);
  EXPECT_EQ(slurp(dir / "day.csv").rfind(kDayCsvHeader, 0), 0u);
}

TEST(DayCsv, HeaderOnlyIsRejected) {
  EXPECT_THROW(parse_day_csv(std::string(kDayCsvHeader) + "\n"), IngestError);
  EXPECT_THROW(parse_day_csv(""), IngestError);
}

TEST(DayCsv, BadCellNamesRowAndColumn) {
  const std::string text = std::string(kDayCsvHeader) +
                           "\n0,20,20,1,1\n1,21,21,2,2\n2,22,abc,3,3\n";
  try {
    parse_day_csv(text);
    FAIL();
  } catch (const IngestError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("row 3"), std::string::npos) << m;
    EXPECT_NE(m.find("demand_forecast"), std::string::npos) << m;
    EXPECT_NE(m.find("abc"), std::string::npos) << m;
  }
}

TEST(DayCsv, NegativeAndRaggedRowsAreRejected) {
  const std::string h = std::string(kDayCsvHeader) + "\n";
  EXPECT_THROW(parse_day_csv(h + "0,20,20,-1,1\n"), IngestError);
  EXPECT_THROW(parse_day_csv(h + "0,20,20,1\n"), IngestError);
  EXPECT_THROW(parse_day_csv("step,demand_actual\n0,1\n"), IngestError);
  EXPECT_THROW(load_day_csv("/nonexistent/day.csv"), IngestError);
}

TEST(DayCsv, ClampWindWarnsPerCell) {
  DayData d;
  d.demand_actual = {20, 20};
  d.demand_forecast = {20, 20};
  d.wind_actual = {25, 5};
  d.wind_forecast = {21, 22};
  const auto warnings = clamp_wind(d, 20.0);
  EXPECT_EQ(warnings.size(), 3u);
  EXPECT_EQ(d.wind_actual, (std::vector<double>{20, 5}));
  EXPECT_EQ(d.wind_forecast, (std::vector<double>{20, 20}));
}

TEST(SyntheticDay, StaysWithinBounds) {
  for (std::uint64_t seed : {1u, 7u, 42u, 1234u}) {
    SimulationConfig cfg;
    const DayData d = generate_synthetic_day(seed, cfg);
    ASSERT_EQ(d.size(), cfg.total_steps);
    EXPECT_NO_THROW(d.validate());
    for (std::size_t t = 0; t < d.size(); ++t) {
      EXPECT_GE(d.demand_actual[t], 18.0);
      EXPECT_LE(d.demand_actual[t], 38.0);
      EXPECT_GE(d.demand_forecast[t], 18.0);
      EXPECT_LE(d.demand_forecast[t], 38.0);
      EXPECT_GE(d.wind_forecast[t], 0.0);
      EXPECT_LE(d.wind_forecast[t], cfg.wind_cap);
      EXPECT_GE(d.wind_actual[t], 0.0);
      EXPECT_LE(d.wind_actual[t], cfg.wind_cap);
    }
  }
}

TEST(SyntheticDay, SameSeedSameDay) {
  SimulationConfig cfg;
  EXPECT_EQ(render_day_csv(generate_synthetic_day(7, cfg)), render_day_csv(generate_synthetic_day(7, cfg)));
  EXPECT_NE(render_day_csv(generate_synthetic_day(7, cfg)), render_day_csv(generate_synthetic_day(8, cfg)));
}

TEST(SyntheticDay, NoErrorScaleMeansWindMatchesForecast) {
  SimulationConfig cfg;
  cfg.ar.eps_c = 0.0;
  const DayData d = generate_synthetic_day(3, cfg);
  EXPECT_EQ(d.wind_actual, d.wind_forecast);
}

// ---- report

TEST(Report, TableRowExample) {
  EXPECT_EQ(render_table_row(187.68e6, 3.04, 0.0), "187.68, 3.04, 0");
  EXPECT_EQ(render_table_row(31.5e6, 0.5, 1.25), "31.5, 0.5, 1.25");
  EXPECT_EQ(render_table_row(1e6 / 3.0, 2.0 / 3.0, 10.0), "0.33, 0.67, 10");
}

TEST(Report, UnitHelpers) {
  EXPECT_DOUBLE_EQ(to_musd(2.5e6), 2.5);
  EXPECT_DOUBLE_EQ(energy_gwh(3.0, 0.5), 1.5);
}

TEST(Report, BaselineOnlyWritesNoTrialFiles) {
  const fs::path dir = scratch("baseline");
  const SimulationReport b = hand_report(31.86e6, 0.0, 1.5, 0);
  const RunArtifacts art = write_report(b, {}, SimulationConfig{}, dir);
  EXPECT_TRUE(art.trial_costs.empty());
  EXPECT_TRUE(fs::exists(art.report));
  EXPECT_TRUE(fs::exists(art.table));
  EXPECT_TRUE(fs::exists(art.step_costs));
  EXPECT_TRUE(fs::exists(art.timing));
  EXPECT_FALSE(fs::exists(dir / "trial_costs.csv"));
  const std::string table = slurp(art.table);
  EXPECT_EQ(count_lines(table), 2u);
  EXPECT_NE(table.find("baseline, 31.86, 0, 1.5"), std::string::npos) << table;
  const auto doc = nlohmann::json::parse(slurp(art.report));
  EXPECT_FALSE(doc.contains("trials"));
  EXPECT_EQ(doc["baseline"]["records"].size(), 3u);
  EXPECT_TRUE(doc.contains("config"));
  EXPECT_EQ(count_lines(slurp(art.step_costs)), 4u);
}

TEST(Report, TenTrialsTable) {
  const fs::path dir = scratch("trials");
  const SimulationReport b = hand_report(30e6, 0.0, 2.0, 0);
  std::vector<SimulationReport> trials;
  for (std::size_t i = 1; i <= 10; ++i) trials.push_back(hand_report((25.0 + i) * 1e6, 0.1 * i, 1.0, i));
  const RunArtifacts art = write_report(b, trials, SimulationConfig{}, dir);
  const std::string table = slurp(art.table);
  EXPECT_EQ(count_lines(table), 6u);
  // Costs 26..35 M$: mean 30.5, min 26, max 35.
  EXPECT_NE(table.find("llm_mean, 30.5, 0.55, 1"), std::string::npos) << table;
  EXPECT_NE(table.find("llm_min, 26, 0.1, 1"), std::string::npos) << table;
  EXPECT_NE(table.find("llm_max, 35, 1, 1"), std::string::npos) << table;
  EXPECT_EQ(count_lines(slurp(art.trial_costs)), 11u);
  const auto doc = nlohmann::json::parse(slurp(art.report));
  EXPECT_EQ(doc["trials"].size(), 10u);
  EXPECT_TRUE(doc.contains("comparison"));
}

TEST(Report, ReportBytesIgnoreWallTimes) {
  SimulationReport a = hand_report(30e6, 0.0, 2.0, 0);
  SimulationReport b = a;
  for (auto& r : b.records) r.solve_seconds = 123.0;
  const fs::path d1 = scratch("bytes1"), d2 = scratch("bytes2");
  const auto x = write_report(a, {}, SimulationConfig{}, d1);
  const auto y = write_report(b, {}, SimulationConfig{}, d2);
  EXPECT_EQ(slurp(x.report), slurp(y.report));
  EXPECT_NE(slurp(x.timing), slurp(y.timing));
}
