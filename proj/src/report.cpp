#include "windcommit/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "windcommit/config.hpp"

namespace windcommit {

namespace {

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string two_decimals(double v) {
  double r = std::round(v * 100.0) / 100.0;
  if (r == 0.0) r = 0.0;  // drop the sign of -0
  return shortest(r);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string render_table_row(double cost_usd, double load_gwh, double wind_gwh) {
  return two_decimals(to_musd(cost_usd)) + ", " + two_decimals(load_gwh) + ", " + two_decimals(wind_gwh);
}

nlohmann::json report_to_json(const SimulationReport& report) {
  using nlohmann::json;
  json records = json::array();
  for (const auto& r : report.records)
    records.push_back({{"step", r.step},
                       {"commitment", r.commitment},
                       {"output_gw", r.output},
                       {"wind_gw", r.wind},
                       {"demand_gw", r.demand},
                       {"load_curtail_gw", r.load_curtail},
                       {"wind_curtail_gw", r.wind_curtail},
                       {"startup_cost_usd", r.startup_cost},
                       {"generation_cost_usd", r.generation_cost},
                       {"curtail_cost_usd", r.curtail_cost},
                       {"cost_usd", r.cost},
                       {"planned_objective_usd", r.planned_objective},
                       {"probabilities", r.probabilities},
                       {"provenance", to_string(r.provenance)},
                       {"exchanges", r.exchanges},
                       {"nodes", r.nodes}});
  return {{"mode", to_string(report.mode)},
          {"trial_id", report.trial_id},
          {"seed", report.seed},
          {"totals",
           {{"cost_musd", to_musd(report.total_cost)},
            {"load_curtailment_gwh", report.load_curtail_energy},
            {"wind_curtailment_gwh", report.wind_curtail_energy}}},
          {"records", records}};
}

nlohmann::json comparison_to_json(const ComparisonSummary& c) {
  auto metric = [](const MetricSummary& m, double scale) {
    return nlohmann::json{{"mean", m.mean * scale}, {"std", m.std * scale}, {"min", m.min * scale},
                          {"max", m.max * scale},   {"cv", m.cv}};
  };
  std::vector<double> costs;
  for (double v : c.trial_costs) costs.push_back(to_musd(v));
  return {{"trials", c.trials},
          {"baseline_cost_musd", to_musd(c.baseline_cost)},
          {"trial_costs_musd", costs},
          {"cost_musd", metric(c.cost, 1e-6)},
          {"load_curtailment_gwh", metric(c.load_curtail, 1.0)},
          {"wind_curtailment_gwh", metric(c.wind_curtail, 1.0)},
          {"success_rate", c.success_rate}};
}

RunArtifacts write_report(const SimulationReport& baseline, const std::vector<SimulationReport>& trials,
                          const SimulationConfig& cfg, const std::filesystem::path& out_dir,
                          const std::filesystem::path& audit_log) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  RunArtifacts art;
  art.report = out_dir / "report.json";
  art.table = out_dir / "table.csv";
  art.step_costs = out_dir / "step_costs.csv";
  art.timing = out_dir / "timing.csv";
  art.audit_log = audit_log;

  nlohmann::json doc;
  doc["config"] = config_to_json(cfg);
  doc["baseline"] = report_to_json(baseline);
  std::string table = "method, total_cost_musd, load_curtailment_gwh, wind_curtailment_gwh\n";
  table += to_string(baseline.mode) + ", " +
           render_table_row(baseline.total_cost, baseline.load_curtail_energy, baseline.wind_curtail_energy) + "\n";
  std::string steps;
  std::string timing = "trial,step,solve_seconds,nodes\n";
  auto add_timing = [&](const SimulationReport& r) {
    for (const auto& rec : r.records)
      timing += std::to_string(r.trial_id) + "," + std::to_string(rec.step) + "," +
                shortest(rec.solve_seconds) + "," + std::to_string(rec.nodes) + "\n";
  };
  add_timing(baseline);

  if (trials.empty()) {
    steps = "step,cost_musd,load_curtail_gw,wind_curtail_gw\n";
    for (const auto& r : baseline.records)
      steps += std::to_string(r.step) + "," + shortest(to_musd(r.cost)) + "," + shortest(r.load_curtail) +
               "," + shortest(r.wind_curtail) + "\n";
  } else {
    const ComparisonSummary c = compare_trials(baseline, trials);
    doc["trials"] = nlohmann::json::array();
    for (const auto& t : trials) {
      doc["trials"].push_back(report_to_json(t));
      add_timing(t);
    }
    doc["comparison"] = comparison_to_json(c);
    table += "llm_mean, " + render_table_row(c.cost.mean, c.load_curtail.mean, c.wind_curtail.mean) + "\n";
    table += "llm_std, " + render_table_row(c.cost.std, c.load_curtail.std, c.wind_curtail.std) + "\n";
    table += "llm_min, " + render_table_row(c.cost.min, c.load_curtail.min, c.wind_curtail.min) + "\n";
    table += "llm_max, " + render_table_row(c.cost.max, c.load_curtail.max, c.wind_curtail.max) + "\n";

    steps = "step,min_musd,mean_musd,max_musd,baseline_musd\n";
    for (const auto& e : c.envelope)
      steps += std::to_string(e.step) + "," + shortest(to_musd(e.min)) + "," + shortest(to_musd(e.mean)) +
               "," + shortest(to_musd(e.max)) + "," + shortest(to_musd(e.baseline)) + "\n";

    art.trial_costs = out_dir / "trial_costs.csv";
    std::string tc = "trial,total_cost_musd,baseline_musd,below_baseline\n";
    for (const auto& t : trials)
      tc += std::to_string(t.trial_id) + "," + shortest(to_musd(t.total_cost)) + "," +
            shortest(to_musd(baseline.total_cost)) + "," + (t.total_cost < baseline.total_cost ? "1" : "0") + "\n";
    write_file(art.trial_costs, tc);
  }

  write_file(art.report, doc.dump(2) + "\n");
  write_file(art.table, table);
  write_file(art.step_costs, steps);
  write_file(art.timing, timing);
  return art;
}

}  // namespace windcommit
