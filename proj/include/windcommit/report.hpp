#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "windcommit/simulator.hpp"

namespace windcommit {

inline double to_musd(double usd) { return usd / 1e6; }
inline double energy_gwh(double gw, double hours) { return gw * hours; }

// Cost in $ and energies in GWh rendered as "M$, GWh, GWh" with at most two
// decimals and no trailing zeros: "187.68, 3.04, 0".
std::string render_table_row(double cost_usd, double load_gwh, double wind_gwh);

nlohmann::json report_to_json(const SimulationReport& report);
nlohmann::json comparison_to_json(const ComparisonSummary& summary);

struct RunArtifacts {
  std::filesystem::path report;       // report.json
  std::filesystem::path table;        // table.csv
  std::filesystem::path step_costs;   // per-step costs or the trial envelope
  std::filesystem::path trial_costs;  // empty without trials
  std::filesystem::path timing;       // wall-clock solve times, kept out of the report
  std::filesystem::path audit_log;    // empty unless an audit log was written
};

// With no trials only the baseline is reported. Report files carry no wall
// times, so identical runs produce identical bytes.
RunArtifacts write_report(const SimulationReport& baseline, const std::vector<SimulationReport>& trials,
                          const SimulationConfig& cfg, const std::filesystem::path& out_dir,
                          const std::filesystem::path& audit_log = {});

}  // namespace windcommit
