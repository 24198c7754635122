#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace windcommit {

struct SimulationConfig;

// One day of per-step series, all in GW.
struct DayData {
  std::vector<double> demand_actual;
  std::vector<double> demand_forecast;
  std::vector<double> wind_actual;
  std::vector<double> wind_forecast;

  std::size_t size() const { return demand_actual.size(); }
  // Throws IngestError on unequal/empty series or negative values.
  void validate() const;
};

inline constexpr const char* kDayCsvHeader =
    "step,demand_actual,demand_forecast,wind_actual,wind_forecast";

DayData parse_day_csv(const std::string& text);
DayData load_day_csv(const std::filesystem::path& path);

// Values are written with the shortest representation that round-trips.
std::string render_day_csv(const DayData& day);
void write_day_csv(const DayData& day, const std::filesystem::path& path);

// Clamps wind entries above the cap; returns one warning per clamped cell.
std::vector<std::string> clamp_wind(DayData& day, double wind_cap);

// Demand is a daily sinusoid spanning [18, 38] GW. The wind forecast is a
// seeded smooth series in [0, wind_cap]; actual wind adds AR(1) noise scaled
// by eps_c of the forecast and is clamped to [0, wind_cap].
DayData generate_synthetic_day(std::uint64_t seed, const SimulationConfig& cfg);

}  // namespace windcommit
