#include "windcommit/day_data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "windcommit/error.hpp"
#include "windcommit/simulator.hpp"

namespace windcommit {

namespace {

constexpr std::array<const char*, 5> kColumns = {"step", "demand_actual", "demand_forecast",
                                                 "wind_actual", "wind_forecast"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

void DayData::validate() const {
  const std::size_t n = demand_actual.size();
  if (n == 0) throw IngestError("day data has no rows");
  if (demand_forecast.size() != n || wind_actual.size() != n || wind_forecast.size() != n)
    throw IngestError("day series differ in length");
  const std::array<const std::vector<double>*, 4> cols = {&demand_actual, &demand_forecast,
                                                          &wind_actual, &wind_forecast};
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t i = 0; i < n; ++i) {
      const double v = (*cols[c])[i];
      if (!std::isfinite(v) || v < 0.0)
        throw IngestError("row " + std::to_string(i + 1) + ", column " + kColumns[c + 1] +
                          ": value must be a finite number >= 0");
    }
}

DayData parse_day_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw IngestError("empty file: expected header '" + std::string(kDayCsvHeader) + "'");
  std::array<std::size_t, 5> index{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) throw IngestError(std::string("missing column '") + kColumns[c] + "'");
    index[c] = static_cast<std::size_t>(it - header.begin());
  }

  DayData day;
  std::array<std::vector<double>*, 4> cols = {&day.demand_actual, &day.demand_forecast,
                                              &day.wind_actual, &day.wind_forecast};
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split(line);
    const std::string where = "row " + std::to_string(row) + " (line " + std::to_string(line_no) + ")";
    if (cells.size() != header.size())
      throw IngestError(where + ": expected " + std::to_string(header.size()) + " cells, found " +
                        std::to_string(cells.size()));
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      const std::string& cell = cells[index[c]];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw IngestError(where + ", column " + kColumns[c] + ": '" + cell + "' is not a number");
      if (c == 0) continue;
      if (v < 0.0)
        throw IngestError(where + ", column " + kColumns[c] + ": negative value " + cell);
      cols[c - 1]->push_back(v);
    }
  }
  if (row == 0) throw IngestError("no data rows after the header");
  return day;
}

DayData load_day_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open day data " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_day_csv(ss.str());
}

std::string render_day_csv(const DayData& day) {
  day.validate();
  std::string out = std::string(kDayCsvHeader) + "\n";
  for (std::size_t i = 0; i < day.size(); ++i)
    out += std::to_string(i) + "," + shortest(day.demand_actual[i]) + "," +
           shortest(day.demand_forecast[i]) + "," + shortest(day.wind_actual[i]) + "," +
           shortest(day.wind_forecast[i]) + "\n";
  return out;
}

void write_day_csv(const DayData& day, const std::filesystem::path& path) {
  const std::string text = render_day_csv(day);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<std::string> clamp_wind(DayData& day, double wind_cap) {
  std::vector<std::string> warnings;
  auto fix = [&](std::vector<double>& col, const char* name) {
    for (std::size_t i = 0; i < col.size(); ++i)
      if (col[i] > wind_cap) {
        warnings.push_back("row " + std::to_string(i + 1) + ", column " + name + ": " +
                           shortest(col[i]) + " GW exceeds the wind cap " + shortest(wind_cap) +
                           " GW, clamped");
        col[i] = wind_cap;
      }
  };
  fix(day.wind_actual, "wind_actual");
  fix(day.wind_forecast, "wind_forecast");
  return warnings;
}

namespace {

// Portable draws: mt19937_64 output is fixed by the standard, the
// distribution classes are not.
struct Rng {
  std::mt19937_64 engine;
  double uniform() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
};

}  // namespace

DayData generate_synthetic_day(std::uint64_t seed, const SimulationConfig& cfg) {
  const std::size_t n = cfg.total_steps;
  const double cap = cfg.wind_cap;
  const double two_pi = 2.0 * std::numbers::pi;
  Rng rng{std::mt19937_64(seed)};
  const double a = two_pi * rng.uniform();
  const double b = two_pi * rng.uniform();
  const double c = two_pi * rng.uniform();

  // The error process must stay bounded over the day, so persistence above
  // one is folded back to its reciprocal.
  const double rho = cfg.ar.phi < 1.0 ? cfg.ar.phi : 1.0 / cfg.ar.phi;
  const double innovation = cfg.ar.eps_c * std::sqrt(1.0 - rho * rho);

  DayData day;
  double e = cfg.ar.eps_c * rng.normal();
  for (std::size_t t = 0; t < n; ++t) {
    const double h = cfg.dt * static_cast<double>(t);
    const double demand = 28.0 - 10.0 * std::cos(two_pi * (h - 4.0) / 24.0);
    const double d_actual = std::clamp(demand * (1.0 + 0.01 * rng.normal()), 18.0, 38.0);
    const double shape = 0.45 + 0.25 * std::sin(two_pi * h / 24.0 + a) +
                         0.12 * std::sin(two_pi * h / 8.0 + b) + 0.05 * std::sin(two_pi * h / 3.0 + c);
    const double forecast = std::clamp(cap * shape, 0.0, cap);
    if (t > 0) e = rho * e + innovation * rng.normal();
    day.demand_forecast.push_back(std::clamp(demand, 18.0, 38.0));
    day.demand_actual.push_back(d_actual);
    day.wind_forecast.push_back(forecast);
    day.wind_actual.push_back(std::clamp(forecast * (1.0 + e), 0.0, cap));
  }
  return day;
}

}  // namespace windcommit
