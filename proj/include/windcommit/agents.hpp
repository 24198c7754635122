#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "windcommit/chat_backend.hpp"
#include "windcommit/scenario_tree.hpp"

namespace windcommit {

// Forecast-error sample statistics; sigma uses the N-1 denominator and is
// 0 for a single observation.
struct ErrorStats {
  std::vector<double> errors;  // actual - forecast, GW
  double mu = 0.0;
  double sigma = 0.0;
  std::size_t count = 0;
};

ErrorStats compute_error_stats(std::span<const double> actual, std::span<const double> forecast);

struct HistoryPoint {
  double actual;
  double forecast;
};

// Phrase Agent 1 is asked to emit and Agent 2 searches for.
inline constexpr const char* kTriggerPhrase = "the prob_new finally selected";

std::string build_agent1_prompt(const ErrorStats& stats, const QuantileSet& quantiles,
                                const ProbabilityVector& default_probs,
                                const std::vector<HistoryPoint>& history);

std::string build_agent2_prompt(const std::string& agent1_reply);

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Finds the trigger phrase (case-insensitive) and parses the numeric list
// that follows it: comma/space separated, optionally in brackets, optionally
// inside the { 'prob_new': [...] } shape.
std::vector<double> extract_prob_new(const std::string& reply, std::size_t expected_count);

// Parses Agent 2's { 'prob_new': [p1, ...] } answer (single or double quotes).
std::vector<double> parse_agent2_output(const std::string& reply, std::size_t expected_count);

enum class RejectReason { Length, NonFinite, Negative, SumDrift };

std::string to_string(RejectReason r);

class ValidationError : public std::runtime_error {
 public:
  ValidationError(RejectReason reason, const std::string& what)
      : std::runtime_error(what), reason_(reason) {}
  RejectReason reason() const { return reason_; }

 private:
  RejectReason reason_;
};

// Rejects wrong length, negative or non-finite entries, or |sum - 1| > sum_tol;
// otherwise divides by the sum (when it is not already 1) and returns.
ProbabilityVector validate_probability_vector(const std::vector<double>& raw,
                                              std::size_t expected_len, double sum_tol = 1e-3);

struct CalibrationParams {
  double floor = 0.01;
  double shrink = 0.5;  // weight of the empirical frequencies
};

// Offline stand-in for the language model: empirical frequencies of the
// standardized errors over the midpoint-rule bins, blended with the defaults,
// floored and renormalized.
ProbabilityVector deterministic_calibration(const ErrorStats& stats, const QuantileSet& quantiles,
                                            const ProbabilityVector& default_probs,
                                            const CalibrationParams& params = {});

enum class Provenance { Llm, Fallback, Default };

std::string to_string(Provenance p);

struct AuditRecord {
  std::string session;
  std::size_t exchange;
  std::string direction;
  std::string payload;
  std::string timestamp;
};

// Append-only exchange log. Records are kept in memory and, when a file is
// attached, appended to it as one JSON object per line.
class AuditLog {
 public:
  AuditLog() = default;
  explicit AuditLog(const std::filesystem::path& path);

  void append(const std::string& session, std::size_t exchange, const std::string& direction,
              const std::string& payload);
  const std::vector<AuditRecord>& records() const { return records_; }
  std::size_t exchanges(const std::string& session) const;

 private:
  std::vector<AuditRecord> records_;
  std::optional<std::ofstream> file_;
};

struct RefinementContext {
  ErrorStats stats;
  std::vector<HistoryPoint> history;
  QuantileSet quantiles = QuantileSet::canonical();
  ProbabilityVector defaults = ProbabilityVector::published_default();
  CalibrationParams calibration;
};

struct RefinementResult {
  ProbabilityVector probabilities;
  Provenance provenance;
  std::size_t exchanges;
};

// Agent 1 (revise the probabilities) then Agent 2 (extract the vector),
// validated. Up to max_retries further attempts on failure, then the
// deterministic calibration tagged Fallback.
RefinementResult refine_probabilities(ChatBackend& backend, const RefinementContext& context,
                                      std::size_t max_retries, AuditLog* audit = nullptr,
                                      const std::string& session = "");

}  // namespace windcommit
