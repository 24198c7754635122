#include "windcommit/agents.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "windcommit/error.hpp"

namespace windcommit {

ErrorStats compute_error_stats(std::span<const double> actual, std::span<const double> forecast) {
  if (actual.size() != forecast.size())
    throw DomainError("actual and forecast series differ in length");
  if (actual.empty()) throw DomainError("error statistics need at least one observation");
  ErrorStats s;
  s.count = actual.size();
  s.errors.resize(s.count);
  for (std::size_t i = 0; i < s.count; ++i) s.errors[i] = actual[i] - forecast[i];
  s.mu = std::accumulate(s.errors.begin(), s.errors.end(), 0.0) / static_cast<double>(s.count);
  if (s.count >= 2) {
    double ss = 0.0;
    for (double e : s.errors) ss += (e - s.mu) * (e - s.mu);
    s.sigma = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  return s;
}

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i], "%.10g");
  }
  return out + "]";
}

std::string lowercase_without_escapes(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '\\') continue;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool starts_number(const std::string& s, std::size_t i) {
  auto digit = [&](std::size_t k) {
    return k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]));
  };
  if (digit(i)) return true;
  if (i < s.size() && s[i] == '.' && digit(i + 1)) return true;
  if (i < s.size() && (s[i] == '-' || s[i] == '+'))
    return digit(i + 1) || (i + 2 < s.size() && s[i + 1] == '.' && digit(i + 2));
  return false;
}

double parse_number(const std::string& s, std::size_t& i) {
  const char* begin = s.c_str() + i;
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin) throw ExtractionError("unparseable number near '" + s.substr(i, 12) + "'");
  i += static_cast<std::size_t>(end - begin);
  return v;
}

std::vector<double> parse_bracket_list(const std::string& s, std::size_t open) {
  const std::size_t close = s.find(']', open);
  if (close == std::string::npos) throw ExtractionError("unterminated probability list");
  const std::string body = s.substr(open + 1, close - open - 1);
  std::vector<double> out;
  std::size_t i = 0;
  while (i < body.size()) {
    const char c = body[i];
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (!starts_number(body, i)) throw ExtractionError("unparseable entry in probability list");
    out.push_back(parse_number(body, i));
    if (i < body.size() && body[i] != ',' && !std::isspace(static_cast<unsigned char>(body[i])))
      throw ExtractionError("unparseable entry in probability list");
  }
  return out;
}

std::vector<double> parse_after(const std::string& s, std::size_t pos) {
  std::size_t i = pos;
  while (i < s.size() && s[i] != '[' && !starts_number(s, i)) ++i;
  if (i >= s.size()) throw ExtractionError("no probability values follow the trigger phrase");
  if (s[i] == '[') return parse_bracket_list(s, i);
  std::vector<double> out;
  while (true) {
    out.push_back(parse_number(s, i));
    std::size_t j = i;
    while (j < s.size() && (s[j] == ',' || s[j] == ';' || std::isspace(static_cast<unsigned char>(s[j])))) ++j;
    if (j < s.size() && starts_number(s, j)) {
      i = j;
      continue;
    }
    break;
  }
  return out;
}

void check_count(const std::vector<double>& v, std::size_t expected) {
  if (v.size() != expected)
    throw ExtractionError("expected " + std::to_string(expected) + " probabilities, found " +
                          std::to_string(v.size()));
}

}  // namespace

std::string build_agent1_prompt(const ErrorStats& stats, const QuantileSet& quantiles,
                                const ProbabilityVector& default_probs,
                                const std::vector<HistoryPoint>& history) {
  std::ostringstream p;
  const std::size_t n = quantiles.size();
  p << "Task: revise the branch probabilities of a wind power scenario tree built from an AR(1) "
       "forecast-error process.\n\n";
  p << "The wind forecast error (actual value - forecasted value) is modelled as normally "
       "distributed. The tree has "
    << n << " branches placed at the fixed quantiles " << list(quantiles.levels())
    << ", each representing a possible deviation of actual wind power from the forecast. "
       "The code currently assigns the probability vector "
    << default_probs.render() << " to these branches.\n\n";
  p << "Revise these probabilities using the historical forecast error data below. The new "
       "probability vector prob_new must still sum to 1, but it may be shifted to reflect "
       "observed biases (for example, actual wind power exceeding or falling short of the "
       "forecast more often than a symmetric distribution implies).\n\n";
  p << "Your output must include:\n";
  p << "- A new probability vector prob_new for the same " << n
    << " quantiles that is non-negative and sums to 1.\n";
  p << "- A justification of how the new distribution was derived (statistical calibration or "
       "heuristic adjustment).\n";
  p << "- An explanation of why the revised probabilities may give more realistic or robust "
       "outcomes for wind power planning than the original symmetric distribution.\n\n";
  p << "Worked procedure:\n";
  p << "a) Compute the errors: for each pair of actual and forecasted values, "
       "e(t) = Actual(t) - Forecasted(t).\n";
  p << "b) Derive the mean and standard deviation of the errors: mu = sum(e(t)) / N, "
       "sigma = sqrt(sum((e(t) - mu)^2) / (N - 1)).\n";
  p << "c) Compare the observed error distribution with the quantile branches and decide how "
       "much probability each branch deserves.\n\n";
  p << "Historical data (GW):\n";
  if (history.empty()) {
    p << "no data available yet\n";
  } else {
    p << "t, actual, forecast, error\n";
    for (std::size_t t = 0; t < history.size(); ++t)
      p << t + 1 << ", " << fmt(history[t].actual) << ", " << fmt(history[t].forecast) << ", "
        << fmt(history[t].actual - history[t].forecast) << "\n";
  }
  p << "\nComputed error statistics:\n";
  p << "N = " << stats.count << "\n";
  p << "mu = " << fmt(stats.mu) << "\n";
  p << "sigma = " << fmt(stats.sigma) << "\n\n";
  p << "Finish your answer with one line of the form \"" << kTriggerPhrase << ": p1, p2, ..., p"
    << n << "\".\n";
  return p.str();
}

std::string build_agent2_prompt(const std::string& agent1_reply) {
  std::ostringstream p;
  p << "Extract '" << kTriggerPhrase << "' from the text below. Search for that exact phrase "
       "to locate the probability values. Answer strictly in this JSON format: "
       "{ 'prob_new': [p1, p2, p3, p4, p5] }.\n\n";
  p << "Example input: 'The calculation resulted in " << kTriggerPhrase
    << ": 0.05, 0.25, 0.4, 0.25, 0.05.'\n";
  p << "Example output: { 'prob_new': [0.05, 0.25, 0.4, 0.25, 0.05] }\n\n";
  p << "Return only the extracted values in that format.\n\n";
  p << "Text:\n" << agent1_reply << "\n";
  return p.str();
}

std::vector<double> extract_prob_new(const std::string& reply, std::size_t expected_count) {
  const std::string s = lowercase_without_escapes(reply);
  const std::string phrase = kTriggerPhrase;
  std::vector<std::size_t> hits;
  for (std::size_t p = s.find(phrase); p != std::string::npos; p = s.find(phrase, p + 1))
    hits.push_back(p);
  if (hits.empty()) throw ExtractionError("trigger phrase not found");
  std::string last_error;
  for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
    try {
      auto v = parse_after(s, *it + phrase.size());
      check_count(v, expected_count);
      return v;
    } catch (const ExtractionError& e) {
      last_error = e.what();
    }
  }
  throw ExtractionError(last_error);
}

std::vector<double> parse_agent2_output(const std::string& reply, std::size_t expected_count) {
  static const std::regex key(R"(prob_new['"]?\s*:\s*\[)");
  const std::string s = lowercase_without_escapes(reply);
  std::smatch m;
  if (!std::regex_search(s, m, key)) throw ExtractionError("no prob_new list in reply");
  const std::size_t open = static_cast<std::size_t>(m.position(0) + m.length(0) - 1);
  auto v = parse_bracket_list(s, open);
  check_count(v, expected_count);
  return v;
}

std::string to_string(RejectReason r) {
  switch (r) {
    case RejectReason::Length: return "length";
    case RejectReason::NonFinite: return "non-finite";
    case RejectReason::Negative: return "negativity";
    case RejectReason::SumDrift: return "sum drift";
  }
  return "unknown";
}

ProbabilityVector validate_probability_vector(const std::vector<double>& raw,
                                              std::size_t expected_len, double sum_tol) {
  if (raw.size() != expected_len)
    throw ValidationError(RejectReason::Length, "expected " + std::to_string(expected_len) +
                                                    " entries, got " + std::to_string(raw.size()));
  double sum = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v)) throw ValidationError(RejectReason::NonFinite, "non-finite probability");
    if (v < 0.0) throw ValidationError(RejectReason::Negative, "negative probability " + fmt(v));
    sum += v;
  }
  if (!(std::abs(sum - 1.0) <= sum_tol))
    throw ValidationError(RejectReason::SumDrift, "probabilities sum to " + fmt(sum, "%.10g"));
  std::vector<double> p = raw;
  if (std::abs(sum - 1.0) > 1e-12)
    for (double& v : p) v /= sum;
  return ProbabilityVector(std::move(p));
}

ProbabilityVector deterministic_calibration(const ErrorStats& stats, const QuantileSet& quantiles,
                                            const ProbabilityVector& default_probs,
                                            const CalibrationParams& params) {
  const std::size_t n = quantiles.size();
  if (default_probs.size() != n) throw DomainError("default probabilities do not match quantiles");
  if (!(params.shrink >= 0.0 && params.shrink <= 1.0)) throw DomainError("shrink must lie in [0,1]");
  if (!(params.floor >= 0.0)) throw DomainError("floor must be >= 0");

  // Standardized-error bin edges: normal quantiles of the midpoint boundaries.
  std::vector<double> edges;
  for (std::size_t i = 0; i + 1 < n; ++i)
    edges.push_back(inverse_normal_cdf((quantiles[i] + quantiles[i + 1]) / 2));

  std::vector<double> empirical(n, 0.0);
  if (!stats.errors.empty()) {
    const double sigma = stats.sigma > 0.0 ? stats.sigma : 1e-9;
    for (double e : stats.errors) {
      const double z = (e - stats.mu) / sigma;
      const auto bin = static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), z) - edges.begin());
      empirical[bin] += 1.0;
    }
    for (double& v : empirical) v /= static_cast<double>(stats.errors.size());
  } else {
    empirical = default_probs.values();
  }

  std::vector<double> p(n);
  bool floored = false;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = params.shrink * empirical[i] + (1.0 - params.shrink) * default_probs[i];
    if (p[i] < params.floor) {
      p[i] = params.floor;
      floored = true;
    }
    sum += p[i];
  }
  if (floored || std::abs(sum - 1.0) > 1e-12)
    for (double& v : p) v /= sum;
  return ProbabilityVector(std::move(p));
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Llm: return "llm";
    case Provenance::Fallback: return "fallback";
    case Provenance::Default: return "default";
  }
  return "unknown";
}

AuditLog::AuditLog(const std::filesystem::path& path) {
  file_.emplace(path, std::ios::app);
  if (!*file_) throw std::runtime_error("cannot open audit log " + path.string());
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

}  // namespace

void AuditLog::append(const std::string& session, std::size_t exchange, const std::string& direction,
                      const std::string& payload) {
  AuditRecord r{session, exchange, direction, payload, utc_now()};
  if (file_) {
    nlohmann::json j = {{"timestamp", r.timestamp}, {"session", r.session}, {"exchange", r.exchange},
                        {"direction", r.direction}, {"payload", r.payload}};
    *file_ << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << "\n";
    file_->flush();
  }
  records_.push_back(std::move(r));
}

std::size_t AuditLog::exchanges(const std::string& session) const {
  std::set<std::size_t> ids;
  for (const auto& r : records_)
    if (r.session == session) ids.insert(r.exchange);
  return ids.size();
}

RefinementResult refine_probabilities(ChatBackend& backend, const RefinementContext& ctx,
                                      std::size_t max_retries, AuditLog* audit,
                                      const std::string& session) {
  const std::size_t n = ctx.quantiles.size();
  auto log = [&](std::size_t exchange, const char* direction, const std::string& payload) {
    if (audit) audit->append(session, exchange, direction, payload);
  };
  static const std::string agent1_system =
      "You are a power system analyst calibrating wind forecast-error scenario trees.";
  static const std::string agent2_system =
      "You extract values from text and answer only in the requested JSON format.";

  for (std::size_t attempt = 1; attempt <= max_retries + 1; ++attempt) {
    const std::string prompt1 = build_agent1_prompt(ctx.stats, ctx.quantiles, ctx.defaults, ctx.history);
    log(attempt, "agent1.request", prompt1);
    std::string reply1;
    try {
      reply1 = backend.send({{"system", agent1_system}, {"user", prompt1}});
    } catch (const BackendError& e) {
      log(attempt, "error", e.what());
      continue;
    }
    log(attempt, "agent1.reply", reply1);
    if (lowercase_without_escapes(reply1).find(kTriggerPhrase) == std::string::npos) {
      log(attempt, "outcome", "rejected: trigger phrase absent from agent 1 reply");
      continue;
    }

    const std::string prompt2 = build_agent2_prompt(reply1);
    log(attempt, "agent2.request", prompt2);
    std::optional<std::vector<double>> raw;
    try {
      const std::string reply2 = backend.send({{"system", agent2_system}, {"user", prompt2}});
      log(attempt, "agent2.reply", reply2);
      try {
        raw = parse_agent2_output(reply2, n);
      } catch (const ExtractionError&) {
        try {
          raw = extract_prob_new(reply2, n);
        } catch (const ExtractionError& e) {
          log(attempt, "error", std::string("agent 2 reply unusable: ") + e.what());
        }
      }
    } catch (const BackendError& e) {
      log(attempt, "error", e.what());
    }
    if (!raw) {
      try {
        raw = extract_prob_new(reply1, n);
      } catch (const ExtractionError& e) {
        log(attempt, "outcome", std::string("rejected: ") + e.what());
        continue;
      }
    }
    try {
      ProbabilityVector pv = validate_probability_vector(*raw, n);
      log(attempt, "outcome", "accepted " + pv.render());
      return {std::move(pv), Provenance::Llm, attempt};
    } catch (const ValidationError& e) {
      log(attempt, "outcome", "rejected (" + to_string(e.reason()) + "): " + e.what());
    } catch (const DomainError& e) {
      log(attempt, "outcome", std::string("rejected: ") + e.what());
    }
  }
  ProbabilityVector pv = deterministic_calibration(ctx.stats, ctx.quantiles, ctx.defaults, ctx.calibration);
  log(max_retries + 1, "outcome", "fallback " + pv.render());
  return {std::move(pv), Provenance::Fallback, max_retries + 1};
}

}  // namespace windcommit
