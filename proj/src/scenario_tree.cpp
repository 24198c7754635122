#include "windcommit/scenario_tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

#include "windcommit/error.hpp"

namespace windcommit {

namespace {

std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Acklam's rational approximation, relative error ~1e-9 before refinement.
double acklam(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    double q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > 1 - p_low) {
    double q = std::sqrt(-2 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

}  // namespace

QuantileSet::QuantileSet(std::vector<double> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw DomainError("quantile set is empty");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    double q = levels_[i];
    if (!(q > 0.0 && q < 1.0))
      throw DomainError("quantile level " + shortest(q) + " outside (0,1)");
    if (i > 0 && !(q > levels_[i - 1]))
      throw DomainError("quantile levels must be strictly increasing");
  }
}

QuantileSet QuantileSet::canonical() { return QuantileSet({0.01, 0.1, 0.5, 0.9, 0.99}); }

bool QuantileSet::is_canonical() const { return levels_ == canonical().levels_; }

void ArParams::validate() const {
  if (!(phi > 0.0)) throw DomainError("phi must be positive");
  if (!(eps_c >= 0.0)) throw DomainError("eps_c must be nonnegative");
}

ProbabilityVector::ProbabilityVector(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw DomainError("probability vector is empty");
  double sum = 0.0;
  for (double v : p_) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("probability entries must be >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw DomainError("probabilities sum to " + shortest(sum) + ", expected 1");
  if (std::abs(sum - 1.0) > 1e-12)
    for (double& v : p_) v /= sum;
}

ProbabilityVector ProbabilityVector::published_default() {
  return ProbabilityVector({0.05556, 0.24444, 0.4, 0.24444, 0.05556});
}

std::string ProbabilityVector::render() const {
  std::string out = "[";
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (i) out += ',';
    out += shortest(p_[i]);
  }
  return out + "]";
}

double normal_cdf(double x, double mu, double sigma) {
  if (sigma == 0.0) return x < mu ? 0.0 : 1.0;
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

double inverse_normal_cdf(double q, double mu, double sigma) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("inverse_normal_cdf: q must lie in (0,1)");
  if (!(sigma >= 0.0)) throw DomainError("inverse_normal_cdf: sigma must be >= 0");
  if (sigma == 0.0) return mu;
  double x = acklam(q);
  // Two Halley steps bring the approximation to full double precision.
  for (int i = 0; i < 2; ++i) {
    double e = normal_cdf(x) - q;
    double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
    x = x - u / (1 + x * u / 2);
  }
  return mu + sigma * x;
}

ProbabilityVector branch_probabilities(const QuantileSet& quantiles) {
  const auto& q = quantiles.levels();
  const std::size_t n = q.size();
  if (n == 1) return ProbabilityVector({1.0});
  std::vector<double> bounds(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) bounds[i] = (q[i] + q[i + 1]) / 2;
  std::vector<double> p(n);
  p[0] = bounds[0];
  for (std::size_t i = 1; i + 1 < n; ++i) p[i] = bounds[i] - bounds[i - 1];
  p[n - 1] = 1.0 - bounds[n - 2];
  return ProbabilityVector(std::move(p));
}

ScenarioTree build_error_tree(const QuantileSet& quantiles, const ArParams& params,
                              std::size_t stages) {
  if (stages < 1) throw DomainError("scenario tree needs at least one stage");
  params.validate();
  ScenarioTree tree;
  tree.stages = stages;
  tree.quantiles = quantiles.levels();
  tree.errors.assign(quantiles.size(), std::vector<double>(stages, 0.0));
  for (std::size_t n = 0; n < quantiles.size(); ++n) {
    auto& row = tree.errors[n];
    const double shock = params.eps_c * inverse_normal_cdf(quantiles[n]);
    for (std::size_t k = 1; k < stages; ++k) {
      row[k] = params.phi * row[k - 1];
      if (k + 1 == tree.branch_stage) row[k] += shock;
    }
  }
  tree.probabilities = branch_probabilities(quantiles);
  return tree;
}

std::vector<std::vector<double>> apply_errors(const ScenarioTree& tree,
                                              const std::vector<double>& wind_forecast,
                                              double wind_cap, ErrorMode mode) {
  if (wind_forecast.size() != tree.stages)
    throw DomainError("wind forecast length " + std::to_string(wind_forecast.size()) +
                      " does not match tree stages " + std::to_string(tree.stages));
  if (!(wind_cap > 0.0)) throw DomainError("wind cap must be positive");
  for (double w : wind_forecast)
    if (!(w >= 0.0)) throw DomainError("wind forecast entries must be >= 0");

  std::vector<std::vector<double>> wind(tree.branches(), std::vector<double>(tree.stages));
  for (std::size_t n = 0; n < tree.branches(); ++n) {
    for (std::size_t k = 0; k < tree.stages; ++k) {
      const double e = tree.errors[n][k];
      double w = mode == ErrorMode::PerUnit ? wind_forecast[k] * (1.0 + e)
                                            : wind_forecast[k] + e * wind_cap;
      wind[n][k] = std::clamp(w, 0.0, wind_cap);
    }
  }
  return wind;
}

std::string render_tree(const ScenarioTree& tree) {
  std::ostringstream out;
  char buf[64];
  out << "stages " << tree.stages << "\n";
  out << "branches " << tree.branches() << "\n";
  out << "branch_stage " << tree.branch_stage << "\n";
  for (std::size_t n = 0; n < tree.branches(); ++n) {
    std::snprintf(buf, sizeof buf, "%.10g", tree.quantiles.at(n));
    out << "branch " << n + 1 << " q=" << buf;
    std::snprintf(buf, sizeof buf, "%.10g", tree.probabilities[n]);
    out << " p=" << buf << " errors";
    for (double e : tree.errors[n]) {
      std::snprintf(buf, sizeof buf, " %.10g", e);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace windcommit
