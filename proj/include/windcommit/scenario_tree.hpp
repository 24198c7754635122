#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace windcommit {

// Probability levels that place the scenario branches, stored ascending.
class QuantileSet {
 public:
  explicit QuantileSet(std::vector<double> levels);

  // [0.01, 0.1, 0.5, 0.9, 0.99]
  static QuantileSet canonical();

  const std::vector<double>& levels() const { return levels_; }
  std::size_t size() const { return levels_.size(); }
  double operator[](std::size_t i) const { return levels_[i]; }

  bool is_canonical() const;

 private:
  std::vector<double> levels_;
};

// AR(1) persistence and error scaling of the wind-forecast error.
struct ArParams {
  double phi = 1.2;
  double eps_c = 0.14;

  void validate() const;
};

// Branch probabilities. Construction enforces nonnegativity and sum = 1
// within 1e-6; the stored entries are renormalized to sum to 1.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> p);

  // [0.05556, 0.24444, 0.4, 0.24444, 0.05556]
  static ProbabilityVector published_default();

  const std::vector<double>& values() const { return p_; }
  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }

  // "[0.05556,0.24444,0.4,0.24444,0.05556]"
  std::string render() const;

 private:
  std::vector<double> p_;
};

struct ScenarioTree {
  std::size_t stages = 0;
  std::size_t branch_stage = 2;  // 1-based stage at which branching occurs
  std::vector<double> quantiles;
  // errors[n][k], branch n, stage k (0-based storage; stage 1 is k = 0)
  std::vector<std::vector<double>> errors;
  ProbabilityVector probabilities{std::vector<double>{1.0}};

  std::size_t branches() const { return errors.size(); }
};

// How tree errors act on the wind forecast.
enum class ErrorMode {
  PerUnit,   // forecast * (1 + error)
  Absolute,  // forecast + error * wind_cap
};

double normal_cdf(double x, double mu = 0.0, double sigma = 1.0);

// Inverse of the normal CDF. Throws DomainError unless 0 < q < 1.
double inverse_normal_cdf(double q, double mu = 0.0, double sigma = 1.0);

// Midpoint-interval rule: boundaries halfway between adjacent levels.
ProbabilityVector branch_probabilities(const QuantileSet& quantiles);

// Errors follow the AR(1) recursion: zero at stage 1, eps_c * Phi^-1(q) at
// the branch stage, then phi times the previous stage. Probabilities come
// from the midpoint rule; callers may overwrite them.
ScenarioTree build_error_tree(const QuantileSet& quantiles, const ArParams& params,
                              std::size_t stages);

// Per-scenario wind trajectories, clamped to [0, wind_cap]: result[n][k].
std::vector<std::vector<double>> apply_errors(const ScenarioTree& tree,
                                              const std::vector<double>& wind_forecast,
                                              double wind_cap,
                                              ErrorMode mode = ErrorMode::PerUnit);

// Debug dump: stages, branches, errors to 10 significant digits, probabilities.
std::string render_tree(const ScenarioTree& tree);

}  // namespace windcommit
