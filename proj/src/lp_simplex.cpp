#include "lp_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "windcommit/error.hpp"

namespace windcommit::detail {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kDropTol = 1e-13;
constexpr double kResidualTol = 1e-8;
constexpr std::size_t kDegenerateRunForBland = 50;
constexpr std::size_t kRecomputeEvery = 200;
constexpr std::size_t npos = static_cast<std::size_t>(-1);

}  // namespace

struct SimplexEngine::Rows {
  std::vector<std::vector<std::pair<std::size_t, double>>> by_row;
  std::vector<std::vector<std::pair<std::size_t, double>>> by_col;  // structurals
  std::vector<double> rhs;
  std::vector<double> cost;       // scaled, all columns
  std::vector<double> raw_cost;   // structurals, unscaled
  bool infeasible_empty_row = false;
};

SimplexEngine::SimplexEngine(const MilpProblem& problem) {
  auto rows = std::make_shared<Rows>();
  n_ = problem.num_vars();

  std::vector<Sense> senses;
  for (const auto& c : problem.constraints) {
    std::vector<std::pair<std::size_t, double>> merged;
    for (const auto& t : c.terms) {
      auto it = std::find_if(merged.begin(), merged.end(),
                             [&](const auto& e) { return e.first == t.var; });
      if (it == merged.end())
        merged.emplace_back(t.var, t.coef);
      else
        it->second += t.coef;
    }
    std::erase_if(merged, [](const auto& e) { return e.second == 0.0; });
    if (merged.empty()) {
      bool ok = (c.sense == Sense::LessEqual && 0.0 <= c.rhs + kFeasTol) ||
                (c.sense == Sense::GreaterEqual && 0.0 >= c.rhs - kFeasTol) ||
                (c.sense == Sense::Equal && std::abs(c.rhs) <= kFeasTol);
      if (!ok) rows->infeasible_empty_row = true;
      continue;
    }
    std::sort(merged.begin(), merged.end());
    rows->by_row.push_back(std::move(merged));
    rows->rhs.push_back(c.rhs);
    senses.push_back(c.sense);
  }
  m_ = rows->by_row.size();
  cols_ = n_ + m_;

  rows->by_col.resize(n_);
  for (std::size_t i = 0; i < m_; ++i)
    for (auto [j, a] : rows->by_row[i]) rows->by_col[j].emplace_back(i, a);

  double scale = 0.0;
  for (double c : problem.objective) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) scale = 1.0;
  rows->raw_cost = problem.objective;
  rows->cost.assign(cols_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) rows->cost[j] = problem.objective[j] / scale;

  lb_.resize(cols_);
  ub_.resize(cols_);
  x_.assign(cols_, 0.0);
  status_.resize(cols_);
  for (std::size_t j = 0; j < n_; ++j) {
    lb_[j] = problem.lower[j];
    ub_[j] = problem.upper[j];
    if (std::isfinite(lb_[j])) {
      x_[j] = lb_[j];
      status_[j] = VarStatus::AtLower;
    } else if (std::isfinite(ub_[j])) {
      x_[j] = ub_[j];
      status_[j] = VarStatus::AtUpper;
    } else {
      status_[j] = VarStatus::FreeZero;
    }
  }

  tableau_.assign(m_ * cols_, 0.0);
  header_.resize(m_);
  row_of_.assign(cols_, -1);
  for (std::size_t i = 0; i < m_; ++i) {
    const std::size_t s = n_ + i;
    switch (senses[i]) {
      case Sense::LessEqual: lb_[s] = 0.0; ub_[s] = kInf; break;
      case Sense::GreaterEqual: lb_[s] = -kInf; ub_[s] = 0.0; break;
      case Sense::Equal: lb_[s] = 0.0; ub_[s] = 0.0; break;
    }
    double activity = 0.0;
    for (auto [j, a] : rows->by_row[i]) {
      at(i, j) = a;
      activity += a * x_[j];
    }
    at(i, s) = 1.0;
    header_[i] = s;
    row_of_[s] = static_cast<std::ptrdiff_t>(i);
    status_[s] = VarStatus::Basic;
    x_[s] = rows->rhs[i] - activity;
  }
  d_ = rows->cost;
  rows_ = std::move(rows);
}

void SimplexEngine::set_bounds(std::size_t j, double lb, double ub) {
  lb_[j] = lb;
  ub_[j] = ub;
  if (status_[j] == VarStatus::Basic) return;
  double target;
  VarStatus st;
  if (status_[j] == VarStatus::AtUpper && std::isfinite(ub)) {
    target = ub;
    st = VarStatus::AtUpper;
  } else if (std::isfinite(lb)) {
    target = lb;
    st = VarStatus::AtLower;
  } else if (std::isfinite(ub)) {
    target = ub;
    st = VarStatus::AtUpper;
  } else {
    target = 0.0;
    st = VarStatus::FreeZero;
  }
  const double delta = target - x_[j];
  if (delta != 0.0)
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = at(i, j);
      if (a != 0.0) x_[header_[i]] -= a * delta;
    }
  x_[j] = target;
  status_[j] = st;
}

Basis SimplexEngine::basis() const { return {header_, status_}; }

void SimplexEngine::load_basis(const Basis& basis) {
  header_ = basis.header;
  status_ = basis.status;
  std::fill(row_of_.begin(), row_of_.end(), -1);
  for (std::size_t i = 0; i < m_; ++i) row_of_[header_[i]] = static_cast<std::ptrdiff_t>(i);
  for (std::size_t j = 0; j < cols_; ++j) {
    if (status_[j] == VarStatus::Basic) continue;
    if (status_[j] == VarStatus::AtUpper && std::isfinite(ub_[j])) {
      x_[j] = ub_[j];
    } else if (std::isfinite(lb_[j])) {
      x_[j] = lb_[j];
      status_[j] = VarStatus::AtLower;
    } else if (std::isfinite(ub_[j])) {
      x_[j] = ub_[j];
      status_[j] = VarStatus::AtUpper;
    } else {
      x_[j] = 0.0;
      status_[j] = VarStatus::FreeZero;
    }
  }
  refactor();
}

void SimplexEngine::refactor() {
  // Gauss-Jordan inverse of the basis matrix with partial pivoting.
  std::vector<double> basis_mat(m_ * m_, 0.0), inverse(m_ * m_, 0.0);
  for (std::size_t c = 0; c < m_; ++c) {
    const std::size_t v = header_[c];
    if (v < n_) {
      for (auto [i, a] : rows_->by_col[v]) basis_mat[i * m_ + c] = a;
    } else {
      basis_mat[(v - n_) * m_ + c] = 1.0;
    }
    inverse[c * m_ + c] = 1.0;
  }
  std::vector<std::size_t> nz_b, nz_i;
  for (std::size_t c = 0; c < m_; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < m_; ++r)
      if (std::abs(basis_mat[r * m_ + c]) > std::abs(basis_mat[p * m_ + c])) p = r;
    if (std::abs(basis_mat[p * m_ + c]) < 1e-11) throw SolverError("singular simplex basis");
    if (p != c)
      for (std::size_t k = 0; k < m_; ++k) {
        std::swap(basis_mat[p * m_ + k], basis_mat[c * m_ + k]);
        std::swap(inverse[p * m_ + k], inverse[c * m_ + k]);
      }
    const double piv = basis_mat[c * m_ + c];
    // The basis is sparse, so eliminate using only the pivot row's nonzeros.
    nz_b.clear();
    nz_i.clear();
    for (std::size_t k = 0; k < m_; ++k) {
      if (basis_mat[c * m_ + k] != 0.0) {
        basis_mat[c * m_ + k] /= piv;
        nz_b.push_back(k);
      }
      if (inverse[c * m_ + k] != 0.0) {
        inverse[c * m_ + k] /= piv;
        nz_i.push_back(k);
      }
    }
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == c) continue;
      const double f = basis_mat[r * m_ + c];
      if (f == 0.0) continue;
      for (std::size_t k : nz_b) basis_mat[r * m_ + k] -= f * basis_mat[c * m_ + k];
      for (std::size_t k : nz_i) inverse[r * m_ + k] -= f * inverse[c * m_ + k];
      basis_mat[r * m_ + c] = 0.0;
    }
  }
  // Row c of the reduced system corresponds to basis column c, i.e. header_[c].
  std::fill(tableau_.begin(), tableau_.end(), 0.0);
  for (std::size_t i = 0; i < m_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      double s = 0.0;
      for (auto [k, a] : rows_->by_col[j]) s += inverse[i * m_ + k] * a;
      if (std::abs(s) > kDropTol) at(i, j) = s;
    }
    for (std::size_t k = 0; k < m_; ++k) {
      const double v = inverse[i * m_ + k];
      if (std::abs(v) > kDropTol) at(i, n_ + k) = v;
    }
  }
  recompute_basic_values();
  recompute_reduced_costs();
}

void SimplexEngine::recompute_basic_values() {
  std::vector<double> r = rows_->rhs;
  for (std::size_t j = 0; j < cols_; ++j) {
    if (status_[j] == VarStatus::Basic || x_[j] == 0.0) continue;
    if (j < n_) {
      for (auto [i, a] : rows_->by_col[j]) r[i] -= a * x_[j];
    } else {
      r[j - n_] -= x_[j];
    }
  }
  for (std::size_t i = 0; i < m_; ++i) {
    double s = 0.0;
    const double* inv_row = &tableau_[i * cols_ + n_];
    for (std::size_t k = 0; k < m_; ++k) s += inv_row[k] * r[k];
    x_[header_[i]] = s;
  }
}

void SimplexEngine::recompute_reduced_costs() {
  d_ = rows_->cost;
  for (std::size_t i = 0; i < m_; ++i) {
    const double cb = rows_->cost[header_[i]];
    if (cb == 0.0) continue;
    const double* row = &tableau_[i * cols_];
    for (std::size_t j = 0; j < cols_; ++j) d_[j] -= cb * row[j];
  }
  for (std::size_t i = 0; i < m_; ++i) d_[header_[i]] = 0.0;
}

double SimplexEngine::max_row_residual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < m_; ++i) {
    double s = x_[n_ + i] - rows_->rhs[i];
    for (auto [j, a] : rows_->by_row[i]) s += a * x_[j];
    worst = std::max(worst, std::abs(s) / (1.0 + std::abs(rows_->rhs[i])));
  }
  return worst;
}

void SimplexEngine::pivot(std::size_t r, std::size_t q) {
  double* prow = &tableau_[r * cols_];
  const double piv = prow[q];
  std::vector<std::size_t> nz;
  nz.reserve(64);
  for (std::size_t j = 0; j < cols_; ++j) {
    if (prow[j] == 0.0) continue;
    prow[j] /= piv;
    nz.push_back(j);
  }
  prow[q] = 1.0;
  for (std::size_t i = 0; i < m_; ++i) {
    if (i == r) continue;
    double* row = &tableau_[i * cols_];
    const double f = row[q];
    if (f == 0.0) continue;
    for (std::size_t j : nz) {
      double v = row[j] - f * prow[j];
      row[j] = std::abs(v) < kDropTol ? 0.0 : v;
    }
    row[q] = 0.0;
  }
  const double fq = d_[q];
  if (fq != 0.0)
    for (std::size_t j : nz) d_[j] -= fq * prow[j];
  d_[q] = 0.0;

  const std::size_t leaving = header_[r];
  row_of_[leaving] = -1;
  header_[r] = q;
  row_of_[q] = static_cast<std::ptrdiff_t>(r);
}

LpStatus SimplexEngine::solve() {
  if (rows_->infeasible_empty_row) return LpStatus::Infeasible;
  // Bound changes in branch and bound leave the parent basis dual feasible,
  // where dual iterations restore primal feasibility in a few pivots. The
  // primal pass afterwards confirms optimality or repairs numerical drift.
  if (dual_feasible() && dual_iterate() == DualOutcome::Infeasible) return LpStatus::Infeasible;
  return iterate();
}

bool SimplexEngine::dual_feasible() const {
  for (std::size_t j = 0; j < cols_; ++j) {
    const VarStatus st = status_[j];
    if (st == VarStatus::Basic || lb_[j] == ub_[j]) continue;
    if ((st == VarStatus::AtLower || st == VarStatus::FreeZero) && d_[j] < -kDualTol) return false;
    if ((st == VarStatus::AtUpper || st == VarStatus::FreeZero) && d_[j] > kDualTol) return false;
  }
  return true;
}

SimplexEngine::DualOutcome SimplexEngine::dual_iterate() {
  const std::size_t limit = 10 * (m_ + cols_) + 1000;
  bool verified = false;
  for (std::size_t it = 0; it < limit; ++it) {
    std::size_t r = npos;
    double worst = kFeasTol;
    bool below = false;
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t v = header_[i];
      const double lo = lb_[v] - x_[v], hi = x_[v] - ub_[v];
      if (lo > worst) {
        worst = lo;
        r = i;
        below = true;
      } else if (hi > worst) {
        worst = hi;
        r = i;
        below = false;
      }
    }
    if (r == npos) return DualOutcome::Feasible;

    // The leaving variable moves toward the bound it violates; entering
    // candidates must push it that way while keeping reduced costs signed.
    const double* row = &tableau_[r * cols_];
    std::size_t q = npos;
    double best_ratio = kInf, best_alpha = 0.0;
    bool marginal = false;
    for (std::size_t j = 0; j < cols_; ++j) {
      const VarStatus st = status_[j];
      if (st == VarStatus::Basic || lb_[j] == ub_[j]) continue;
      const double a = row[j];
      if (a == 0.0) continue;
      // x_v changes by -a * dx_j.
      const bool can_up = st == VarStatus::AtLower || st == VarStatus::FreeZero;
      const bool can_down = st == VarStatus::AtUpper || st == VarStatus::FreeZero;
      const bool ok = below ? ((can_up && a < 0.0) || (can_down && a > 0.0))
                            : ((can_up && a > 0.0) || (can_down && a < 0.0));
      if (!ok) continue;
      if (std::abs(a) <= kPivotTol) {
        marginal = true;
        continue;
      }
      const double ratio = std::abs(d_[j]) / std::abs(a);
      if (ratio < best_ratio - 1e-12 ||
          (ratio <= best_ratio + 1e-12 && std::abs(a) > std::abs(best_alpha))) {
        best_ratio = ratio;
        best_alpha = a;
        q = j;
      }
    }
    if (q == npos) {
      if (marginal) return DualOutcome::Stalled;
      if (!verified) {
        // Rule out accumulated drift before reporting infeasibility.
        verified = true;
        if (max_row_residual() > kResidualTol) {
          recompute_basic_values();
          if (max_row_residual() > kResidualTol) {
            refactor();
            if (!dual_feasible()) return DualOutcome::Stalled;
          }
        }
        continue;
      }
      return DualOutcome::Infeasible;
    }

    const std::size_t v = header_[r];
    const double target = below ? lb_[v] : ub_[v];
    const double step = (x_[v] - target) / best_alpha;  // dx_q
    x_[q] += step;
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = at(i, q);
      if (a != 0.0) x_[header_[i]] -= a * step;
    }
    x_[v] = target;
    status_[v] = below ? VarStatus::AtLower : VarStatus::AtUpper;
    pivot(r, q);
    status_[q] = VarStatus::Basic;
    ++iterations_;
  }
  return DualOutcome::Stalled;
}

LpStatus SimplexEngine::iterate() {
  const std::size_t limit = 50 * (m_ + cols_) + 10000;
  const std::size_t start = iterations_;
  std::vector<double> phase_cost(cols_);
  std::vector<double> sign(m_);
  bool bland = false;
  bool clean = false;
  std::size_t degenerate_run = 0;
  std::size_t since_recompute = 0;
  int refactors = 0;

  while (true) {
    if (iterations_ - start >= limit) return LpStatus::IterationLimit;

    bool phase1 = false;
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t v = header_[i];
      sign[i] = x_[v] < lb_[v] - kFeasTol ? -1.0 : (x_[v] > ub_[v] + kFeasTol ? 1.0 : 0.0);
      phase1 = phase1 || sign[i] != 0.0;
    }
    const double* dj = d_.data();
    if (phase1) {
      std::fill(phase_cost.begin(), phase_cost.end(), 0.0);
      for (std::size_t i = 0; i < m_; ++i) {
        if (sign[i] == 0.0) continue;
        const double* row = &tableau_[i * cols_];
        for (std::size_t j = 0; j < cols_; ++j) phase_cost[j] -= sign[i] * row[j];
      }
      dj = phase_cost.data();
    }

    std::size_t q = npos;
    double dir = 0.0, best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      const VarStatus st = status_[j];
      if (st == VarStatus::Basic || lb_[j] == ub_[j]) continue;
      const double dd = dj[j];
      double score, jdir;
      if ((st == VarStatus::AtLower || st == VarStatus::FreeZero) && dd < -kDualTol) {
        score = -dd;
        jdir = 1.0;
      } else if ((st == VarStatus::AtUpper || st == VarStatus::FreeZero) && dd > kDualTol) {
        score = dd;
        jdir = -1.0;
      } else {
        continue;
      }
      if (bland) {
        q = j;
        dir = jdir;
        break;
      }
      if (score > best) {
        best = score;
        q = j;
        dir = jdir;
      }
    }

    if (q == npos) {
      if (!clean) {
        // Flush accumulated drift before declaring a verdict.
        if (max_row_residual() > 1e-11) recompute_basic_values();
        if (max_row_residual() > kResidualTol && refactors < 3) {
          ++refactors;
          refactor();
        } else {
          recompute_reduced_costs();
        }
        clean = true;
        continue;
      }
      return phase1 ? LpStatus::Infeasible : LpStatus::Optimal;
    }

    // Ratio test. Feasible basics stay within bounds; infeasible ones block
    // at the bound they violate.
    double theta = (std::isfinite(lb_[q]) && std::isfinite(ub_[q])) ? ub_[q] - lb_[q] : kInf;
    std::size_t leave = npos;
    bool leave_at_upper = false;
    double leave_alpha = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = at(i, q);
      if (std::abs(a) <= kPivotTol) continue;
      const double rate = -dir * a;
      const std::size_t v = header_[i];
      const double xv = x_[v];
      double lim;
      bool to_upper;
      if (rate < 0.0) {
        if (xv > ub_[v] + kFeasTol) {
          lim = (xv - ub_[v]) / -rate;
          to_upper = true;
        } else if (xv >= lb_[v] - kFeasTol && std::isfinite(lb_[v])) {
          lim = std::max(0.0, (xv - lb_[v]) / -rate);
          to_upper = false;
        } else {
          continue;
        }
      } else {
        if (xv < lb_[v] - kFeasTol) {
          lim = (lb_[v] - xv) / rate;
          to_upper = false;
        } else if (xv <= ub_[v] + kFeasTol && std::isfinite(ub_[v])) {
          lim = std::max(0.0, (ub_[v] - xv) / rate);
          to_upper = true;
        } else {
          continue;
        }
      }
      bool take = false;
      if (lim < theta - 1e-12) {
        take = true;
      } else if (leave != npos && lim <= theta + 1e-12) {
        take = bland ? v < header_[leave] : std::abs(a) > std::abs(leave_alpha);
      }
      if (take) {
        theta = std::min(lim, theta);
        leave = i;
        leave_at_upper = to_upper;
        leave_alpha = a;
      }
    }

    if (!std::isfinite(theta)) {
      if (!phase1) return LpStatus::Unbounded;
      if (refactors >= 3) return LpStatus::IterationLimit;
      ++refactors;
      refactor();
      continue;
    }

    x_[q] += dir * theta;
    if (theta != 0.0)
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, q);
        if (a != 0.0) x_[header_[i]] -= dir * a * theta;
      }
    if (leave == npos) {
      status_[q] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
      x_[q] = dir > 0 ? ub_[q] : lb_[q];
    } else {
      const std::size_t v = header_[leave];
      x_[v] = leave_at_upper ? ub_[v] : lb_[v];
      status_[v] = leave_at_upper ? VarStatus::AtUpper : VarStatus::AtLower;
      pivot(leave, q);
      status_[q] = VarStatus::Basic;
    }

    if (theta <= 1e-12) {
      if (++degenerate_run > kDegenerateRunForBland) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
    clean = false;
    ++iterations_;
    if (++since_recompute >= kRecomputeEvery) {
      since_recompute = 0;
      recompute_basic_values();
    }
  }
}

std::vector<double> SimplexEngine::primal() const {
  return std::vector<double>(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
}

double SimplexEngine::objective() const {
  double s = 0.0;
  for (std::size_t j = 0; j < n_; ++j) s += rows_->raw_cost[j] * x_[j];
  return s;
}

}  // namespace windcommit::detail
