// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "soiv/lp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <iomanip>
#include <string>

namespace soiv {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kDegenerateStep = 1e-12;
constexpr double kSingularTol = 1e-12;
constexpr std::size_t kRefactorInterval = 64;

}  // namespace

double LinearObjective::evaluate(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& [j, c] : terms) s += c * x[j];
  return s;
}

std::size_t LinearProgram::add_var(double lo, double hi) {
  col_lower.push_back(lo);
  col_upper.push_back(hi);
  return n_vars++;
}

void LinearProgram::add_row(SparseTerms terms, double rhs) {
  rows.push_back({std::move(terms), rhs});
}

void LinearProgram::validate() const {
  if (col_lower.size() != n_vars || col_upper.size() != n_vars) {
    throw std::invalid_argument("lp: bound vectors do not match n_vars");
  }
  for (std::size_t j = 0; j < n_vars; ++j) {
    if (std::isnan(col_lower[j]) || std::isnan(col_upper[j]) ||
        col_lower[j] > col_upper[j] || col_lower[j] == kInf ||
        col_upper[j] == -kInf) {
      throw std::invalid_argument("lp: bad bounds on variable " + std::to_string(j));
    }
  }
  for (const auto& row : rows) {
    if (!std::isfinite(row.rhs)) throw std::invalid_argument("lp: non-finite rhs");
    for (const auto& [j, a] : row.terms) {
      if (j >= n_vars) throw std::invalid_argument("lp: row references unknown variable");
      if (!std::isfinite(a)) throw std::invalid_argument("lp: non-finite coefficient");
    }
  }
  for (const auto& [j, c] : objective.terms) {
    if (j >= n_vars || !std::isfinite(c)) throw std::invalid_argument("lp: bad objective term");
  }
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kFeasible: return "feasible";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kNumericalLimit: return "numerical-limit";
  }
  return "?";
}

SimplexSolver::SimplexSolver(LinearProgram lp) : lp_(std::move(lp)) {
  lp_.validate();
  m_ = lp_.rows.size();
  n_ = lp_.n_vars;
  total_ = n_ + m_;
  a_.assign(m_ * total_, 0.0);
  for (std::size_t i = 0; i < m_; ++i) {
    for (const auto& [j, v] : lp_.rows[i].terms) a_[j * m_ + i] += v;
  }
  lo_.assign(total_, 0.0);
  up_.assign(total_, kInf);
  std::copy(lp_.col_lower.begin(), lp_.col_lower.end(), lo_.begin());
  std::copy(lp_.col_upper.begin(), lp_.col_upper.end(), up_.begin());
  cost_.assign(total_, 0.0);
  cold_start();
}

void SimplexSolver::cold_start() {
  x_.assign(total_, 0.0);
  state_.assign(total_, VarState::kAtZero);
  for (std::size_t j = 0; j < n_; ++j) {
    if (std::isfinite(lo_[j])) {
      state_[j] = VarState::kAtLower;
      x_[j] = lo_[j];
    } else if (std::isfinite(up_[j])) {
      state_[j] = VarState::kAtUpper;
      x_[j] = up_[j];
    }
  }
  basis_.resize(m_);
  binv_.assign(m_ * m_, 0.0);
  for (std::size_t i = 0; i < m_; ++i) {
    double r = lp_.rows[i].rhs;
    for (std::size_t j = 0; j < n_; ++j) r -= col(i, j) * x_[j];
    const double sign = r >= 0 ? 1.0 : -1.0;
    const std::size_t art = n_ + i;
    a_[art * m_ + i] = sign;
    lo_[art] = 0.0;
    up_[art] = kInf;
    x_[art] = std::abs(r);
    state_[art] = VarState::kBasic;
    basis_[i] = art;
    binv_[i * m_ + i] = sign;
  }
  since_refactor_ = 0;
  phase1_done_ = false;
}

bool SimplexSolver::refactor() {
  if (m_ == 0) return true;
  // Gauss-Jordan on [B | I] with partial pivoting.
  std::vector<double> b(m_ * m_);
  for (std::size_t i = 0; i < m_; ++i) {
    for (std::size_t k = 0; k < m_; ++k) b[i * m_ + k] = col(i, basis_[k]);
  }
  std::vector<double> inv(m_ * m_, 0.0);
  for (std::size_t i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
  for (std::size_t c = 0; c < m_; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < m_; ++r) {
      if (std::abs(b[r * m_ + c]) > std::abs(b[p * m_ + c])) p = r;
    }
    if (std::abs(b[p * m_ + c]) < kSingularTol) return false;
    if (p != c) {
      for (std::size_t k = 0; k < m_; ++k) {
        std::swap(b[p * m_ + k], b[c * m_ + k]);
        std::swap(inv[p * m_ + k], inv[c * m_ + k]);
      }
    }
    const double d = b[c * m_ + c];
    for (std::size_t k = 0; k < m_; ++k) {
      b[c * m_ + k] /= d;
      inv[c * m_ + k] /= d;
    }
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == c) continue;
      const double f = b[r * m_ + c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < m_; ++k) {
        b[r * m_ + k] -= f * b[c * m_ + k];
        inv[r * m_ + k] -= f * inv[c * m_ + k];
      }
    }
  }
  binv_ = std::move(inv);
  // x_B = B^-1 (rhs - N x_N)
  std::vector<double> r(m_);
  for (std::size_t i = 0; i < m_; ++i) r[i] = lp_.rows[i].rhs;
  for (std::size_t j = 0; j < total_; ++j) {
    if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
    for (std::size_t i = 0; i < m_; ++i) r[i] -= col(i, j) * x_[j];
  }
  for (std::size_t i = 0; i < m_; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < m_; ++k) s += binv_[i * m_ + k] * r[k];
    x_[basis_[i]] = s;
  }
  since_refactor_ = 0;
  return true;
}

std::vector<double> SimplexSolver::duals() const {
  std::vector<double> y(m_, 0.0);
  for (std::size_t i = 0; i < m_; ++i) {
    const double c = cost_[basis_[i]];
    if (c == 0.0) continue;
    for (std::size_t k = 0; k < m_; ++k) y[k] += c * binv_[i * m_ + k];
  }
  return y;
}

double SimplexSolver::reduced_cost(std::size_t j, const std::vector<double>& y) const {
  double d = cost_[j];
  const double* column = &a_[j * m_];
  for (std::size_t k = 0; k < m_; ++k) d -= y[k] * column[k];
  return d;
}

LpStatus SimplexSolver::run(std::size_t& pivots) {
  const std::size_t cap = 50 * (n_ + m_);
  std::size_t iterations = 0;
  std::size_t degenerate_run = 0;
  bool bland = false;
  std::vector<double> alpha(m_);
  while (true) {
    if (iterations >= cap) return LpStatus::kNumericalLimit;
    if (since_refactor_ >= kRefactorInterval && !refactor()) {
      return LpStatus::kNumericalLimit;
    }
    const auto y = duals();

    // Pricing.
    std::size_t q = total_;
    double best = 0.0;
    double dq = 0.0;
    for (std::size_t j = 0; j < total_; ++j) {
      const VarState s = state_[j];
      if (s == VarState::kBasic || lo_[j] == up_[j]) continue;
      const double d = reduced_cost(j, y);
      const bool eligible = (s == VarState::kAtLower && d < -kLpOptimalityTol) ||
                            (s == VarState::kAtUpper && d > kLpOptimalityTol) ||
                            (s == VarState::kAtZero && std::abs(d) > kLpOptimalityTol);
      if (!eligible) continue;
      if (bland) {
        q = j;
        dq = d;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        q = j;
        dq = d;
      }
    }
    if (q == total_) return LpStatus::kFeasible;
    const double dir = dq < 0 ? 1.0 : -1.0;

    for (std::size_t i = 0; i < m_; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < m_; ++k) s += binv_[i * m_ + k] * col(k, q);
      alpha[i] = s;
    }

    // Ratio test; x_B moves by -step * dir * alpha.
    double step = up_[q] - lo_[q];  // inf unless both bounds are finite
    std::size_t leave = m_;
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = dir * alpha[i];
      if (std::abs(alpha[i]) < kPivotTol) continue;
      const std::size_t v = basis_[i];
      double lim;
      if (a > 0) {
        if (!std::isfinite(lo_[v])) continue;
        lim = std::max(0.0, x_[v] - lo_[v]) / a;
      } else {
        if (!std::isfinite(up_[v])) continue;
        lim = std::max(0.0, up_[v] - x_[v]) / -a;
      }
      bool take = false;
      if (lim < step - kDegenerateStep) {
        take = true;
      } else if (lim <= step + kDegenerateStep && leave < m_) {
        take = bland ? v < basis_[leave] : std::abs(alpha[i]) > std::abs(alpha[leave]);
      } else if (lim <= step && leave == m_) {
        take = true;
      }
      if (take) {
        step = lim;
        leave = i;
      }
    }
    if (!std::isfinite(step)) return LpStatus::kUnbounded;

    x_[q] += dir * step;
    for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] -= step * dir * alpha[i];
    if (leave == m_) {
      state_[q] = dir > 0 ? VarState::kAtUpper : VarState::kAtLower;
      x_[q] = dir > 0 ? up_[q] : lo_[q];
    } else {
      const std::size_t v = basis_[leave];
      const bool to_lower = dir * alpha[leave] > 0;
      state_[v] = to_lower ? VarState::kAtLower : VarState::kAtUpper;
      x_[v] = to_lower ? lo_[v] : up_[v];
      if (lo_[v] == up_[v]) state_[v] = VarState::kAtLower;
      basis_[leave] = q;
      state_[q] = VarState::kBasic;
      const double piv = alpha[leave];
      double* prow = &binv_[leave * m_];
      for (std::size_t k = 0; k < m_; ++k) prow[k] /= piv;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == leave || alpha[i] == 0.0) continue;
        const double f = alpha[i];
        double* row = &binv_[i * m_];
        for (std::size_t k = 0; k < m_; ++k) row[k] -= f * prow[k];
      }
      ++since_refactor_;
    }
    ++pivots;
    ++total_pivots_;
    ++iterations;
    if (step <= kDegenerateStep) {
      if (++degenerate_run > 3 * total_) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
  }
}

LpSolution SimplexSolver::snapshot(LpStatus status, std::size_t pivots) const {
  LpSolution sol;
  sol.status = status;
  sol.pivots = pivots;
  if (status == LpStatus::kFeasible) {
    sol.assignment.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
  }
  return sol;
}

LpSolution SimplexSolver::check_sat() {
  std::size_t pivots = 0;
  if (!phase1_done_) {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) cost_[n_ + i] = 1.0;
    LpStatus st = run(pivots);
    if (st == LpStatus::kFeasible && !refactor()) st = LpStatus::kNumericalLimit;
    phase1_value_ = 0.0;
    for (std::size_t i = 0; i < m_; ++i) phase1_value_ += x_[n_ + i];
    if (st == LpStatus::kFeasible) {
      if (phase1_value_ > kLpFeasibilityTol) {
        st = LpStatus::kInfeasible;
      } else {
        for (std::size_t i = 0; i < m_; ++i) {
          const std::size_t art = n_ + i;
          up_[art] = 0.0;
          if (state_[art] != VarState::kBasic) {
            state_[art] = VarState::kAtLower;
            x_[art] = 0.0;
          }
        }
      }
    }
    phase1_status_ = st;
    phase1_done_ = true;
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (const auto& [j, c] : lp_.objective.terms) cost_[j] += c;
  }
  LpSolution sol = snapshot(phase1_status_, pivots);
  sol.objective_value = phase1_value_;
  return sol;
}

void SimplexSolver::replace_objective(const LinearObjective& objective) {
  lp_.objective = objective;
  lp_.validate();
  if (!phase1_done_) return;
  std::fill(cost_.begin(), cost_.end(), 0.0);
  for (const auto& [j, c] : objective.terms) cost_[j] += c;
}

LpSolution SimplexSolver::solve() {
  LpSolution first = check_sat();
  if (!first.feasible()) {
    first.assignment.clear();
    return first;
  }
  std::size_t pivots = first.pivots;
  LpStatus st = run(pivots);
  if (st == LpStatus::kFeasible && !refactor()) st = LpStatus::kNumericalLimit;
  LpSolution sol = snapshot(st, pivots);
  if (sol.feasible()) sol.objective_value = lp_.objective.evaluate(sol.assignment);
  return sol;
}

LpSolution SimplexSolver::opt_sat(const LinearObjective& objective) {
  replace_objective(objective);
  return solve();
}

bool SimplexSolver::certify_optimality(double tol) const {
  if (!phase1_done_ || phase1_status_ != LpStatus::kFeasible) return false;
  const auto y = duals();
  for (std::size_t j = 0; j < total_; ++j) {
    if (state_[j] == VarState::kBasic || lo_[j] == up_[j]) continue;
    const double d = reduced_cost(j, y);
    if (state_[j] == VarState::kAtLower && d < -tol) return false;
    if (state_[j] == VarState::kAtUpper && d > tol) return false;
    if (state_[j] == VarState::kAtZero && std::abs(d) > tol) return false;
  }
  return true;
}

LpSolution check_sat(const LinearProgram& lp) { return SimplexSolver(lp).check_sat(); }

LpSolution opt_sat(const LinearObjective& objective, const LinearProgram& lp) {
  return SimplexSolver(lp).opt_sat(objective);
}

BoundsMap bounds_of(const LinearProgram& lp) {
  BoundsMap bm(lp.n_vars);
  bm.lower = lp.col_lower;
  bm.upper = lp.col_upper;
  return bm;
}

BoundsMap derive_row_bounds(const LinearProgram& lp, const BoundsMap& bm) {
  if (bm.size() < lp.n_vars) {
    throw std::invalid_argument("derive_row_bounds: bounds do not cover the LP");
  }
  BoundsMap out = bm;
  auto slack = [](double v) { return 1e-12 * (1.0 + std::abs(v)); };
  for (int sweep = 0; sweep < 5 && !out.infeasible; ++sweep) {
    bool changed = false;
    for (const auto& row : lp.rows) {
      // Activity range split into a finite part and a count of infinite terms.
      double min_fin = 0.0, max_fin = 0.0;
      int min_inf = 0, max_inf = 0;
      auto contrib = [&](std::size_t j, double a, bool for_min) {
        const double b = (a > 0) == for_min ? out.lower[j] : out.upper[j];
        return a * b;
      };
      for (const auto& [j, a] : row.terms) {
        if (a == 0.0) continue;
        const double lo = contrib(j, a, true), hi = contrib(j, a, false);
        if (std::isfinite(lo)) min_fin += lo; else ++min_inf;
        if (std::isfinite(hi)) max_fin += hi; else ++max_inf;
      }
      for (const auto& [k, a] : row.terms) {
        if (std::abs(a) < 1e-9) continue;
        const double klo = contrib(k, a, true), khi = contrib(k, a, false);
        const int rmin_inf = min_inf - (std::isfinite(klo) ? 0 : 1);
        const int rmax_inf = max_inf - (std::isfinite(khi) ? 0 : 1);
        const double rest_min = rmin_inf ? -kInf : min_fin - (std::isfinite(klo) ? klo : 0.0);
        const double rest_max = rmax_inf ? kInf : max_fin - (std::isfinite(khi) ? khi : 0.0);
        // a * x_k in [rhs - rest_max, rhs - rest_min]
        double lo = (row.rhs - rest_max) / a;
        double hi = (row.rhs - rest_min) / a;
        if (a < 0) std::swap(lo, hi);
        if (std::isnan(lo)) lo = -kInf;
        if (std::isnan(hi)) hi = kInf;
        lo -= slack(lo);
        hi += slack(hi);
        if (lo > out.lower[k] + kBoundTolerance || hi < out.upper[k] - kBoundTolerance) {
          out.tighten(k, lo, hi);
          changed = true;
          if (out.infeasible) return out;
        }
      }
    }
    if (!changed) break;
  }
  return out;
}

double lp_violation(const LinearProgram& lp, std::span<const double> x) {
  double worst = 0.0;
  for (const auto& row : lp.rows) {
    double s = 0.0;
    for (const auto& [j, a] : row.terms) s += a * x[j];
    worst = std::max(worst, std::abs(s - row.rhs));
  }
  for (std::size_t j = 0; j < lp.n_vars; ++j) {
    worst = std::max(worst, std::max(lp.col_lower[j] - x[j], x[j] - lp.col_upper[j]));
  }
  return worst;
}

void write_lp_format(const LinearProgram& lp, std::ostream& os) {
  auto terms = [&](const SparseTerms& t) {
    if (t.empty()) os << " 0 x0";
    for (const auto& [j, a] : t) os << (a < 0 ? " - " : " + ") << std::abs(a) << " x" << j;
  };
  os << std::setprecision(17) << "\\ soiv LP dump\nMinimize\n obj:";
  terms(lp.objective.terms);
  os << "\nSubject To\n";
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    os << " r" << i << ":";
    terms(lp.rows[i].terms);
    os << " = " << lp.rows[i].rhs << '\n';
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < lp.n_vars; ++j) {
    const double lo = lp.col_lower[j], hi = lp.col_upper[j];
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      os << " x" << j << " free\n";
    } else {
      os << ' ';
      if (std::isfinite(lo)) os << lo; else os << "-inf";
      os << " <= x" << j << " <= ";
      if (std::isfinite(hi)) os << hi; else os << "+inf";
      os << '\n';
    }
  }
  os << "End\n";
}

}  // namespace soiv
