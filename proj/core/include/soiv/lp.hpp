// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SOIV_LP_HPP
#define SOIV_LP_HPP

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "soiv/bounds.hpp"

namespace soiv {

/// Feasibility tolerance of linear constraints.
inline constexpr double kLpFeasibilityTol = 1e-9;
/// Reduced-cost tolerance used for pricing.
inline constexpr double kLpOptimalityTol = 1e-9;

using SparseTerms = std::vector<std::pair<std::size_t, double>>;

/// Linear function to minimize.
struct LinearObjective {
  SparseTerms terms;
  double evaluate(std::span<const double> x) const;
  friend bool operator==(const LinearObjective&, const LinearObjective&) = default;
};

struct LpRow {
  SparseTerms terms;
  double rhs = 0.0;
};

/// min objective s.t. rows (sum a_j x_j = rhs) and col_lower <= x <= col_upper.
struct LinearProgram {
  std::size_t n_vars = 0;
  std::vector<double> col_lower;
  std::vector<double> col_upper;
  std::vector<LpRow> rows;
  LinearObjective objective;

  std::size_t add_var(double lo, double hi);
  void add_row(SparseTerms terms, double rhs);
  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

enum class LpStatus { kFeasible, kInfeasible, kUnbounded, kNumericalLimit };

const char* to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> assignment;
  double objective_value = 0.0;
  std::size_t pivots = 0;

  bool feasible() const { return status == LpStatus::kFeasible; }
};

/// Dense revised primal simplex over bounded variables.
///
/// Phase I appends one artificial per row and minimizes their sum; once it
/// reaches zero the artificials are pinned to [0, 0] and stay in the basis
/// bookkeeping, so every later objective is solved from the current basis
/// (warm start). Pricing is Dantzig; after 3 * n consecutive degenerate
/// pivots the solver switches to Bland's rule until it makes progress.
/// Each solve is capped at 50 * (n_vars + n_rows) iterations.
class SimplexSolver {
 public:
  explicit SimplexSolver(LinearProgram lp);

  /// Phase I only. Reuses the result if it already ran.
  LpSolution check_sat();
  /// Replaces the objective and minimizes it from the current basis.
  LpSolution opt_sat(const LinearObjective& objective);
  void replace_objective(const LinearObjective& objective);
  /// Minimizes the current objective (running phase I first if needed).
  LpSolution solve();

  /// Reduced-cost sign conditions at the current basis for the current
  /// objective: >= -tol at lower bounds, <= tol at upper bounds.
  bool certify_optimality(double tol = 1e-8) const;

  const LinearProgram& program() const { return lp_; }
  std::size_t total_pivots() const { return total_pivots_; }

 private:
  enum class VarState : unsigned char { kBasic, kAtLower, kAtUpper, kAtZero };

  void cold_start();
  LpStatus run(std::size_t& pivots);
  bool refactor();
  std::vector<double> duals() const;
  double reduced_cost(std::size_t j, const std::vector<double>& y) const;
  double col(std::size_t row, std::size_t j) const { return a_[j * m_ + row]; }
  LpSolution snapshot(LpStatus status, std::size_t pivots) const;

  LinearProgram lp_;
  std::size_t m_ = 0;      // rows
  std::size_t n_ = 0;      // structural columns
  std::size_t total_ = 0;  // structural + artificial
  std::vector<double> a_;  // column-major m_ x total_
  std::vector<double> lo_, up_, x_, cost_;
  std::vector<VarState> state_;
  std::vector<std::size_t> basis_;
  std::vector<double> binv_;  // row-major m_ x m_
  std::size_t since_refactor_ = 0;
  std::size_t total_pivots_ = 0;
  bool phase1_done_ = false;
  LpStatus phase1_status_ = LpStatus::kInfeasible;
  double phase1_value_ = 0.0;
};

/// Cold solves.
LpSolution check_sat(const LinearProgram& lp);
LpSolution opt_sat(const LinearObjective& objective, const LinearProgram& lp);

/// The column bounds of `lp` as a BoundsMap.
BoundsMap bounds_of(const LinearProgram& lp);

/// Row-implied bound tightening (at most 5 sweeps). `bm` must cover every
/// LP variable; the result never excludes a point satisfying the rows and
/// the input bounds.
BoundsMap derive_row_bounds(const LinearProgram& lp, const BoundsMap& bm);

/// Largest row residual and bound excess of `x`.
double lp_violation(const LinearProgram& lp, std::span<const double> x);

/// CPLEX-style text LP, for debugging.
void write_lp_format(const LinearProgram& lp, std::ostream& os);

}  // namespace soiv

#endif  // SOIV_LP_HPP
