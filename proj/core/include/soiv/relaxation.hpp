// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SOIV_RELAXATION_HPP
#define SOIV_RELAXATION_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "soiv/bounds.hpp"
#include "soiv/lp.hpp"
#include "soiv/query.hpp"

namespace soiv {

struct TriangleCoeffs {
  double slope;
  double intercept;
};

/// Upper face of the triangle: post <= slope * pre + intercept, for l < u.
/// Throws std::invalid_argument when l >= u.
TriangleCoeffs triangle_coeffs(double l, double u);

/// Rows owned by one ReLU inside the relaxation LP. Unused slots hold kNoRow.
struct ReluRows {
  static constexpr std::size_t kNoRow = static_cast<std::size_t>(-1);
  std::size_t lower_row = kNoRow;  // post - pre - s1 = 0, s1 >= 0
  std::size_t upper_row = kNoRow;  // post - slope * pre + s2 = intercept, s2 >= 0
  std::size_t active_row = kNoRow; // post - pre = 0
};

/// LP variables 0..cs.num_vars()-1 coincide with the constraint-system
/// variables; slack variables follow.
struct RelaxationBuild {
  LinearProgram lp;
  std::vector<ReluRows> relu_row_index;
  std::size_t num_problem_vars = 0;
  /// For each slack variable (offset by num_problem_vars), the row defining it.
  std::vector<std::size_t> slack_row;

  /// Extends an assignment of the problem variables with the slack values
  /// that make every row hold.
  std::vector<double> complete(std::span<const double> alpha) const;
};

/// Planet relaxation over the bounds in `bm`: Free ReLUs get the triangle,
/// active ones post = pre with pre >= 0, inactive ones post = 0 with pre <= 0.
RelaxationBuild build_relaxation(const ConstraintSystem& cs, const BoundsMap& bm,
                                 const PhaseFixings& fix);

}  // namespace soiv

#endif  // SOIV_RELAXATION_HPP
