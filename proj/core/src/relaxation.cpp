// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "soiv/relaxation.hpp"

#include <cmath>
#include <stdexcept>

namespace soiv {

TriangleCoeffs triangle_coeffs(double l, double u) {
  if (!(l < u)) throw std::invalid_argument("triangle_coeffs: degenerate bounds (l >= u)");
  const double width = u - l;
  return {u / width, -u * l / width};
}

std::vector<double> RelaxationBuild::complete(std::span<const double> alpha) const {
  std::vector<double> x(lp.n_vars, 0.0);
  for (std::size_t i = 0; i < num_problem_vars; ++i) x[i] = alpha[i];
  for (std::size_t s = 0; s < slack_row.size(); ++s) {
    const std::size_t var = num_problem_vars + s;
    const LpRow& row = lp.rows[slack_row[s]];
    double rest = row.rhs;
    double coeff = 0.0;
    for (const auto& [j, a] : row.terms) {
      if (j == var) {
        coeff = a;
      } else {
        rest -= a * x[j];
      }
    }
    x[var] = rest / coeff;
  }
  return x;
}

RelaxationBuild build_relaxation(const ConstraintSystem& cs, const BoundsMap& bm,
                                 const PhaseFixings& fix) {
  if (bm.size() < cs.num_vars() || fix.size() != cs.num_relus()) {
    throw std::invalid_argument("build_relaxation: bounds or fixings do not match");
  }
  RelaxationBuild out;
  LinearProgram& lp = out.lp;
  out.num_problem_vars = cs.num_vars();
  for (std::size_t i = 0; i < cs.num_vars(); ++i) {
    const double lo = std::max(bm.lower[i], cs.box[i].lo);
    double hi = std::min(bm.upper[i], cs.box[i].hi);
    if (lo > hi && lo <= hi + kBoundTolerance) hi = lo;
    lp.add_var(lo, hi);
  }
  auto add_slack = [&](double lo, double hi) {
    out.slack_row.push_back(lp.rows.size());
    return lp.add_var(lo, hi);
  };
  auto clamp = [&](std::size_t v, double lo, double hi) {
    lp.col_lower[v] = std::max(lp.col_lower[v], lo);
    lp.col_upper[v] = std::min(lp.col_upper[v], hi);
    if (lp.col_lower[v] > lp.col_upper[v]) {
      // Crossing by at most the bound tolerance; collapse to a point.
      lp.col_upper[v] = lp.col_lower[v];
    }
  };

  for (const auto& row : cs.affine_rows) lp.add_row(row.terms, row.rhs);

  out.relu_row_index.resize(cs.num_relus());
  for (std::size_t r = 0; r < cs.num_relus(); ++r) {
    const auto [pre, post] = cs.relu_pairs[r];
    ReluRows& rows = out.relu_row_index[r];
    Phase phase = fix[r];
    const double l = lp.col_lower[pre], u = lp.col_upper[pre];
    if (phase == Phase::kFree) {
      if (u <= 0.0) phase = Phase::kInactive;
      else if (l >= 0.0) phase = Phase::kActive;
    }
    switch (phase) {
      case Phase::kInactive:
        clamp(pre, -kInf, 0.0);
        clamp(post, 0.0, 0.0);
        break;
      case Phase::kActive:
        clamp(pre, 0.0, kInf);
        clamp(post, 0.0, kInf);
        rows.active_row = lp.rows.size();
        lp.add_row({{post, 1.0}, {pre, -1.0}}, 0.0);
        break;
      case Phase::kFree: {
        clamp(post, 0.0, kInf);
        rows.lower_row = lp.rows.size();
        const std::size_t s1 = add_slack(0.0, kInf);
        lp.add_row({{post, 1.0}, {pre, -1.0}, {s1, -1.0}}, 0.0);
        if (std::isfinite(l) && std::isfinite(u)) {
          const auto tri = triangle_coeffs(l, u);
          rows.upper_row = lp.rows.size();
          const std::size_t s2 = add_slack(0.0, kInf);
          lp.add_row({{post, 1.0}, {pre, -tri.slope}, {s2, 1.0}}, tri.intercept);
        }
        break;
      }
    }
  }

  for (const auto& c : cs.extra) {
    double lo = -kInf, hi = kInf;
    if (c.sense != Sense::kLe) lo = c.bound;
    if (c.sense != Sense::kGe) hi = c.bound;
    const std::size_t s = add_slack(lo, hi);
    SparseTerms terms = c.terms;
    terms.emplace_back(s, -1.0);
    lp.add_row(std::move(terms), 0.0);
  }
  return out;
}

}  // namespace soiv
