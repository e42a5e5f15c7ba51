// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "soiv/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "soiv/lp.hpp"

namespace soiv {

namespace {

// Phase-fixed LP over the constraint-system variables (plus one slack per
// output constraint). `active[r]` selects the phase of ReLU r.
LinearProgram phase_fixed_lp(const ConstraintSystem& cs, const BoundsMap& bm,
                             const std::vector<bool>& active) {
  LinearProgram lp;
  const std::size_t n = cs.num_vars();
  for (std::size_t v = 0; v < n; ++v) {
    lp.add_var(std::max(cs.box[v].lo, bm.lower[v]), std::min(cs.box[v].hi, bm.upper[v]));
  }
  for (const AffineRow& row : cs.affine_rows) lp.add_row(row.terms, row.rhs);
  for (std::size_t r = 0; r < cs.num_relus(); ++r) {
    const ReluPair& rp = cs.relu_pairs[r];
    if (active[r]) {
      lp.col_lower[rp.pre] = std::max(lp.col_lower[rp.pre], 0.0);
      lp.add_row({{rp.post, 1.0}, {rp.pre, -1.0}}, 0.0);
    } else {
      lp.col_upper[rp.pre] = std::min(lp.col_upper[rp.pre], 0.0);
      lp.col_lower[rp.post] = 0.0;
      lp.col_upper[rp.post] = 0.0;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (lp.col_lower[v] > lp.col_upper[v]) return {};  // empty: caller treats as infeasible
  }
  for (const LinearConstraint& c : cs.extra) {
    double lo = -kInf, hi = kInf;
    if (c.sense != Sense::kLe) lo = c.bound;
    if (c.sense != Sense::kGe) hi = c.bound;
    const std::size_t s = lp.add_var(lo, hi);
    SparseTerms t(c.terms.begin(), c.terms.end());
    t.emplace_back(s, -1.0);
    lp.add_row(std::move(t), 0.0);
  }
  return lp;
}

}  // namespace

OracleVerdict enumerate_patterns(const ConstraintSystem& cs, const BoundsMap& bm) {
  if (bm.size() < cs.num_vars()) throw std::invalid_argument("enumerate_patterns: bounds too short");
  std::vector<std::size_t> free;
  std::vector<bool> active(cs.num_relus(), false);
  for (std::size_t r = 0; r < cs.num_relus(); ++r) {
    const Interval pre = bm.at(cs.relu_pairs[r].pre);
    if (pre.hi <= 0.0) active[r] = false;
    else if (pre.lo >= 0.0) active[r] = true;
    else free.push_back(r);
  }
  if (free.size() > kOracleMaxFree) {
    throw std::length_error("enumerate_patterns: too many Free ReLUs");
  }
  OracleVerdict out;
  if (bm.infeasible) {
    out.patterns_checked = std::size_t{1} << free.size();
    return out;
  }
  const std::size_t total = std::size_t{1} << free.size();
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t gray = i ^ (i >> 1);
    for (std::size_t j = 0; j < free.size(); ++j) active[free[j]] = (gray >> j) & 1u;
    ++out.patterns_checked;
    const LinearProgram lp = phase_fixed_lp(cs, bm, active);
    if (lp.n_vars == 0) continue;
    const LpSolution s = check_sat(lp);
    if (s.status == LpStatus::kNumericalLimit) {
      throw std::runtime_error("enumerate_patterns: LP iteration limit");
    }
    if (!s.feasible()) continue;
    std::vector<double> alpha(s.assignment.begin(),
                              s.assignment.begin() + static_cast<std::ptrdiff_t>(cs.num_vars()));
    if (check_assignment(cs, alpha, kWitnessTol)) {
      out.result = OracleResult::kSat;
      out.witness = std::move(alpha);
      return out;
    }
  }
  return out;
}

OracleVerdict oracle_verdict(const Network& net, const Query& q) {
  const ConstraintSystem cs = encode(net, q);
  const PhaseFixings fix(cs.num_relus(), Phase::kFree);
  const BoundsMap bm = interval_propagate(net, q.input_box, fix);
  return enumerate_patterns(cs, bm);
}

std::optional<std::vector<double>> random_falsify(const Network& net, const Query& q,
                                                  std::size_t samples, Rng& rng) {
  for (const Interval& iv : q.input_box) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
      throw std::invalid_argument("random_falsify: unbounded input box");
    }
  }
  const VariableLayout layout(net);
  std::vector<double> x(q.input_box.size());
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::uniform_real_distribution<double> u(q.input_box[i].lo, q.input_box[i].hi);
      x[i] = q.input_box[i].lo == q.input_box[i].hi ? q.input_box[i].lo : u(rng);
    }
    const NeuronValues nv = forward(net, x);
    const std::vector<double>& y = nv.pre.back();
    const bool hit = std::all_of(q.output_constraints.begin(), q.output_constraints.end(),
                                 [&](const LinearConstraint& c) { return c.violation(y) <= 0.0; });
    if (hit) return layout.assignment(nv);
  }
  return std::nullopt;
}

double minimal_attack_eps(const Network& net, RobustnessSpec spec, double hi, double tol) {
  auto sat = [&](double eps) {
    spec.eps = eps;
    return oracle_verdict(net, targeted_robustness_query(net, spec)).result == OracleResult::kSat;
  };
  if (!sat(hi)) return kInf;
  double lo = 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (sat(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace soiv
