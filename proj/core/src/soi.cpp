// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "soiv/soi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "soiv/relaxation.hpp"

namespace soiv {

std::uint64_t PhasePattern::key() const {
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < terms.size() && i < 64; ++i) {
    if (terms[i] == Term::kInactive) k |= std::uint64_t{1} << i;
  }
  return k;
}

std::optional<Term> PhasePattern::term_of(std::size_t relu) const {
  const auto it = std::lower_bound(relus.begin(), relus.end(), relu);
  if (it == relus.end() || *it != relu) return std::nullopt;
  return terms[static_cast<std::size_t>(it - relus.begin())];
}

double vio(double pre, double post) { return std::min(post - pre, post); }

LinearObjective soi_objective(const ConstraintSystem& cs, const PhasePattern& p) {
  LinearObjective obj;
  obj.terms.reserve(2 * p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const ReluPair& rp = cs.relu_pairs[p.relus[i]];
    obj.terms.emplace_back(rp.post, 1.0);
    if (p.terms[i] == Term::kActive) obj.terms.emplace_back(rp.pre, -1.0);
  }
  return obj;
}

PhasePattern initial_phase(const ConstraintSystem& cs, const PhaseFixings& fix,
                           std::span<const double> alpha0) {
  PhasePattern p;
  for (std::size_t r = 0; r < fix.size(); ++r) {
    if (fix[r] != Phase::kFree) continue;
    p.relus.push_back(r);
    p.terms.push_back(alpha0[cs.relu_pairs[r].pre] >= 0.0 ? Term::kActive
                                                           : Term::kInactive);
  }
  return p;
}

std::pair<PhasePattern, std::size_t> propose(const PhasePattern& p, Rng& rng) {
  if (p.size() == 0) throw std::logic_error("propose: no Free ReLUs");
  std::uniform_int_distribution<std::size_t> pick(0, p.size() - 1);
  const std::size_t i = pick(rng);
  PhasePattern next = p;
  next.terms[i] = next.terms[i] == Term::kActive ? Term::kInactive : Term::kActive;
  return {std::move(next), p.relus[i]};
}

bool accept(double cost, double new_cost, double beta, Rng& rng) {
  if (new_cost <= cost) return true;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < std::exp(-beta * (new_cost - cost));
}

WalkStep walksat_step(const PhasePattern& current, double current_cost,
                      const CostEval& cost_eval, Rng& rng) {
  if (current.size() == 0) throw std::logic_error("walksat_step: no Free ReLUs");
  std::vector<std::size_t> order(current.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> costs(current.size(), kInf);
  WalkStep step;
  auto neighbor = [&](std::size_t i) {
    PhasePattern n = current;
    n.terms[i] = n.terms[i] == Term::kActive ? Term::kInactive : Term::kActive;
    return n;
  };
  for (std::size_t i : order) {
    PhasePattern n = neighbor(i);
    const double c = cost_eval(n, current.relus[i]);
    ++step.evaluations;
    if (std::isnan(c)) {
      step.failed = true;
      return step;
    }
    costs[i] = c;
    if (c < current_cost) {
      step.pattern = std::move(n);
      step.cost = c;
      step.flipped = current.relus[i];
      step.improved = true;
      return step;
    }
  }
  std::uniform_int_distribution<std::size_t> pick(0, current.size() - 1);
  const std::size_t i = pick(rng);
  step.pattern = neighbor(i);
  step.cost = costs[i];
  step.flipped = current.relus[i];
  return step;
}

namespace {

std::vector<double> problem_part(const std::vector<double>& x, std::size_t n) {
  return {x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace

SoiOutcome deepsoi(const ConstraintSystem& cs, const BoundsMap& bm,
                   const PhaseFixings& fix, const SoiConfig& cfg, Rng& rng,
                   const Budget& budget) {
  if (cfg.rejection_threshold < 1) throw std::invalid_argument("deepsoi: T must be >= 1");
  if (!(cfg.beta > 0.0)) throw std::invalid_argument("deepsoi: beta must be > 0");
  SoiOutcome out;
  const RelaxationBuild rel = build_relaxation(cs, bm, fix);
  SimplexSolver solver(rel.lp);

  // Phase I.
  const LpSolution p1 = solver.check_sat();
  out.lp_pivots += p1.pivots;
  if (p1.status == LpStatus::kNumericalLimit) {
    out.numerical_limit = true;
    return out;
  }
  if (!p1.feasible()) {
    out.status = SoiStatus::kUnsat;
    return out;
  }
  const auto alpha0 = problem_part(p1.assignment, cs.num_vars());
  PhasePattern f = initial_phase(cs, fix, alpha0);
  out.best_pattern = f;
  if (check_assignment(cs, alpha0, kCostZeroTol)) {
    out.status = SoiStatus::kSat;
    out.best_cost = 0.0;
    out.witness = alpha0;
    return out;
  }
  if (cfg.strategy == Strategy::kLpOnly || f.size() == 0) return out;

  // Phase II.
  const bool tracking = f.size() <= std::min<std::size_t>(cfg.visited_tracking_max, 63);
  const std::uint64_t all_patterns = tracking ? std::uint64_t{1} << f.size() : 0;
  std::unordered_set<std::uint64_t> visited;
  auto all_visited = [&] { return tracking && visited.size() == all_patterns; };

  std::vector<double> last_alpha;
  auto evaluate = [&](const PhasePattern& p) -> double {
    const LpSolution s = solver.opt_sat(soi_objective(cs, p));
    out.lp_pivots += s.pivots;
    if (!s.feasible()) return std::numeric_limits<double>::quiet_NaN();
    if (tracking) visited.insert(p.key());
    last_alpha = problem_part(s.assignment, cs.num_vars());
    if (s.objective_value < out.best_cost) {
      out.best_cost = s.objective_value;
      out.best_pattern = p;
    }
    return s.objective_value;
  };

  double c = evaluate(f);
  if (std::isnan(c)) {
    out.numerical_limit = true;
    return out;
  }
  std::vector<double> alpha = last_alpha;
  out.cost_trajectory.push_back(c);
  std::size_t k = 0;

  if (cfg.strategy == Strategy::kMcmc) {
    while (c > kCostZeroTol && !all_visited() && k < cfg.rejection_threshold &&
           !budget.exhausted()) {
      auto [next, flipped] = propose(f, rng);
      ++out.proposals;
      const double c_next = evaluate(next);
      if (std::isnan(c_next)) {
        out.numerical_limit = true;
        return out;
      }
      out.impact_events.push_back({flipped, std::abs(c - c_next)});
      if (accept(c, c_next, cfg.beta, rng)) {
        ++out.accepts;
        f = std::move(next);
        c = c_next;
        alpha = last_alpha;
        if (cfg.reset_rejections_on_accept) k = 0;
      } else {
        ++out.rejects;
        ++k;
      }
      out.cost_trajectory.push_back(c);
    }
  } else {
    const CostEval eval = [&](const PhasePattern& p, std::size_t relu) {
      const double cp = evaluate(p);
      if (!std::isnan(cp)) out.impact_events.push_back({relu, std::abs(c - cp)});
      return cp;
    };
    while (c > kCostZeroTol && !all_visited() && k < cfg.rejection_threshold &&
           !budget.exhausted()) {
      WalkStep step = walksat_step(f, c, eval, rng);
      out.proposals += step.evaluations;
      if (step.failed) {
        out.numerical_limit = true;
        return out;
      }
      if (step.improved) {
        ++out.accepts;
        if (cfg.reset_rejections_on_accept) k = 0;
      } else {
        ++out.rejects;
        ++k;
      }
      f = std::move(step.pattern);
      c = step.cost;
      // The LP solution of the returned neighbor is not the last one solved
      // unless it was the improving move; re-solve to recover it.
      if (!step.improved) {
        const double again = evaluate(f);
        if (std::isnan(again)) {
          out.numerical_limit = true;
          return out;
        }
        c = again;
      }
      alpha = last_alpha;
      out.cost_trajectory.push_back(c);
    }
  }

  out.patterns_visited = visited.size();
  if (c <= kCostZeroTol) {
    if (check_assignment(cs, alpha, kWitnessTol)) {
      out.status = SoiStatus::kSat;
      out.witness = std::move(alpha);
      out.best_cost = 0.0;
    } else {
      out.numerical_limit = true;
    }
    return out;
  }
  if (all_visited()) out.status = SoiStatus::kUnsat;
  return out;
}

SoiOutcome deepsoi(const ConstraintSystem& cs, const BoundsMap& bm,
                   const PhaseFixings& fix, const SoiConfig& cfg,
                   const Budget& budget) {
  Rng rng(cfg.seed);
  return deepsoi(cs, bm, fix, cfg, rng, budget);
}

}  // namespace soiv
