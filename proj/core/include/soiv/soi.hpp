// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SOIV_SOI_HPP
#define SOIV_SOI_HPP

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "soiv/bounds.hpp"
#include "soiv/lp.hpp"
#include "soiv/query.hpp"

namespace soiv {

using Rng = std::mt19937_64;

/// "cost = 0" test for SoI values.
inline constexpr double kCostZeroTol = 1e-8;
/// Tolerance every reported witness is checked against.
inline constexpr double kWitnessTol = 1e-6;

/// Which error term a Free ReLU contributes: post - pre or post.
enum class Term : unsigned char { kActive, kInactive };

/// One linear piece of the SoI: a term per Free ReLU at the current node.
struct PhasePattern {
  std::vector<std::size_t> relus;  // ReLU ids, topological order
  std::vector<Term> terms;

  std::size_t size() const { return relus.size(); }
  /// Bit i set iff terms[i] is kInactive. Only meaningful for size() <= 64.
  std::uint64_t key() const;
  /// Term assigned to `relu`, if it is covered.
  std::optional<Term> term_of(std::size_t relu) const;
  friend bool operator==(const PhasePattern&, const PhasePattern&) = default;
};

enum class Strategy { kMcmc, kWalkSat, kLpOnly };

struct SoiConfig {
  std::size_t rejection_threshold = 2;  // T
  double beta = 10.0;
  std::uint64_t seed = 0;
  Strategy strategy = Strategy::kMcmc;
  std::size_t visited_tracking_max = 20;
  /// Reset the rejection counter on every accepted move (off by default).
  bool reset_rejections_on_accept = false;
};

struct ImpactEvent {
  std::size_t relu;
  double delta;
};

enum class SoiStatus { kSat, kUnsat, kUnknown };

struct SoiOutcome {
  SoiStatus status = SoiStatus::kUnknown;
  std::optional<std::vector<double>> witness;
  double best_cost = kInf;
  PhasePattern best_pattern;
  std::size_t proposals = 0;
  std::size_t accepts = 0;
  std::size_t rejects = 0;
  std::size_t lp_pivots = 0;
  std::size_t patterns_visited = 0;
  bool numerical_limit = false;
  std::vector<ImpactEvent> impact_events;
  std::vector<double> cost_trajectory;
};

/// Wall-clock and cancellation budget shared by a search.
struct Budget {
  std::optional<std::chrono::steady_clock::time_point> deadline;
  const std::atomic<bool>* stop = nullptr;

  bool exhausted() const {
    if (stop && stop->load(std::memory_order_relaxed)) return true;
    return deadline && std::chrono::steady_clock::now() >= *deadline;
  }
};

/// ReLU error min(post - pre, post).
double vio(double pre, double post);

/// Linear SoI piece for `p` over the constraint-system variables.
LinearObjective soi_objective(const ConstraintSystem& cs, const PhasePattern& p);

/// Pattern induced by the activation pattern of `alpha0` on the Free ReLUs
/// (pre >= 0 -> active term).
PhasePattern initial_phase(const ConstraintSystem& cs, const PhaseFixings& fix,
                           std::span<const double> alpha0);

/// Flips the term of one uniformly chosen Free ReLU. Returns the new pattern
/// and the flipped ReLU id. Throws std::logic_error on an empty pattern.
std::pair<PhasePattern, std::size_t> propose(const PhasePattern& p, Rng& rng);

/// Metropolis acceptance. Non-worsening proposals are accepted without
/// drawing from `rng`.
bool accept(double cost, double new_cost, double beta, Rng& rng);

/// Evaluates cost(f) = min f over the relaxation; NaN signals a solver failure.
using CostEval = std::function<double(const PhasePattern&, std::size_t flipped)>;

struct WalkStep {
  PhasePattern pattern;
  double cost = kInf;
  std::size_t flipped = 0;
  bool improved = false;
  bool failed = false;
  std::size_t evaluations = 0;
};

/// Neighbors are visited in an order drawn with std::shuffle; the first with
/// strictly lower cost is returned. Otherwise a neighbor picked by a uniform
/// index draw is returned (its cost was already evaluated).
WalkStep walksat_step(const PhasePattern& current, double current_cost,
                      const CostEval& cost_eval, Rng& rng);

/// Phase I on the relaxation, then SoI minimization by the configured
/// strategy until cost 0, T rejections, exhausting all patterns, or budget.
SoiOutcome deepsoi(const ConstraintSystem& cs, const BoundsMap& bm,
                   const PhaseFixings& fix, const SoiConfig& cfg, Rng& rng,
                   const Budget& budget = {});

/// Same, with a generator seeded from cfg.seed.
SoiOutcome deepsoi(const ConstraintSystem& cs, const BoundsMap& bm,
                   const PhaseFixings& fix, const SoiConfig& cfg,
                   const Budget& budget = {});

}  // namespace soiv

#endif  // SOIV_SOI_HPP
