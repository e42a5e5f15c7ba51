// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SOIV_BOUNDS_HPP
#define SOIV_BOUNDS_HPP

#include <cstddef>
#include <vector>

#include "soiv/network.hpp"
#include "soiv/query.hpp"

namespace soiv {

/// Crossing-bounds tolerance, matching the LP feasibility tolerance.
inline constexpr double kBoundTolerance = 1e-9;

struct BoundsMap {
  std::vector<double> lower;
  std::vector<double> upper;
  bool infeasible = false;

  BoundsMap() = default;
  explicit BoundsMap(std::size_t n) : lower(n, -kInf), upper(n, kInf) {}

  std::size_t size() const { return lower.size(); }
  Interval at(std::size_t i) const { return {lower[i], upper[i]}; }
  /// Intersects variable i with [lo, hi]; flags infeasibility on crossing.
  void tighten(std::size_t i, double lo, double hi);
};

/// Builds the initial map from a constraint system's variable box.
BoundsMap bounds_from_box(const ConstraintSystem& cs);

enum class Phase : unsigned char { kFree, kActive, kInactive };

/// Per-ReLU phase status, indexed by ReLU number (topological order).
using PhaseFixings = std::vector<Phase>;

std::size_t count_free(const PhaseFixings& fix);

/// Layer-by-layer interval arithmetic. `prior`, when given, is intersected
/// into every variable as it is computed.
BoundsMap interval_propagate(const Network& net, const std::vector<Interval>& box,
                             const PhaseFixings& fix,
                             const BoundsMap* prior = nullptr);

/// Symbolic back-substitution to the input layer through per-neuron linear
/// ReLU relaxations; the result is intersected with the interval bounds, so
/// it is never looser.
BoundsMap back_substitute(const Network& net, const std::vector<Interval>& box,
                          const PhaseFixings& fix,
                          const BoundsMap* prior = nullptr);

/// Fixes ReLUs whose pre-activation sign is implied by `bm`: l >= 0 -> active,
/// u <= 0 -> inactive (checked first). Existing fixings in `current` are kept.
PhaseFixings detect_fixed(const VariableLayout& layout, const BoundsMap& bm,
                          const PhaseFixings& current);

}  // namespace soiv

#endif  // SOIV_BOUNDS_HPP
