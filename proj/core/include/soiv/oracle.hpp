// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SOIV_ORACLE_HPP
#define SOIV_ORACLE_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "soiv/bounds.hpp"
#include "soiv/network.hpp"
#include "soiv/query.hpp"
#include "soiv/soi.hpp"

namespace soiv {

inline constexpr std::size_t kOracleMaxFree = 20;

enum class OracleResult { kSat, kUnsat };

struct OracleVerdict {
  OracleResult result = OracleResult::kUnsat;
  std::optional<std::vector<double>> witness;
  std::size_t patterns_checked = 0;
};

/// Exhaustive check: one phase-fixed LP per activation pattern of the ReLUs
/// left Free by `bm` (l < 0 < u), visited in Gray-code order. ReLUs whose
/// sign `bm` implies are fixed. Throws std::length_error above
/// kOracleMaxFree Free ReLUs.
OracleVerdict enumerate_patterns(const ConstraintSystem& cs, const BoundsMap& bm);

/// Convenience: encode, interval bounds, enumerate.
OracleVerdict oracle_verdict(const Network& net, const Query& q);

/// Uniform samples from the input box; returns the full assignment of the
/// first one whose outputs meet every output constraint. Throws
/// std::invalid_argument on an unbounded box.
std::optional<std::vector<double>> random_falsify(const Network& net, const Query& q,
                                                  std::size_t samples, Rng& rng);

/// Smallest eps at which the targeted query of `spec` is Sat, by bisection
/// on [0, hi] with the enumeration oracle. Returns the Sat end of the final
/// bracket (never below the true value), or +inf when Unsat at `hi`.
double minimal_attack_eps(const Network& net, RobustnessSpec spec, double hi, double tol);

}  // namespace soiv

#endif  // SOIV_ORACLE_HPP
