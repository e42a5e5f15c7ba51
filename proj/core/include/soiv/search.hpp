// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SOIV_SEARCH_HPP
#define SOIV_SEARCH_HPP

#include <array>
#include <atomic>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "soiv/bounds.hpp"
#include "soiv/network.hpp"
#include "soiv/query.hpp"
#include "soiv/soi.hpp"

namespace soiv {

enum class Heuristic { kPseudoImpact, kStaticOrder };

/// One record per search node, emitted when tracing is enabled.
struct NodeTrace {
  std::size_t depth = 0;
  std::size_t free_relus = 0;
  std::string outcome;
  std::size_t proposals = 0;
  std::optional<std::size_t> branch_relu;
  std::vector<double> cost_trajectory;
};

struct SearchConfig {
  SoiConfig soi;
  double gamma = 0.5;
  std::size_t static_depth = 3;
  Heuristic heuristic = Heuristic::kPseudoImpact;
  double timeout_s = std::numeric_limits<double>::infinity();
  std::size_t node_limit = std::numeric_limits<std::size_t>::max();
  /// Pseudo-impact scores are global by default; with this set every child
  /// subtree starts from a copy of its parent's table instead.
  bool reset_pseudo_impact_per_subtree = false;
  std::function<void(const NodeTrace&)> trace;
  const std::atomic<bool>* stop = nullptr;
};

class PseudoImpactTable {
 public:
  explicit PseudoImpactTable(std::size_t relus = 0) : score_(relus, 0.0) {}
  double score(std::size_t relu) const { return score_[relu]; }
  std::size_t size() const { return score_.size(); }
  /// score := gamma * score + (1 - gamma) * delta
  void update(std::size_t relu, double delta, double gamma);

 private:
  std::vector<double> score_;
};

inline void update_pseudo_impact(PseudoImpactTable& table, std::size_t relu,
                                 double delta, double gamma) {
  table.update(relu, delta, gamma);
}

/// Static (topological) order below `static_depth` or with the static
/// heuristic; otherwise argmax pseudo-impact, ties to the lowest ReLU id.
std::size_t pick_branch_relu(const PhaseFixings& fix, std::size_t depth,
                             const PseudoImpactTable& table, const SearchConfig& cfg);

struct SearchNode {
  PhaseFixings fix;
  BoundsMap bounds;
  std::size_t depth = 0;
};

/// [active child, inactive child]. Each child carries the parent's bounds
/// with the branch sign imposed on the pre variable.
std::array<SearchNode, 2> split(const SearchNode& node, std::size_t relu,
                                const VariableLayout& layout);

enum class Result { kSat, kUnsat, kUnknown, kTimeout };

const char* to_string(Result r);

struct SearchStats {
  std::size_t nodes = 0;
  std::size_t lp_pivots = 0;
  std::size_t proposals = 0;
  std::size_t bound_passes = 0;
  std::size_t max_depth = 0;
  double wall_time_s = 0.0;
};

struct Verdict {
  Result result = Result::kUnknown;
  /// Full assignment over the constraint-system variables.
  std::optional<std::vector<double>> witness;
  SearchStats stats;
};

/// Branch and bound with DeepSoI (or the configured strategy) at each node.
Verdict complete_search(const Network& net, const Query& query, const SearchConfig& cfg);

/// Runs one search per config on its own thread; the first Sat/Unsat wins
/// and cancels the rest. Returns the winning verdict and its config index.
std::pair<Verdict, std::size_t> portfolio_search(const Network& net, const Query& query,
                                                 const std::vector<SearchConfig>& configs);

}  // namespace soiv

#endif  // SOIV_SEARCH_HPP
