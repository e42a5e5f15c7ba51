// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "soiv/search.hpp"

#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "soiv/lp.hpp"
#include "soiv/relaxation.hpp"

namespace soiv {

void PseudoImpactTable::update(std::size_t relu, double delta, double gamma) {
  if (!std::isfinite(delta)) return;
  score_[relu] = gamma * score_[relu] + (1.0 - gamma) * delta;
}

std::size_t pick_branch_relu(const PhaseFixings& fix, std::size_t depth,
                             const PseudoImpactTable& table, const SearchConfig& cfg) {
  std::size_t first = fix.size();
  for (std::size_t r = 0; r < fix.size(); ++r) {
    if (fix[r] == Phase::kFree) {
      first = r;
      break;
    }
  }
  if (first == fix.size()) throw std::logic_error("pick_branch_relu: no Free ReLU");
  if (cfg.heuristic == Heuristic::kStaticOrder || depth < cfg.static_depth) return first;
  std::size_t best = first;
  for (std::size_t r = first + 1; r < fix.size(); ++r) {
    if (fix[r] == Phase::kFree && table.score(r) > table.score(best)) best = r;
  }
  return best;
}

std::array<SearchNode, 2> split(const SearchNode& node, std::size_t relu,
                                const VariableLayout& layout) {
  if (node.fix.at(relu) != Phase::kFree) throw std::logic_error("split: ReLU is not Free");
  std::array<SearchNode, 2> kids{node, node};
  const std::size_t pre = layout.relu_pre(relu);
  const std::size_t post = layout.relu_post(relu);
  for (auto& k : kids) ++k.depth;
  kids[0].fix[relu] = Phase::kActive;
  kids[0].bounds.tighten(pre, 0.0, kInf);
  kids[0].bounds.tighten(post, 0.0, kInf);
  kids[1].fix[relu] = Phase::kInactive;
  kids[1].bounds.tighten(pre, -kInf, 0.0);
  kids[1].bounds.tighten(post, 0.0, 0.0);
  return kids;
}

const char* to_string(Result r) {
  switch (r) {
    case Result::kSat: return "sat";
    case Result::kUnsat: return "unsat";
    case Result::kUnknown: return "unknown";
    case Result::kTimeout: return "timeout";
  }
  return "?";
}

namespace {

constexpr int kTighteningRounds = 3;

// Prunes (returns false) when the bounds become infeasible.
bool tighten_node(const Network& net, const Query& q, const ConstraintSystem& cs,
                  SearchNode& node, SearchStats& stats) {
  for (int round = 0; round < kTighteningRounds; ++round) {
    ++stats.bound_passes;
    BoundsMap bm = node.depth == 0 ? back_substitute(net, q.input_box, node.fix, &node.bounds)
                                   : interval_propagate(net, q.input_box, node.fix, &node.bounds);
    if (bm.infeasible) return false;
    PhaseFixings fix = detect_fixed(cs.layout, bm, node.fix);
    const RelaxationBuild rel = build_relaxation(cs, bm, fix);
    BoundsMap lp_bm = bounds_of(rel.lp);
    lp_bm = derive_row_bounds(rel.lp, lp_bm);
    if (lp_bm.infeasible) return false;
    for (std::size_t v = 0; v < cs.num_vars(); ++v) bm.tighten(v, lp_bm.lower[v], lp_bm.upper[v]);
    if (bm.infeasible) return false;
    fix = detect_fixed(cs.layout, bm, fix);
    const bool changed = fix != node.fix;
    node.bounds = std::move(bm);
    node.fix = std::move(fix);
    if (!changed) break;
  }
  return true;
}

struct StackEntry {
  SearchNode node;
  std::optional<PseudoImpactTable> table;  // only with per-subtree tables
};

}  // namespace

Verdict complete_search(const Network& net, const Query& query, const SearchConfig& cfg) {
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) {
    throw std::invalid_argument("complete_search: gamma must be in (0, 1)");
  }
  validate_query(net, query);
  const auto t0 = std::chrono::steady_clock::now();
  const ConstraintSystem cs = encode(net, query);
  Verdict v;
  Budget budget;
  budget.stop = cfg.stop;
  if (std::isfinite(cfg.timeout_s)) {
    budget.deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                               std::chrono::duration<double>(cfg.timeout_s));
  }
  auto finish = [&](Result r) {
    v.result = r;
    v.stats.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return v;
  };

  Rng rng(cfg.soi.seed);
  PseudoImpactTable global(cs.num_relus());
  bool incomplete = false;

  std::vector<StackEntry> stack;
  {
    SearchNode root{PhaseFixings(cs.num_relus(), Phase::kFree), bounds_from_box(cs), 0};
    stack.push_back({std::move(root), std::nullopt});
    if (cfg.reset_pseudo_impact_per_subtree) stack.back().table = global;
  }

  while (!stack.empty()) {
    if (budget.exhausted()) return finish(Result::kTimeout);
    if (v.stats.nodes >= cfg.node_limit) return finish(Result::kUnknown);
    StackEntry entry = std::move(stack.back());
    stack.pop_back();
    SearchNode& node = entry.node;
    PseudoImpactTable& table = entry.table ? *entry.table : global;
    ++v.stats.nodes;
    v.stats.max_depth = std::max(v.stats.max_depth, node.depth);

    NodeTrace trace;
    trace.depth = node.depth;
    auto emit = [&](const char* outcome) {
      if (!cfg.trace) return;
      trace.outcome = outcome;
      cfg.trace(trace);
    };

    if (node.bounds.infeasible || !tighten_node(net, query, cs, node, v.stats)) {
      trace.free_relus = count_free(node.fix);
      emit("pruned");
      continue;
    }
    trace.free_relus = count_free(node.fix);

    const SoiOutcome out = deepsoi(cs, node.bounds, node.fix, cfg.soi, rng, budget);
    v.stats.lp_pivots += out.lp_pivots;
    v.stats.proposals += out.proposals;
    trace.proposals = out.proposals;
    trace.cost_trajectory = out.cost_trajectory;
    for (const ImpactEvent& e : out.impact_events) table.update(e.relu, e.delta, cfg.gamma);

    if (out.status == SoiStatus::kSat && out.witness &&
        check_assignment(cs, *out.witness, kWitnessTol)) {
      emit("sat");
      v.witness = out.witness;
      return finish(Result::kSat);
    }
    if (out.status == SoiStatus::kUnsat) {
      emit("unsat");
      continue;
    }
    if (budget.exhausted()) {
      emit("timeout");
      return finish(Result::kTimeout);
    }
    if (count_free(node.fix) == 0) {
      // Exact LP but no certified witness: nothing left to split.
      incomplete = true;
      emit("unknown");
      continue;
    }

    SearchConfig static_cfg;
    static_cfg.heuristic = Heuristic::kStaticOrder;
    const std::size_t relu = out.numerical_limit
                                 ? pick_branch_relu(node.fix, node.depth, table, static_cfg)
                                 : pick_branch_relu(node.fix, node.depth, table, cfg);
    trace.branch_relu = relu;
    emit(out.numerical_limit ? "numerical_limit" : "split");

    auto kids = split(node, relu, cs.layout);
    const bool inactive_first = out.best_pattern.term_of(relu) == Term::kInactive;
    // DFS pops from the back: push the child to explore second first.
    SearchNode& second = inactive_first ? kids[0] : kids[1];
    SearchNode& first = inactive_first ? kids[1] : kids[0];
    std::optional<PseudoImpactTable> kid_table;
    if (entry.table) kid_table = *entry.table;
    stack.push_back({std::move(second), kid_table});
    stack.push_back({std::move(first), kid_table});
  }
  return finish(incomplete ? Result::kUnknown : Result::kUnsat);
}

std::pair<Verdict, std::size_t> portfolio_search(const Network& net, const Query& query,
                                                 const std::vector<SearchConfig>& configs) {
  if (configs.empty()) throw std::invalid_argument("portfolio_search: no configs");
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::vector<Verdict> results(configs.size());
  std::optional<std::size_t> winner;
  std::vector<std::exception_ptr> errors(configs.size());
  {
    std::vector<std::jthread> threads;
    threads.reserve(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
      threads.emplace_back([&, i] {
        SearchConfig cfg = configs[i];
        cfg.stop = &stop;
        try {
          Verdict r = complete_search(net, query, cfg);
          std::lock_guard lock(mu);
          const bool definitive = r.result == Result::kSat || r.result == Result::kUnsat;
          if (definitive && !winner) {
            winner = i;
            stop.store(true);
          }
          results[i] = std::move(r);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
  }
  if (winner) return {std::move(results[*winner]), *winner};
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return {std::move(results[0]), 0};
}

}  // namespace soiv
