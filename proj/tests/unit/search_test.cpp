// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "soiv/generate.hpp"
#include "soiv/oracle.hpp"
#include "soiv/search.hpp"

namespace soiv {
namespace {

TEST(PseudoImpact, Ema) {
  PseudoImpactTable t(3);
  update_pseudo_impact(t, 0, 4.0, 0.5);
  EXPECT_DOUBLE_EQ(t.score(0), 2.0);
  update_pseudo_impact(t, 0, 2.0, 0.5);
  EXPECT_DOUBLE_EQ(t.score(0), 2.0);
  update_pseudo_impact(t, 1, 1.0, 0.5);
  update_pseudo_impact(t, 1, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(t.score(1), 0.75);
  EXPECT_EQ(t.score(2), 0.0);
}

TEST(PickBranchRelu, Rules) {
  SearchConfig cfg;
  PseudoImpactTable t(6);
  t.update(1, 0.4, 0.5);  // 0.2
  t.update(5, 1.8, 0.5);  // 0.9
  const PhaseFixings fix{Phase::kActive, Phase::kFree, Phase::kFree,
                         Phase::kInactive, Phase::kFree, Phase::kFree};
  EXPECT_EQ(pick_branch_relu(fix, 0, t, cfg), 1u);
  EXPECT_EQ(pick_branch_relu(fix, 2, t, cfg), 1u);
  EXPECT_EQ(pick_branch_relu(fix, 3, t, cfg), 5u);
  const PseudoImpactTable flat(6);
  EXPECT_EQ(pick_branch_relu(fix, 5, flat, cfg), 1u);
  cfg.heuristic = Heuristic::kStaticOrder;
  EXPECT_EQ(pick_branch_relu(fix, 7, t, cfg), 1u);
  EXPECT_THROW(pick_branch_relu(PhaseFixings(2, Phase::kActive), 0, t, cfg), std::logic_error);
}

TEST(Split, ChildrenAndBounds) {
  const Network net = testing::one_relu_net();
  const VariableLayout L(net);
  SearchNode node{{Phase::kFree}, BoundsMap(L.num_vars()), 0};
  node.bounds.tighten(L.relu_pre(0), -1.0, 1.0);
  auto kids = split(node, 0, L);
  EXPECT_EQ(kids[0].fix[0], Phase::kActive);
  EXPECT_EQ(kids[1].fix[0], Phase::kInactive);
  EXPECT_EQ(kids[0].bounds.at(L.relu_pre(0)), (Interval{0.0, 1.0}));
  EXPECT_EQ(kids[1].bounds.at(L.relu_pre(0)), (Interval{-1.0, 0.0}));
  EXPECT_EQ(kids[1].bounds.at(L.relu_post(0)), (Interval{0.0, 0.0}));
  EXPECT_EQ(kids[0].depth, 1u);

  node.bounds.tighten(L.relu_pre(0), 0.2, 1.0);
  kids = split(node, 0, L);
  EXPECT_FALSE(kids[0].bounds.infeasible);
  EXPECT_TRUE(kids[1].bounds.infeasible);
  EXPECT_THROW(split(kids[0], 0, L), std::logic_error);
}

// verdict(node) = verdict(active child) OR verdict(inactive child), and any
// node solution lies inside the matching child's bounds.
TEST(Split, EquisatisfiableOnRandomNodes) {
  Rng rng(42);
  NetShape shape;
  shape.min_relus = 4;
  shape.max_relus = 6;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int sat = 0;
  for (int t = 0; t < 50; ++t) {
    const Network net = random_network(shape, rng);
    Query q;
    for (std::size_t i = 0; i < net.input_dim(); ++i) {
      const double c = u(rng);
      q.input_box.push_back({c - 0.3, c + 0.3});
    }
    q.output_constraints.push_back({{{0, 1.0}, {1, -1.0}}, Sense::kGe, 0.0});
    const ConstraintSystem cs = encode(net, q);
    const PhaseFixings fix(cs.num_relus(), Phase::kFree);
    SearchNode node{fix, interval_propagate(net, q.input_box, fix), 0};
    const std::size_t relu = 0;
    if (node.bounds.lower[cs.layout.relu_pre(relu)] >= 0 ||
        node.bounds.upper[cs.layout.relu_pre(relu)] <= 0) {
      continue;
    }
    const auto kids = split(node, relu, cs.layout);
    const bool parent = enumerate_patterns(cs, node.bounds).result == OracleResult::kSat;
    const bool a = enumerate_patterns(cs, kids[0].bounds).result == OracleResult::kSat;
    const bool b = enumerate_patterns(cs, kids[1].bounds).result == OracleResult::kSat;
    EXPECT_EQ(parent, a || b) << "instance " << t;
    sat += parent;
    for (int s = 0; s < 200; ++s) {
      std::vector<double> x(net.input_dim());
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = q.input_box[i].lo + (q.input_box[i].hi - q.input_box[i].lo) * u(rng);
      }
      const auto alpha = cs.layout.assignment(forward(net, x));
      const SearchNode& kid = alpha[cs.layout.relu_pre(relu)] >= 0 ? kids[0] : kids[1];
      for (std::size_t v = 0; v < cs.num_vars(); ++v) {
        ASSERT_GE(alpha[v], kid.bounds.lower[v] - 1e-9);
        ASSERT_LE(alpha[v], kid.bounds.upper[v] + 1e-9);
      }
    }
  }
  EXPECT_GT(sat, 0);
}

TEST(CompleteSearch, OneReluExamples) {
  const Network net = testing::one_relu_net();
  const Verdict unsat = complete_search(
      net, testing::box_query({{-1.0, 1.0}}, {{{0, 1.0}}, Sense::kLe, -0.1}), {});
  EXPECT_EQ(unsat.result, Result::kUnsat);
  EXPECT_FALSE(unsat.witness);

  const Query q = testing::box_query({{-1.0, 1.0}}, {{{0, 1.0}}, Sense::kGe, 0.5});
  const Verdict sat = complete_search(net, q, {});
  ASSERT_EQ(sat.result, Result::kSat);
  ASSERT_TRUE(sat.witness);
  const ConstraintSystem cs = encode(net, q);
  EXPECT_TRUE(check_assignment(cs, *sat.witness, kWitnessTol));
  EXPECT_GE((*sat.witness)[cs.layout.input(0)], 0.5 - 1e-9);
}

TEST(CompleteSearch, ErgodicInstanceUnsat) {
  for (Strategy s : {Strategy::kMcmc, Strategy::kWalkSat, Strategy::kLpOnly}) {
    SearchConfig cfg;
    cfg.soi.strategy = s;
    const Verdict v = complete_search(testing::ergodic_net(), testing::ergodic_query(), cfg);
    EXPECT_EQ(v.result, Result::kUnsat);
    EXPECT_LE(v.stats.max_depth, 3u);
  }
}

TEST(CompleteSearch, AgreesWithOracleAcrossStrategies) {
  NetShape shape;
  shape.min_relus = 8;
  const auto suite = sat_biased_suite(30, 5, shape, 0.5);
  for (const Instance& in : suite) {
    const bool expect = oracle_verdict(in.net, in.query).result == OracleResult::kSat;
    for (Strategy s : {Strategy::kMcmc, Strategy::kWalkSat, Strategy::kLpOnly}) {
      for (Heuristic h : {Heuristic::kPseudoImpact, Heuristic::kStaticOrder}) {
        SearchConfig cfg;
        cfg.soi.strategy = s;
        cfg.heuristic = h;
        const Verdict v = complete_search(in.net, in.query, cfg);
        ASSERT_TRUE(v.result == Result::kSat || v.result == Result::kUnsat) << in.name;
        EXPECT_EQ(v.result == Result::kSat, expect) << in.name;
        if (v.witness) EXPECT_TRUE(check_assignment(encode(in.net, in.query), *v.witness, kWitnessTol));
        EXPECT_LE(v.stats.max_depth, in.net.num_relus());
      }
    }
  }
}

TEST(CompleteSearch, PerSubtreeTablesAgree) {
  const auto suite = robustness_suite(20, 9);
  for (const Instance& in : suite) {
    SearchConfig a, b;
    b.reset_pseudo_impact_per_subtree = true;
    EXPECT_EQ(complete_search(in.net, in.query, a).result,
              complete_search(in.net, in.query, b).result);
  }
}

TEST(CompleteSearch, LimitsAndTrace) {
  const Network net = testing::ergodic_net();
  const Query q = testing::ergodic_query();
  SearchConfig cfg;
  cfg.soi.strategy = Strategy::kLpOnly;
  cfg.node_limit = 1;
  EXPECT_EQ(complete_search(net, q, cfg).result, Result::kUnknown);

  SearchConfig slow;
  slow.timeout_s = 0.0;
  EXPECT_EQ(complete_search(net, q, slow).result, Result::kTimeout);

  std::atomic<bool> stop{true};
  SearchConfig stopped;
  stopped.stop = &stop;
  EXPECT_EQ(complete_search(net, q, stopped).result, Result::kTimeout);

  std::vector<NodeTrace> traces;
  SearchConfig traced;
  traced.trace = [&](const NodeTrace& t) { traces.push_back(t); };
  const Verdict v = complete_search(net, q, traced);
  EXPECT_EQ(traces.size(), v.stats.nodes);
  EXPECT_EQ(traces.front().depth, 0u);

  SearchConfig bad;
  bad.gamma = 1.0;
  EXPECT_THROW(complete_search(net, q, bad), std::invalid_argument);
}

TEST(CompleteSearch, Deterministic) {
  const auto suite = sat_biased_suite(10, 3);
  for (const Instance& in : suite) {
    SearchConfig cfg;
    cfg.soi.seed = 99;
    const Verdict a = complete_search(in.net, in.query, cfg);
    const Verdict b = complete_search(in.net, in.query, cfg);
    EXPECT_EQ(a.result, b.result);
    EXPECT_EQ(a.witness, b.witness);
    EXPECT_EQ(a.stats.nodes, b.stats.nodes);
    EXPECT_EQ(a.stats.proposals, b.stats.proposals);
    EXPECT_EQ(a.stats.lp_pivots, b.stats.lp_pivots);
  }
}

TEST(PortfolioSearch, FirstDefinitiveWins) {
  const auto suite = sat_biased_suite(6, 8);
  for (const Instance& in : suite) {
    SearchConfig a, b;
    b.heuristic = Heuristic::kStaticOrder;
    b.soi.seed = 1;
    const auto [v, idx] = portfolio_search(in.net, in.query, {a, b});
    EXPECT_LT(idx, 2u);
    EXPECT_EQ(v.result == Result::kSat,
              oracle_verdict(in.net, in.query).result == OracleResult::kSat);
  }
  EXPECT_THROW(portfolio_search(suite[0].net, suite[0].query, {}), std::invalid_argument);
}

}  // namespace
}  // namespace soiv
