// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "soiv/generate.hpp"
#include "soiv/oracle.hpp"
#include "soiv/query.hpp"
#include "soiv/search.hpp"

namespace soiv {
namespace {

using testing::make_layer;
using testing::one_relu_net;

Network two_output_net() {
  return Network({make_layer({{1.0}, {-1.0}}, {0.0, 0.2}, Activation::kRelu),
                  make_layer({{1.0, 0.0}, {0.0, 1.0}}, {0.0, 0.0}, Activation::kIdentity)});
}

TEST(TargetedRobustness, ClipsToDomain) {
  const Network net = two_output_net();
  RobustnessSpec spec;
  spec.x0 = {0.5};
  spec.eps = 1.0;
  spec.true_label = 0;
  spec.target_label = 1;
  const Query q = targeted_robustness_query(net, spec);
  ASSERT_EQ(q.input_box.size(), 1u);
  EXPECT_EQ(q.input_box[0], (Interval{0.0, 1.0}));
  ASSERT_EQ(q.output_constraints.size(), 1u);
  const LinearConstraint& c = q.output_constraints[0];
  EXPECT_EQ(c.sense, Sense::kGe);
  EXPECT_EQ(c.bound, 0.0);
  const std::vector<double> y{0.3, 0.3};
  EXPECT_EQ(c.violation(y), 0.0);  // ties count as counterexamples
}

TEST(TargetedRobustness, Errors) {
  const Network net = two_output_net();
  RobustnessSpec spec;
  spec.x0 = {0.5};
  spec.eps = 0.1;
  spec.true_label = 1;
  spec.target_label = 1;
  EXPECT_THROW(targeted_robustness_query(net, spec), std::invalid_argument);
  spec.target_label = 2;
  EXPECT_THROW(targeted_robustness_query(net, spec), std::invalid_argument);
  spec.target_label = 0;
  spec.eps = -1.0;
  EXPECT_THROW(targeted_robustness_query(net, spec), std::invalid_argument);
  spec.eps = 0.1;
  spec.x0 = {0.5, 0.5};
  EXPECT_THROW(targeted_robustness_query(net, spec), std::invalid_argument);
}

TEST(TargetedRobustness, ZeroRadiusWithMarginIsUnsat) {
  const Network net = two_output_net();  // y = (ReLU(x), ReLU(0.2 - x))
  RobustnessSpec spec;
  spec.x0 = {0.5};
  spec.eps = 0.0;
  spec.true_label = 0;
  spec.target_label = 1;
  const Verdict v = complete_search(net, targeted_robustness_query(net, spec), {});
  EXPECT_EQ(v.result, Result::kUnsat);
}

TEST(TargetedRobustness, OracleMatchesGridFalsifier) {
  const Network net = two_output_net();
  for (double x0 : {0.05, 0.1, 0.15, 0.5, 0.9}) {
    RobustnessSpec spec;
    spec.x0 = {x0};
    spec.eps = 0.1;
    spec.true_label = 0;
    spec.target_label = 1;
    const Query q = targeted_robustness_query(net, spec);
    bool grid_hit = false;
    for (int k = 0; k <= 1000; ++k) {
      const double x = q.input_box[0].lo + (q.input_box[0].hi - q.input_box[0].lo) * k / 1000.0;
      const auto y = forward(net, std::vector<double>{x}).pre.back();
      grid_hit |= y[1] - y[0] >= 0.0;
    }
    const OracleVerdict o = oracle_verdict(net, q);
    if (grid_hit) EXPECT_EQ(o.result, OracleResult::kSat) << "x0=" << x0;
    if (o.result == OracleResult::kUnsat) EXPECT_FALSE(grid_hit);
  }
}

TEST(QueryJson, ExplicitAndRobustnessForms) {
  const Network net = two_output_net();
  const Query a = parse_query_json(
      R"({"input_box":[[0,1]],"output_constraints":[{"coeffs":{"y0":1,"y1":-1},"sense":">=","bound":0}]})",
      net);
  ASSERT_EQ(a.output_constraints.size(), 1u);
  EXPECT_EQ(a.output_constraints[0].terms.size(), 2u);
  const Query round = parse_query_json(serialize_query_json(a), net);
  EXPECT_EQ(round.input_box, a.input_box);
  EXPECT_EQ(round.output_constraints[0].terms, a.output_constraints[0].terms);

  const Query b = parse_query_json(
      R"({"robustness":{"x0":[0.5],"eps":0.2,"true_label":0,"target_label":1}})", net);
  EXPECT_NEAR(b.input_box[0].lo, 0.3, 1e-15);
  EXPECT_NEAR(b.input_box[0].hi, 0.7, 1e-15);

  EXPECT_THROW(parse_query_json(R"({"input_box":[[0,1]]})", net), ParseError);
  EXPECT_THROW(parse_query_json(
                   R"({"input_box":[[0,1]],"output_constraints":[{"coeffs":{"y7":1},"sense":">=","bound":0}]})",
                   net),
               ParseError);
  EXPECT_THROW(parse_query_json(
                   R"({"input_box":[[0,1]],"output_constraints":[{"coeffs":{"y0":1},"sense":">","bound":0}]})",
                   net),
               ParseError);
}

TEST(Encode, OneReluStructure) {
  const Network net = one_relu_net();
  const Query q = testing::box_query({{-1.0, 1.0}}, {{{0, 1.0}}, Sense::kGe, 0.5});
  const ConstraintSystem cs = encode(net, q);
  EXPECT_EQ(cs.affine_rows.size(), 2u);
  EXPECT_EQ(cs.relu_pairs.size(), 1u);
  EXPECT_EQ(cs.extra.size(), 1u);
  EXPECT_EQ(cs.num_vars(), 4u);  // x, h_pre, h_post, y
}

TEST(Encode, Counting) {
  const Network net({make_layer({{1, 0}, {0, 1}, {1, 1}}, {0, 0, 0}, Activation::kRelu),
                     make_layer({{1, 1, 1}, {1, -1, 0}}, {0, 0}, Activation::kRelu),
                     make_layer({{1, 1}, {0, 1}, {1, 0}, {2, 2}}, {0, 0, 0, 0},
                                Activation::kIdentity)});
  Query q;
  q.input_box = {{0, 1}, {0, 1}};
  q.output_constraints.push_back({{{0, 1.0}}, Sense::kGe, 0.0});
  const ConstraintSystem cs = encode(net, q);
  EXPECT_EQ(cs.relu_pairs.size(), 5u);
  EXPECT_EQ(cs.affine_rows.size(), 5u + 4u);
  EXPECT_EQ(cs.num_vars(), 2u + 2u * 5u + 4u);
}

TEST(CheckAssignment, Basics) {
  const Network net = one_relu_net();
  const Query q = testing::box_query({{-1.0, 1.0}}, {{{0, 1.0}}, Sense::kGe, 0.5});
  const ConstraintSystem cs = encode(net, q);
  const VariableLayout& L = cs.layout;
  const auto at = [&](double x) { return L.assignment(forward(net, std::vector<double>{x})); };
  EXPECT_TRUE(check_assignment(cs, at(0.75), 1e-9));
  EXPECT_FALSE(check_assignment(cs, at(0.25), 1e-9));  // not a counterexample
  EXPECT_FALSE(check_assignment(cs, at(1.5), 1e-9));   // outside the box
  auto bad = at(-0.5);
  bad[L.relu_post(0)] = -0.5;
  bad[L.output(0)] = -0.5;
  EXPECT_FALSE(check_assignment(cs.without_extra(), bad, 1e-9));
  // Exact inputs: tol 0 agrees with 1e-9.
  for (double x : {-1.0, -0.5, 0.0, 0.5, 0.75, 1.0}) {
    EXPECT_EQ(check_assignment(cs, at(x), 0.0), check_assignment(cs, at(x), 1e-9));
  }
  const std::vector<double> short_alpha{0.0};
  EXPECT_THROW(check_assignment(cs, short_alpha, 1e-9), std::invalid_argument);
}

TEST(Encode, SoundOnRandomInputs) {
  Rng rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Network net = random_network({}, rng);
  Query q;
  q.input_box.assign(net.input_dim(), {0.0, 1.0});
  q.output_constraints.push_back({{{0, 1.0}}, Sense::kGe, 0.0});
  const ConstraintSystem cs = encode(net, q).without_extra();
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(net.input_dim());
    for (double& v : x) v = u(rng);
    EXPECT_TRUE(check_assignment(cs, cs.layout.assignment(forward(net, x)), 1e-9));
  }
}

}  // namespace
}  // namespace soiv
