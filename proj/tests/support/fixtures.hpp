// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SOIV_TESTS_FIXTURES_HPP
#define SOIV_TESTS_FIXTURES_HPP

#include <vector>

#include "soiv/network.hpp"
#include "soiv/query.hpp"

namespace soiv::testing {

inline Layer make_layer(std::vector<std::vector<double>> w, std::vector<double> b, Activation act) {
  Layer l;
  l.out = w.size();
  l.in = w.empty() ? 0 : w[0].size();
  for (const auto& row : w) l.weights.insert(l.weights.end(), row.begin(), row.end());
  l.biases = std::move(b);
  l.activation = act;
  return l;
}

/// y = ReLU(x)
inline Network one_relu_net() {
  return Network({make_layer({{1.0}}, {0.0}, Activation::kRelu),
                  make_layer({{1.0}}, {0.0}, Activation::kIdentity)});
}

/// y = ReLU(x) - ReLU(-x)
inline Network abs_split_net() {
  return Network({make_layer({{1.0}, {-1.0}}, {0.0, 0.0}, Activation::kRelu),
                  make_layer({{1.0, -1.0}}, {0.0}, Activation::kIdentity)});
}

/// Inputs (x, z) in [-1, 1]^2; h = (ReLU(x), ReLU(-x), ReLU(z));
/// y1 = h1 + h2 = |x|, y2 = h1 - h2 = x. The query y1 >= 0.5, |y2| <= 0.25
/// is Unsat, while its triangle relaxation is feasible with 3 Free ReLUs.
inline Network ergodic_net() {
  return Network({make_layer({{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}}, {0.0, 0.0, 0.0},
                             Activation::kRelu),
                  make_layer({{1.0, 1.0, 0.0}, {1.0, -1.0, 0.0}}, {0.0, 0.0},
                             Activation::kIdentity)});
}

inline Query ergodic_query() {
  Query q;
  q.input_box = {{-1.0, 1.0}, {-1.0, 1.0}};
  q.output_constraints = {
      {{{0, 1.0}}, Sense::kGe, 0.5},
      {{{1, 1.0}}, Sense::kLe, 0.25},
      {{{1, 1.0}}, Sense::kGe, -0.25},
  };
  return q;
}

inline Query box_query(std::vector<Interval> box, LinearConstraint c) {
  Query q;
  q.input_box = std::move(box);
  q.output_constraints.push_back(std::move(c));
  return q;
}

}  // namespace soiv::testing

#endif  // SOIV_TESTS_FIXTURES_HPP
