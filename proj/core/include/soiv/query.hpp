// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SOIV_QUERY_HPP
#define SOIV_QUERY_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "soiv/network.hpp"

namespace soiv {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = -kInf;
  double hi = kInf;
  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Sense { kLe, kGe, kEq };

std::string_view to_string(Sense s);

/// sum(coeff * var) <sense> bound. In a Query the indices refer to output
/// neurons; in a ConstraintSystem they refer to variables.
struct LinearConstraint {
  std::vector<std::pair<std::size_t, double>> terms;
  Sense sense = Sense::kGe;
  double bound = 0.0;

  double evaluate(std::span<const double> values) const;
  /// Signed amount by which `values` misses the constraint (0 if satisfied).
  double violation(std::span<const double> values) const;
};

/// P_in is the input box; the conjunction of output constraints encodes the
/// negated output property, so any input satisfying all of them is a
/// counterexample.
struct Query {
  std::vector<Interval> input_box;
  std::vector<LinearConstraint> output_constraints;
};

struct RobustnessSpec {
  std::vector<double> x0;
  double eps = 0.0;
  std::size_t true_label = 0;
  std::size_t target_label = 0;
  Interval domain{0.0, 1.0};
  double margin = 0.0;
};

/// Targeted l-infinity robustness: the box is the eps-ball around x0 clipped
/// to `domain`; the counterexample condition is y_target - y_true >= margin.
Query targeted_robustness_query(const Network& net, const RobustnessSpec& spec);

/// Throws std::invalid_argument on shape or sanity violations.
void validate_query(const Network& net, const Query& q);

/// Query JSON (explicit or "robustness" convenience form).
Query parse_query_json(std::string_view text, const Network& net);
std::string serialize_query_json(const Query& q);
Query load_query(const std::string& path, const Network& net);

/// Variable numbering of the exact constraint system. Inputs carry only a
/// post variable, output neurons only a pre variable; hidden neurons carry
/// both. ReLUs are numbered in topological (layer, neuron) order.
class VariableLayout {
 public:
  VariableLayout() = default;
  explicit VariableLayout(const Network& net);

  std::size_t num_vars() const { return num_vars_; }
  std::size_t num_relus() const { return relu_pre_.size(); }
  /// Layers indexed as in NeuronValues: 0 is the input layer.
  std::size_t num_layers() const { return pre_.size(); }
  std::size_t pre(std::size_t layer, std::size_t neuron) const {
    return pre_[layer][neuron];
  }
  std::size_t post(std::size_t layer, std::size_t neuron) const {
    return post_[layer][neuron];
  }
  std::size_t input(std::size_t i) const { return post_[0][i]; }
  std::size_t output(std::size_t i) const { return pre_.back()[i]; }
  std::size_t relu_pre(std::size_t r) const { return relu_pre_[r]; }
  std::size_t relu_post(std::size_t r) const { return relu_post_[r]; }
  std::size_t relu_layer(std::size_t r) const { return relu_layer_[r]; }
  std::size_t relu_neuron(std::size_t r) const { return relu_neuron_[r]; }
  std::size_t input_dim() const { return post_[0].size(); }
  std::size_t output_dim() const { return pre_.back().size(); }

  /// Flattens forward() values into an assignment indexed by variable.
  std::vector<double> assignment(const NeuronValues& v) const;

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::vector<std::size_t>> pre_;
  std::vector<std::vector<std::size_t>> post_;
  std::vector<std::size_t> relu_pre_, relu_post_, relu_layer_, relu_neuron_;
  std::size_t num_vars_ = 0;
};

/// n^b = bias + sum w * n^a, stored as sum(coeff * var) = rhs.
struct AffineRow {
  std::vector<std::pair<std::size_t, double>> terms;
  double rhs = 0.0;
};

struct ReluPair {
  std::size_t pre;
  std::size_t post;
};

/// The exact query phi: affine rows, ReLU pairs, variable box and the query's
/// output constraints rewritten over variables.
struct ConstraintSystem {
  VariableLayout layout;
  std::vector<AffineRow> affine_rows;
  std::vector<ReluPair> relu_pairs;
  std::vector<Interval> box;
  std::vector<LinearConstraint> extra;

  std::size_t num_vars() const { return layout.num_vars(); }
  std::size_t num_relus() const { return relu_pairs.size(); }
  /// A copy without the query's output constraints.
  ConstraintSystem without_extra() const;
};

ConstraintSystem encode(const Network& net, const Query& q);

/// alpha |= phi within `tol` (rows, ReLU graph, box, extra constraints).
/// Throws std::invalid_argument if alpha does not cover every variable.
bool check_assignment(const ConstraintSystem& cs, std::span<const double> alpha,
                      double tol);

/// Largest absolute violation across all constraint groups (0 if exact).
double max_violation(const ConstraintSystem& cs, std::span<const double> alpha);

}  // namespace soiv

#endif  // SOIV_QUERY_HPP
