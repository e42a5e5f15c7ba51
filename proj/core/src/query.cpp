// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "soiv/query.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace soiv {

std::string_view to_string(Sense s) {
  switch (s) {
    case Sense::kLe: return "<=";
    case Sense::kGe: return ">=";
    case Sense::kEq: return "=";
  }
  return "?";
}

double LinearConstraint::evaluate(std::span<const double> values) const {
  double s = 0.0;
  for (const auto& [i, c] : terms) s += c * values[i];
  return s;
}

double LinearConstraint::violation(std::span<const double> values) const {
  const double v = evaluate(values);
  switch (sense) {
    case Sense::kLe: return std::max(0.0, v - bound);
    case Sense::kGe: return std::max(0.0, bound - v);
    case Sense::kEq: return std::abs(v - bound);
  }
  return 0.0;
}

Query targeted_robustness_query(const Network& net, const RobustnessSpec& spec) {
  if (spec.x0.size() != net.input_dim()) {
    throw std::invalid_argument("x0 has wrong dimension");
  }
  if (!(spec.eps >= 0.0) || !std::isfinite(spec.eps)) {
    throw std::invalid_argument("eps must be a finite non-negative number");
  }
  if (spec.true_label >= net.output_dim() || spec.target_label >= net.output_dim()) {
    throw std::invalid_argument("label out of range");
  }
  if (spec.true_label == spec.target_label) {
    throw std::invalid_argument("target label must differ from true label");
  }
  Query q;
  for (double x : spec.x0) {
    const double lo = std::max(x - spec.eps, spec.domain.lo);
    const double hi = std::min(x + spec.eps, spec.domain.hi);
    if (lo > hi) throw std::invalid_argument("eps-ball misses the input domain");
    q.input_box.push_back({lo, hi});
  }
  LinearConstraint c;
  c.terms = {{spec.target_label, 1.0}, {spec.true_label, -1.0}};
  c.sense = Sense::kGe;
  c.bound = spec.margin;
  q.output_constraints.push_back(std::move(c));
  return q;
}

void validate_query(const Network& net, const Query& q) {
  if (q.input_box.size() != net.input_dim()) {
    throw std::invalid_argument("input_box has wrong dimension");
  }
  for (const auto& iv : q.input_box) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
      throw std::invalid_argument("input_box entries must be finite with lo <= hi");
    }
  }
  if (q.output_constraints.empty()) {
    throw std::invalid_argument("query needs at least one output constraint");
  }
  for (const auto& c : q.output_constraints) {
    if (c.terms.empty()) throw std::invalid_argument("output constraint has no terms");
    if (!std::isfinite(c.bound)) throw std::invalid_argument("non-finite bound");
    for (const auto& [i, coeff] : c.terms) {
      if (i >= net.output_dim()) throw std::invalid_argument("output index out of range");
      if (!std::isfinite(coeff)) throw std::invalid_argument("non-finite coefficient");
    }
  }
}

namespace {

using nlohmann::json;

Sense parse_sense(const std::string& s) {
  if (s == ">=") return Sense::kGe;
  if (s == "<=") return Sense::kLe;
  if (s == "=" || s == "==") return Sense::kEq;
  throw ParseError("unknown sense '" + s + "'");
}

std::size_t parse_output_name(const std::string& name) {
  if (name.size() < 2 || name[0] != 'y') {
    throw ParseError("output variable must be named y<index>, got '" + name + "'");
  }
  std::size_t idx = 0;
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9') {
      throw ParseError("bad output variable name '" + name + "'");
    }
    idx = idx * 10 + static_cast<std::size_t>(name[i] - '0');
  }
  return idx;
}

double num(const json& j, const char* what) {
  if (!j.is_number()) throw ParseError(std::string("schema: ") + what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(std::string("non-finite ") + what);
  return v;
}

}  // namespace

Query parse_query_json(std::string_view text, const Network& net) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("schema: query must be an object");
  Query q;
  try {
    if (doc.contains("robustness")) {
      const auto& r = doc["robustness"];
      RobustnessSpec spec;
      for (const char* key : {"x0", "eps", "true_label", "target_label"}) {
        if (!r.contains(key)) throw ParseError(std::string("schema: robustness missing \"") + key + "\"");
      }
      for (const auto& x : r["x0"]) spec.x0.push_back(num(x, "x0 entry"));
      spec.eps = num(r["eps"], "eps");
      spec.true_label = r["true_label"].get<std::size_t>();
      spec.target_label = r["target_label"].get<std::size_t>();
      if (r.contains("domain")) {
        spec.domain = {num(r["domain"].at(0), "domain"), num(r["domain"].at(1), "domain")};
      }
      if (r.contains("margin")) spec.margin = num(r["margin"], "margin");
      q = targeted_robustness_query(net, spec);
    } else {
      if (!doc.contains("input_box") || !doc.contains("output_constraints")) {
        throw ParseError("schema: query needs input_box and output_constraints");
      }
      for (const auto& iv : doc["input_box"]) {
        if (!iv.is_array() || iv.size() != 2) throw ParseError("schema: input_box entries are [lo,hi]");
        q.input_box.push_back({num(iv[0], "input_box"), num(iv[1], "input_box")});
      }
      for (const auto& jc : doc["output_constraints"]) {
        LinearConstraint c;
        if (!jc.contains("coeffs") || !jc["coeffs"].is_object()) {
          throw ParseError("schema: output constraint needs a coeffs object");
        }
        for (const auto& [name, v] : jc["coeffs"].items()) {
          c.terms.emplace_back(parse_output_name(name), num(v, "coefficient"));
        }
        std::sort(c.terms.begin(), c.terms.end());
        c.sense = parse_sense(jc.value("sense", std::string(">=")));
        c.bound = num(jc.value("bound", json(0.0)), "bound");
        q.output_constraints.push_back(std::move(c));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("schema: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  try {
    validate_query(net, q);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  return q;
}

std::string serialize_query_json(const Query& q) {
  nlohmann::ordered_json doc;
  doc["input_box"] = nlohmann::ordered_json::array();
  for (const auto& iv : q.input_box) doc["input_box"].push_back({iv.lo, iv.hi});
  doc["output_constraints"] = nlohmann::ordered_json::array();
  for (const auto& c : q.output_constraints) {
    nlohmann::ordered_json jc;
    jc["coeffs"] = nlohmann::ordered_json::object();
    for (const auto& [i, v] : c.terms) jc["coeffs"]["y" + std::to_string(i)] = v;
    jc["sense"] = std::string(to_string(c.sense));
    jc["bound"] = c.bound;
    doc["output_constraints"].push_back(std::move(jc));
  }
  return doc.dump();
}

Query load_query(const std::string& path, const Network& net) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read query file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_query_json(ss.str(), net);
}

VariableLayout::VariableLayout(const Network& net) {
  const std::size_t layers = net.num_layers() + 1;
  pre_.resize(layers);
  post_.resize(layers);
  std::size_t next = 0;
  post_[0].resize(net.input_dim());
  pre_[0].assign(net.input_dim(), kNone);
  for (auto& v : post_[0]) v = next++;
  for (std::size_t k = 1; k < layers; ++k) {
    const std::size_t n = net.layer(k - 1).out;
    const bool relu = net.layer(k - 1).activation == Activation::kRelu;
    pre_[k].resize(n);
    for (auto& v : pre_[k]) v = next++;
    if (relu) {
      post_[k].resize(n);
      for (std::size_t j = 0; j < n; ++j) {
        post_[k][j] = next++;
        relu_pre_.push_back(pre_[k][j]);
        relu_post_.push_back(post_[k][j]);
        relu_layer_.push_back(k);
        relu_neuron_.push_back(j);
      }
    } else {
      // Output neurons: the identity post value is the pre variable itself.
      post_[k] = pre_[k];
    }
  }
  num_vars_ = next;
}

std::vector<double> VariableLayout::assignment(const NeuronValues& v) const {
  std::vector<double> a(num_vars_, 0.0);
  for (std::size_t i = 0; i < post_[0].size(); ++i) a[post_[0][i]] = v.post[0][i];
  for (std::size_t k = 1; k < pre_.size(); ++k) {
    for (std::size_t j = 0; j < pre_[k].size(); ++j) {
      a[pre_[k][j]] = v.pre[k][j];
      a[post_[k][j]] = v.post[k][j];
    }
  }
  return a;
}

ConstraintSystem ConstraintSystem::without_extra() const {
  ConstraintSystem cs = *this;
  cs.extra.clear();
  return cs;
}

ConstraintSystem encode(const Network& net, const Query& q) {
  validate_query(net, q);
  ConstraintSystem cs;
  cs.layout = VariableLayout(net);
  const auto& L = cs.layout;
  cs.box.assign(L.num_vars(), Interval{});
  for (std::size_t i = 0; i < net.input_dim(); ++i) cs.box[L.input(i)] = q.input_box[i];
  for (std::size_t k = 1; k < L.num_layers(); ++k) {
    const Layer& layer = net.layer(k - 1);
    for (std::size_t j = 0; j < layer.out; ++j) {
      AffineRow row;
      row.terms.emplace_back(L.pre(k, j), 1.0);
      const auto w = layer.row(j);
      for (std::size_t i = 0; i < layer.in; ++i) {
        if (w[i] != 0.0) row.terms.emplace_back(L.post(k - 1, i), -w[i]);
      }
      row.rhs = layer.biases[j];
      cs.affine_rows.push_back(std::move(row));
    }
  }
  for (std::size_t r = 0; r < L.num_relus(); ++r) {
    cs.relu_pairs.push_back({L.relu_pre(r), L.relu_post(r)});
  }
  for (const auto& oc : q.output_constraints) {
    LinearConstraint c = oc;
    for (auto& [i, coeff] : c.terms) i = L.output(i);
    cs.extra.push_back(std::move(c));
  }
  return cs;
}

double max_violation(const ConstraintSystem& cs, std::span<const double> alpha) {
  if (alpha.size() < cs.num_vars()) {
    throw std::invalid_argument("assignment misses " +
                                std::to_string(cs.num_vars() - alpha.size()) +
                                " variables");
  }
  double worst = 0.0;
  for (double v : alpha.first(cs.num_vars())) {
    if (!std::isfinite(v)) return kInf;
  }
  for (const auto& row : cs.affine_rows) {
    double s = 0.0;
    for (const auto& [i, c] : row.terms) s += c * alpha[i];
    worst = std::max(worst, std::abs(s - row.rhs));
  }
  for (const auto& p : cs.relu_pairs) {
    worst = std::max(worst, std::abs(alpha[p.post] - std::max(0.0, alpha[p.pre])));
  }
  for (std::size_t i = 0; i < cs.box.size(); ++i) {
    worst = std::max(worst, std::max(cs.box[i].lo - alpha[i], alpha[i] - cs.box[i].hi));
  }
  for (const auto& c : cs.extra) worst = std::max(worst, c.violation(alpha));
  return worst;
}

bool check_assignment(const ConstraintSystem& cs, std::span<const double> alpha,
                      double tol) {
  return max_violation(cs, alpha) <= tol;
}

}  // namespace soiv
