// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "soiv/generate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <array>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "soiv/oracle.hpp"

namespace soiv {

namespace {

std::size_t draw(std::size_t lo, std::size_t hi, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Layer random_layer(std::size_t in, std::size_t out, Activation act, double w, Rng& rng) {
  std::uniform_real_distribution<double> u(-w, w);
  Layer l;
  l.in = in;
  l.out = out;
  l.activation = act;
  l.weights.resize(in * out);
  l.biases.resize(out);
  for (double& x : l.weights) x = u(rng);
  for (double& x : l.biases) x = u(rng);
  return l;
}

std::vector<std::size_t> ranked_labels(const std::vector<double>& y) {
  std::vector<std::size_t> idx(y.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return y[a] > y[b]; });
  return idx;
}

Instance make_robustness(std::string name, Network net, std::vector<double> x0, double eps,
                         bool runner_up, Rng& rng) {
  const NeuronValues nv = forward(net, x0);
  const auto rank = ranked_labels(nv.pre.back());
  RobustnessSpec spec;
  spec.x0 = std::move(x0);
  spec.eps = eps;
  spec.true_label = rank[0];
  if (runner_up) {
    spec.target_label = rank[1];
  } else {
    spec.target_label = draw(0, rank.size() - 2, rng);
    if (spec.target_label >= spec.true_label) ++spec.target_label;
  }
  Query q = targeted_robustness_query(net, spec);
  return {std::move(name), std::move(net), std::move(q), std::move(spec)};
}

std::vector<Instance> suite(std::size_t count, std::uint64_t seed, const NetShape& shape,
                            std::span<const double> eps_cycle, bool runner_up,
                            const char* prefix) {
  Rng rng(seed);
  std::vector<Instance> out;
  out.reserve(count);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    Network net = random_network(shape, rng);
    std::vector<double> x0(net.input_dim());
    for (double& x : x0) x = u01(rng);
    char name[32];
    std::snprintf(name, sizeof name, "%s%03zu", prefix, i);
    out.push_back(make_robustness(name, std::move(net), std::move(x0),
                                  eps_cycle[i % eps_cycle.size()], runner_up, rng));
  }
  return out;
}

}  // namespace

Network random_network(const NetShape& shape, Rng& rng) {
  const std::size_t inputs = draw(shape.min_inputs, shape.max_inputs, rng);
  const std::size_t hidden = draw(shape.min_hidden_layers, shape.max_hidden_layers, rng);
  const std::size_t relus = draw(std::max(shape.min_relus, hidden), shape.max_relus, rng);
  std::vector<std::size_t> widths(hidden, 1);
  for (std::size_t k = hidden; k < relus; ++k) ++widths[draw(0, hidden - 1, rng)];
  std::vector<Layer> layers;
  std::size_t in = inputs;
  for (std::size_t w : widths) {
    layers.push_back(random_layer(in, w, Activation::kRelu, shape.weight_range, rng));
    in = w;
  }
  layers.push_back(random_layer(in, shape.outputs, Activation::kIdentity, shape.weight_range, rng));
  return Network(std::move(layers));
}

std::vector<Instance> robustness_suite(std::size_t count, std::uint64_t seed,
                                       const NetShape& shape) {
  static constexpr std::array<double, 3> kEps{0.05, 0.1, 0.3};
  return suite(count, seed, shape, kEps, false, "rob");
}

std::vector<Instance> sat_biased_suite(std::size_t count, std::uint64_t seed,
                                       const NetShape& shape, double sat_fraction) {
  static constexpr std::array<double, 2> kEps{0.3, 0.5};
  const auto want_sat = static_cast<std::size_t>(std::lround(sat_fraction * count));
  std::size_t n_sat = 0, n_unsat = 0;
  std::vector<Instance> out;
  std::uint64_t batch_seed = seed;
  while (out.size() < count) {
    for (Instance& inst : suite(64, batch_seed++, shape, kEps, true, "sat")) {
      const bool sat = oracle_verdict(inst.net, inst.query).result == OracleResult::kSat;
      if (sat ? n_sat >= want_sat : n_unsat >= count - want_sat) continue;
      ++(sat ? n_sat : n_unsat);
      char name[32];
      std::snprintf(name, sizeof name, "sat%03zu", out.size());
      inst.name = name;
      out.push_back(std::move(inst));
      if (out.size() == count) break;
    }
  }
  return out;
}

PlantedInstance planted_instance(const NetShape& shape, Rng& rng) {
  PlantedInstance p;
  p.net = random_network(shape, rng);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::vector<double> x(p.net.input_dim());
  for (double& v : x) v = u01(rng);
  const NeuronValues nv = forward(p.net, x);
  const std::vector<double>& y = nv.pre.back();
  for (double v : x) p.query.input_box.push_back({v - 0.1, v + 0.1});
  LinearConstraint c;
  c.sense = Sense::kGe;
  c.bound = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double a = coeff(rng);
    c.terms.emplace_back(j, a);
    c.bound += a * y[j];
  }
  p.query.output_constraints.push_back(std::move(c));
  p.witness = VariableLayout(p.net).assignment(nv);
  return p;
}

Instance toy_tightening_instance(Rng& rng) {
  NetShape shape;
  shape.min_inputs = shape.max_inputs = 1;
  shape.min_hidden_layers = 1;
  shape.max_hidden_layers = 2;
  shape.min_relus = 4;
  shape.max_relus = 8;
  shape.outputs = 2;
  shape.weight_range = 2.0;
  for (;;) {
    Network net = random_network(shape, rng);
    const std::vector<double> x0{0.0};
    const auto y0 = forward(net, x0).pre.back();
    if (y0[0] - y0[1] < 0.05) continue;
    bool reachable = false;
    for (int k = 0; k <= 400 && !reachable; ++k) {
      const std::vector<double> x{-2.0 + 0.01 * k};
      const auto y = forward(net, x).pre.back();
      reachable = y[1] - y[0] > 0.0;
    }
    if (!reachable) continue;
    RobustnessSpec spec;
    spec.x0 = x0;
    spec.eps = 1.0;
    spec.true_label = 0;
    spec.target_label = 1;
    spec.domain = {-4.0, 4.0};
    Query q = targeted_robustness_query(net, spec);
    return {"toy", std::move(net), std::move(q), std::move(spec)};
  }
}

void write_suite(const std::string& dir, const std::vector<Instance>& instances) {
  std::filesystem::create_directories(dir);
  for (const Instance& inst : instances) {
    const auto base = std::filesystem::path(dir) / inst.name;
    std::ofstream net(base.string() + ".nnet");
    std::ofstream qry(base.string() + ".query.json");
    if (!net || !qry) throw std::runtime_error("write_suite: cannot write " + base.string());
    net << serialize_nnet(inst.net);
    qry << serialize_query_json(inst.query);
  }
}

}  // namespace soiv
