// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SOIV_GENERATE_HPP
#define SOIV_GENERATE_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "soiv/network.hpp"
#include "soiv/query.hpp"
#include "soiv/soi.hpp"

namespace soiv {

struct NetShape {
  std::size_t min_inputs = 2, max_inputs = 4;
  std::size_t min_hidden_layers = 2, max_hidden_layers = 3;
  std::size_t min_relus = 4, max_relus = 12;
  std::size_t outputs = 3;
  double weight_range = 1.0;  // weights and biases ~ U[-w, w]
};

/// Fully connected network with a random shape inside `shape`. Every hidden
/// layer gets at least one neuron.
Network random_network(const NetShape& shape, Rng& rng);

struct Instance {
  std::string name;
  Network net;
  Query query;
  RobustnessSpec spec;
};

/// Targeted robustness instances: x0 ~ U[0,1]^d, true label = argmax at x0,
/// target drawn from the other labels, eps cycling through 0.05, 0.1, 0.3.
std::vector<Instance> robustness_suite(std::size_t count, std::uint64_t seed,
                                       const NetShape& shape = {});

/// Larger balls (eps 0.3 / 0.5) against the runner-up label, filtered with
/// the enumeration oracle so that round(sat_fraction * count) are Sat.
std::vector<Instance> sat_biased_suite(std::size_t count, std::uint64_t seed,
                                       const NetShape& shape = {}, double sat_fraction = 0.7);

struct PlantedInstance {
  Network net;
  Query query;
  std::vector<double> witness;  // full assignment, satisfies phi exactly
};

/// Box around a random x*; the output constraint c . y >= c . y* holds at
/// equality for the forward trace of x*.
PlantedInstance planted_instance(const NetShape& shape, Rng& rng);

/// One-input network whose true label at x0 = 0 is beaten by label 1 somewhere
/// in [-2, 2]. Domain of the returned spec is [-4, 4].
Instance toy_tightening_instance(Rng& rng);

/// Writes <dir>/<name>.nnet and <dir>/<name>.query.json per instance.
void write_suite(const std::string& dir, const std::vector<Instance>& instances);

}  // namespace soiv

#endif  // SOIV_GENERATE_HPP
