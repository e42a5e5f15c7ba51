// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SOIV_NETWORK_HPP
#define SOIV_NETWORK_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace soiv {

/// Thrown by the network and query parsers. `line()` is 0 when the error has
/// no meaningful source line (JSON inputs, structural checks).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class Activation { kRelu, kIdentity };

std::string_view to_string(Activation act);

/// Fully connected layer. `weights` is row-major with `out_size()` rows of
/// `in_size()` entries each.
struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> biases;
  Activation activation = Activation::kRelu;

  std::size_t in_size() const { return in; }
  std::size_t out_size() const { return out; }
  double weight(std::size_t row, std::size_t col) const {
    return weights[row * in + col];
  }
  std::span<const double> row(std::size_t r) const {
    return {weights.data() + r * in, in};
  }

  bool operator==(const Layer&) const = default;
};

/// Feed-forward ReLU network: every hidden layer is ReLU, the last layer is
/// the identity. Immutable once validated.
class Network {
 public:
  Network() = default;
  /// Validates shapes, activations and finiteness; throws ParseError.
  explicit Network(std::vector<Layer> layers);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return layers_.back().out; }
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t num_hidden_layers() const { return layers_.size() - 1; }
  std::size_t num_relus() const;
  const Layer& layer(std::size_t i) const { return layers_[i]; }
  const std::vector<Layer>& layers() const { return layers_; }

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<Layer> layers_;
  std::size_t input_dim_ = 0;
};

/// Pre/post activation values of one evaluation. Index 0 is the input layer
/// (post only); index k >= 1 corresponds to `net.layer(k - 1)`.
struct NeuronValues {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;

  std::span<const double> input() const { return post.front(); }
  std::span<const double> output() const { return post.back(); }
};

NeuronValues forward(const Network& net, std::span<const double> input);

Network parse_nnet(std::string_view text);
Network parse_network_json(std::string_view text);
std::string serialize_nnet(const Network& net);
std::string serialize_network_json(const Network& net);

/// Picks the parser from the extension (".nnet" or ".json").
Network load_network(const std::string& path);

}  // namespace soiv

#endif  // SOIV_NETWORK_HPP
