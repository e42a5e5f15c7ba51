// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "soiv/network.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace soiv {

std::string_view to_string(Activation act) {
  return act == Activation::kRelu ? "relu" : "identity";
}

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.size() < 2) {
    throw ParseError("network needs at least one hidden layer");
  }
  input_dim_ = layers_.front().in;
  std::size_t prev = input_dim_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    const std::string where = "layer " + std::to_string(i) + ": ";
    if (l.in == 0 || l.out == 0) throw ParseError(where + "empty layer");
    if (l.in != prev) throw ParseError(where + "dimension mismatch");
    if (l.weights.size() != l.in * l.out || l.biases.size() != l.out) {
      throw ParseError(where + "dimension mismatch");
    }
    const bool last = i + 1 == layers_.size();
    if (last && l.activation != Activation::kIdentity) {
      throw ParseError(where + "output layer must use identity");
    }
    if (!last && l.activation != Activation::kRelu) {
      throw ParseError(where + "hidden layers must use relu");
    }
    for (double w : l.weights) {
      if (!std::isfinite(w)) throw ParseError(where + "non-finite weight");
    }
    for (double b : l.biases) {
      if (!std::isfinite(b)) throw ParseError(where + "non-finite bias");
    }
    prev = l.out;
  }
}

std::size_t Network::num_relus() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) n += layers_[i].out;
  return n;
}

NeuronValues forward(const Network& net, std::span<const double> input) {
  if (input.size() != net.input_dim()) {
    throw std::invalid_argument("forward: input has " +
                                std::to_string(input.size()) +
                                " entries, network expects " +
                                std::to_string(net.input_dim()));
  }
  NeuronValues v;
  v.pre.resize(net.num_layers() + 1);
  v.post.resize(net.num_layers() + 1);
  v.post[0].assign(input.begin(), input.end());
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const Layer& l = net.layer(k);
    const auto& in = v.post[k];
    auto& pre = v.pre[k + 1];
    auto& post = v.post[k + 1];
    pre.resize(l.out);
    post.resize(l.out);
    for (std::size_t r = 0; r < l.out; ++r) {
      double s = l.biases[r];
      const auto w = l.row(r);
      for (std::size_t c = 0; c < l.in; ++c) s += w[c] * in[c];
      pre[r] = s;
      post[r] = l.activation == Activation::kRelu ? std::max(0.0, s) : s;
    }
  }
  return v;
}

namespace {

struct NnetLine {
  std::size_t number;
  std::vector<double> values;
};

double parse_number(std::string_view tok, std::size_t line) {
  std::string s(tok);
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw ParseError("malformed number '" + s + "'", line);
  }
  if (!std::isfinite(v)) throw ParseError("non-finite number '" + s + "'", line);
  return v;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<NnetLine> tokenize_nnet(std::string_view text) {
  std::vector<NnetLine> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++number;
    const auto raw = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (raw.empty() || raw.starts_with("//")) continue;
    NnetLine line{number, {}};
    std::size_t p = 0;
    while (p <= raw.size()) {
      auto comma = raw.find(',', p);
      if (comma == std::string_view::npos) comma = raw.size();
      const auto tok = trim(raw.substr(p, comma - p));
      if (!tok.empty()) line.values.push_back(parse_number(tok, number));
      p = comma + 1;
    }
    if (!line.values.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

std::size_t as_count(double v, std::size_t line, const char* what) {
  if (v < 1 || v != std::floor(v) || v > 1e7) {
    throw ParseError(std::string("invalid ") + what, line);
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

Network parse_nnet(std::string_view text) {
  const auto lines = tokenize_nnet(text);
  if (lines.empty()) throw ParseError("empty nnet input");
  std::size_t cur = 0;
  auto next = [&](const char* what) -> const NnetLine& {
    if (cur >= lines.size()) {
      throw ParseError(std::string("unexpected end of input, expected ") +
                           what,
                       lines.back().number);
    }
    return lines[cur++];
  };

  const NnetLine& header = next("header");
  if (header.values.size() < 4) {
    throw ParseError("header needs numLayers,inputSize,outputSize,maxLayerSize",
                     header.number);
  }
  const std::size_t num_layers = as_count(header.values[0], header.number, "numLayers");
  const std::size_t input_size = as_count(header.values[1], header.number, "inputSize");
  const std::size_t output_size = as_count(header.values[2], header.number, "outputSize");

  const NnetLine& sizes_line = next("layer sizes");
  if (sizes_line.values.size() != num_layers + 1) {
    throw ParseError("layer sizes line must list numLayers + 1 sizes",
                     sizes_line.number);
  }
  std::vector<std::size_t> sizes;
  for (double v : sizes_line.values) {
    sizes.push_back(as_count(v, sizes_line.number, "layer size"));
  }
  if (sizes.front() != input_size || sizes.back() != output_size) {
    throw ParseError("layer sizes disagree with header", sizes_line.number);
  }

  // flag, mins, maxes, means, ranges: normalization metadata, not applied.
  for (const char* what : {"flag line", "input mins", "input maxes",
                           "input means", "input ranges"}) {
    next(what);
  }

  std::vector<Layer> layers;
  for (std::size_t k = 0; k < num_layers; ++k) {
    Layer l;
    l.in = sizes[k];
    l.out = sizes[k + 1];
    l.activation = k + 1 == num_layers ? Activation::kIdentity : Activation::kRelu;
    l.weights.reserve(l.in * l.out);
    for (std::size_t r = 0; r < l.out; ++r) {
      const NnetLine& row = next("weight row");
      if (row.values.size() != l.in) {
        throw ParseError("dimension mismatch: weight row of layer " +
                             std::to_string(k) + " has " +
                             std::to_string(row.values.size()) +
                             " entries, expected " + std::to_string(l.in),
                         row.number);
      }
      l.weights.insert(l.weights.end(), row.values.begin(), row.values.end());
    }
    for (std::size_t r = 0; r < l.out; ++r) {
      const NnetLine& b = next("bias");
      if (b.values.size() != 1) {
        throw ParseError("dimension mismatch: bias line must hold one value",
                         b.number);
      }
      l.biases.push_back(b.values[0]);
    }
    layers.push_back(std::move(l));
  }
  if (cur != lines.size()) {
    throw ParseError("trailing data after last layer", lines[cur].number);
  }
  return Network(std::move(layers));
}

Network parse_network_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array()) {
    throw ParseError("schema: expected object with a \"layers\" array");
  }
  std::vector<Layer> layers;
  for (std::size_t k = 0; k < doc["layers"].size(); ++k) {
    const auto& jl = doc["layers"][k];
    const std::string where = "layer " + std::to_string(k) + ": ";
    for (const char* key : {"weights", "biases", "activation"}) {
      if (!jl.contains(key)) {
        throw ParseError("schema: " + where + "missing \"" + key + "\"");
      }
    }
    Layer l;
    const auto& w = jl["weights"];
    const auto& b = jl["biases"];
    if (!w.is_array() || w.empty() || !b.is_array()) {
      throw ParseError("schema: " + where + "weights/biases must be arrays");
    }
    l.out = w.size();
    l.in = w[0].is_array() ? w[0].size() : 0;
    for (const auto& row : w) {
      if (!row.is_array() || row.size() != l.in) {
        throw ParseError(where + "dimension mismatch in weights");
      }
      for (const auto& x : row) {
        if (!x.is_number()) throw ParseError("schema: " + where + "non-numeric weight");
        l.weights.push_back(x.get<double>());
      }
    }
    for (const auto& x : b) {
      if (!x.is_number()) throw ParseError("schema: " + where + "non-numeric bias");
      l.biases.push_back(x.get<double>());
    }
    const auto& act = jl["activation"];
    if (!act.is_string()) throw ParseError("schema: " + where + "activation must be a string");
    const auto name = act.get<std::string>();
    if (name == "relu") {
      l.activation = Activation::kRelu;
    } else if (name == "identity") {
      l.activation = Activation::kIdentity;
    } else {
      throw ParseError(where + "unsupported activation '" + name + "'");
    }
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers));
}

std::string serialize_nnet(const Network& net) {
  std::ostringstream os;
  os << std::setprecision(17);
  std::size_t max_size = net.input_dim();
  for (const auto& l : net.layers()) max_size = std::max(max_size, l.out);
  os << "// soiv export\n";
  os << net.num_layers() << ',' << net.input_dim() << ',' << net.output_dim()
     << ',' << max_size << ",\n";
  os << net.input_dim() << ',';
  for (const auto& l : net.layers()) os << l.out << ',';
  os << "\n0,\n";
  auto repeat = [&](const char* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) os << v << ',';
    os << '\n';
  };
  repeat("0", net.input_dim());
  repeat("1", net.input_dim());
  repeat("0", net.input_dim() + 1);
  repeat("1", net.input_dim() + 1);
  for (const auto& l : net.layers()) {
    for (std::size_t r = 0; r < l.out; ++r) {
      for (double w : l.row(r)) os << w << ',';
      os << '\n';
    }
    for (double b : l.biases) os << b << ",\n";
  }
  return os.str();
}

std::string serialize_network_json(const Network& net) {
  nlohmann::ordered_json doc;
  doc["layers"] = nlohmann::ordered_json::array();
  for (const auto& l : net.layers()) {
    nlohmann::ordered_json jl;
    jl["weights"] = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < l.out; ++r) {
      auto row = l.row(r);
      jl["weights"].push_back(std::vector<double>(row.begin(), row.end()));
    }
    jl["biases"] = l.biases;
    jl["activation"] = std::string(to_string(l.activation));
    doc["layers"].push_back(std::move(jl));
  }
  return doc.dump();
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read network file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  if (path.ends_with(".nnet")) return parse_nnet(ss.str());
  return parse_network_json(ss.str());
}

}  // namespace soiv
