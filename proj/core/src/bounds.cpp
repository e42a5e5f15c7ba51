// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "soiv/bounds.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace soiv {

void BoundsMap::tighten(std::size_t i, double lo, double hi) {
  if (lo > lower[i]) lower[i] = lo;
  if (hi < upper[i]) upper[i] = hi;
  if (lower[i] > upper[i] + kBoundTolerance) {
    infeasible = true;
  } else if (lower[i] > upper[i]) {
    lower[i] = upper[i] = 0.5 * (lower[i] + upper[i]);
  }
}

BoundsMap bounds_from_box(const ConstraintSystem& cs) {
  BoundsMap bm(cs.num_vars());
  for (std::size_t i = 0; i < cs.num_vars(); ++i) {
    bm.lower[i] = cs.box[i].lo;
    bm.upper[i] = cs.box[i].hi;
  }
  return bm;
}

std::size_t count_free(const PhaseFixings& fix) {
  return static_cast<std::size_t>(std::count(fix.begin(), fix.end(), Phase::kFree));
}

namespace {

void check_inputs(const Network& net, const std::vector<Interval>& box,
                  const PhaseFixings& fix) {
  if (box.size() != net.input_dim()) {
    throw std::invalid_argument("bounds: box dimension mismatch");
  }
  if (fix.size() != net.num_relus()) {
    throw std::invalid_argument("bounds: fixings must cover every ReLU");
  }
}

void seed_inputs(const VariableLayout& L, const std::vector<Interval>& box,
                 const BoundsMap* prior, BoundsMap& bm) {
  for (std::size_t i = 0; i < box.size(); ++i) {
    const std::size_t v = L.input(i);
    bm.tighten(v, box[i].lo, box[i].hi);
    if (prior) bm.tighten(v, prior->lower[v], prior->upper[v]);
  }
}

// Applies the phase to a ReLU whose pre bounds are final, then derives the
// post bounds and feeds post-side knowledge back into the pre variable.
void apply_relu(Phase phase, std::size_t pre, std::size_t post,
                const BoundsMap* prior, BoundsMap& bm) {
  if (phase == Phase::kActive) bm.tighten(pre, 0.0, kInf);
  if (phase == Phase::kInactive) bm.tighten(pre, -kInf, 0.0);
  if (bm.infeasible) return;
  const double l = bm.lower[pre];
  const double u = bm.upper[pre];
  if (phase == Phase::kInactive) {
    bm.tighten(post, 0.0, 0.0);
  } else {
    bm.tighten(post, std::max(0.0, l), std::max(0.0, u));
  }
  if (prior) bm.tighten(post, prior->lower[post], prior->upper[post]);
  // post = max(0, pre): pre <= upper(post), and post > 0 forces pre = post.
  bm.tighten(pre, -kInf, bm.upper[post]);
  if (bm.lower[post] > 0.0) bm.tighten(pre, bm.lower[post], kInf);
}

Interval affine_interval(const Layer& layer, std::size_t j,
                         const VariableLayout& L, std::size_t k,
                         const BoundsMap& bm) {
  double lo = layer.biases[j];
  double hi = layer.biases[j];
  const auto w = layer.row(j);
  for (std::size_t i = 0; i < layer.in; ++i) {
    const std::size_t v = L.post(k - 1, i);
    if (w[i] > 0) {
      lo += w[i] * bm.lower[v];
      hi += w[i] * bm.upper[v];
    } else if (w[i] < 0) {
      lo += w[i] * bm.upper[v];
      hi += w[i] * bm.lower[v];
    }
  }
  return {lo, hi};
}

}  // namespace

BoundsMap interval_propagate(const Network& net, const std::vector<Interval>& box,
                             const PhaseFixings& fix, const BoundsMap* prior) {
  check_inputs(net, box, fix);
  const VariableLayout L(net);
  BoundsMap bm(L.num_vars());
  seed_inputs(L, box, prior, bm);
  std::size_t relu = 0;
  for (std::size_t k = 1; k < L.num_layers() && !bm.infeasible; ++k) {
    const Layer& layer = net.layer(k - 1);
    for (std::size_t j = 0; j < layer.out && !bm.infeasible; ++j) {
      const std::size_t pre = L.pre(k, j);
      const Interval iv = affine_interval(layer, j, L, k, bm);
      bm.tighten(pre, iv.lo, iv.hi);
      if (prior) bm.tighten(pre, prior->lower[pre], prior->upper[pre]);
      if (layer.activation == Activation::kRelu) {
        apply_relu(fix[relu], pre, L.post(k, j), prior, bm);
        ++relu;
      }
    }
  }
  return bm;
}

namespace {

// Linear relaxation of one ReLU: lam_l * pre + mu_l <= post <= lam_u * pre + mu_u.
struct ReluRelax {
  double lam_l = 0, mu_l = 0, lam_u = 0, mu_u = 0;
};

ReluRelax relax_relu(double l, double u, Phase phase) {
  if (phase == Phase::kInactive || u <= 0.0) return {};
  if (phase == Phase::kActive || l >= 0.0) return {1.0, 0.0, 1.0, 0.0};
  ReluRelax r;
  r.lam_u = u / (u - l);
  r.mu_u = -u * l / (u - l);
  r.lam_l = -l >= u ? 0.0 : 1.0;
  return r;
}

double concretize(const std::vector<double>& coeffs, double constant,
                  const std::vector<std::size_t>& vars, const BoundsMap& bm,
                  bool upper) {
  double s = constant;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double c = coeffs[i];
    if (c == 0.0) continue;
    const bool use_upper = (c > 0) == upper;
    s += c * (use_upper ? bm.upper[vars[i]] : bm.lower[vars[i]]);
  }
  return s;
}

}  // namespace

BoundsMap back_substitute(const Network& net, const std::vector<Interval>& box,
                          const PhaseFixings& fix, const BoundsMap* prior) {
  check_inputs(net, box, fix);
  const VariableLayout L(net);
  BoundsMap bm(L.num_vars());
  seed_inputs(L, box, prior, bm);

  const std::size_t layers = L.num_layers();
  // Variable ids per layer, for concretization.
  std::vector<std::vector<std::size_t>> pre_ids(layers), post_ids(layers);
  for (std::size_t k = 0; k < layers; ++k) {
    const std::size_t n = k == 0 ? net.input_dim() : net.layer(k - 1).out;
    for (std::size_t j = 0; j < n; ++j) {
      post_ids[k].push_back(L.post(k, j));
      if (k > 0) pre_ids[k].push_back(L.pre(k, j));
    }
  }
  std::vector<std::vector<ReluRelax>> relax(layers);

  std::size_t relu = 0;
  for (std::size_t k = 1; k < layers && !bm.infeasible; ++k) {
    const Layer& layer = net.layer(k - 1);
    for (std::size_t j = 0; j < layer.out && !bm.infeasible; ++j) {
      const std::size_t pre = L.pre(k, j);
      double best_lo = -kInf, best_hi = kInf;
      for (const bool upper : {false, true}) {
        // Expression over post variables of layer m = k - 1.
        std::vector<double> coeffs(layer.row(j).begin(), layer.row(j).end());
        double constant = layer.biases[j];
        double best = upper ? kInf : -kInf;
        auto keep = [&](double v) { best = upper ? std::min(best, v) : std::max(best, v); };
        for (std::size_t m = k - 1;; --m) {
          keep(concretize(coeffs, constant, post_ids[m], bm, upper));
          if (m == 0) break;
          // post_m -> pre_m through the ReLU relaxation.
          std::vector<double> pre_coeffs(coeffs.size());
          for (std::size_t i = 0; i < coeffs.size(); ++i) {
            const double c = coeffs[i];
            const ReluRelax& r = relax[m][i];
            const bool take_upper = (c > 0) == upper;
            pre_coeffs[i] = c * (take_upper ? r.lam_u : r.lam_l);
            constant += c * (take_upper ? r.mu_u : r.mu_l);
          }
          keep(concretize(pre_coeffs, constant, pre_ids[m], bm, upper));
          // pre_m -> post_{m-1} through the affine layer.
          const Layer& prev = net.layer(m - 1);
          std::vector<double> next(prev.in, 0.0);
          for (std::size_t i = 0; i < prev.out; ++i) {
            const double c = pre_coeffs[i];
            if (c == 0.0) continue;
            constant += c * prev.biases[i];
            const auto w = prev.row(i);
            for (std::size_t t = 0; t < prev.in; ++t) next[t] += c * w[t];
          }
          coeffs = std::move(next);
        }
        (upper ? best_hi : best_lo) = best;
      }
      const Interval iv = affine_interval(layer, j, L, k, bm);
      bm.tighten(pre, std::max(best_lo, iv.lo), std::min(best_hi, iv.hi));
      if (prior) bm.tighten(pre, prior->lower[pre], prior->upper[pre]);
      if (layer.activation == Activation::kRelu) {
        apply_relu(fix[relu], pre, L.post(k, j), prior, bm);
        relax[k].push_back(relax_relu(bm.lower[pre], bm.upper[pre], fix[relu]));
        ++relu;
      }
    }
  }
  return bm;
}

PhaseFixings detect_fixed(const VariableLayout& layout, const BoundsMap& bm,
                          const PhaseFixings& current) {
  assert(!bm.infeasible);
  PhaseFixings out = current;
  for (std::size_t r = 0; r < layout.num_relus(); ++r) {
    if (out[r] != Phase::kFree) continue;
    const std::size_t pre = layout.relu_pre(r);
    if (bm.upper[pre] <= 0.0) {
      out[r] = Phase::kInactive;
    } else if (bm.lower[pre] >= 0.0) {
      out[r] = Phase::kActive;
    }
  }
  return out;
}

}  // namespace soiv
