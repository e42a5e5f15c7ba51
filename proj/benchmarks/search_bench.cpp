// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "soiv/generate.hpp"
#include "soiv/oracle.hpp"
#include "soiv/search.hpp"

namespace soiv {
namespace {

std::vector<Instance> bench_suite() {
  NetShape shape;
  shape.min_relus = 8;
  return sat_biased_suite(20, 5, shape);
}

// range(0): strategy, range(1): heuristic.
void BM_CompleteSearch(benchmark::State& state) {
  const auto suite = bench_suite();
  SearchConfig cfg;
  cfg.soi.strategy = static_cast<Strategy>(state.range(0));
  cfg.heuristic = static_cast<Heuristic>(state.range(1));
  std::size_t nodes = 0, runs = 0;
  for (auto _ : state) {
    for (const Instance& inst : suite) {
      nodes += complete_search(inst.net, inst.query, cfg).stats.nodes;
      ++runs;
    }
  }
  state.counters["nodes/instance"] = static_cast<double>(nodes) / static_cast<double>(runs);
}
BENCHMARK(BM_CompleteSearch)
    ->ArgsProduct({{static_cast<int>(Strategy::kMcmc), static_cast<int>(Strategy::kWalkSat),
                    static_cast<int>(Strategy::kLpOnly)},
                   {static_cast<int>(Heuristic::kPseudoImpact),
                    static_cast<int>(Heuristic::kStaticOrder)}})
    ->Unit(benchmark::kMillisecond);

void BM_OracleEnumeration(benchmark::State& state) {
  const auto suite = bench_suite();
  for (auto _ : state) {
    for (const Instance& inst : suite) {
      benchmark::DoNotOptimize(oracle_verdict(inst.net, inst.query).patterns_checked);
    }
  }
}
BENCHMARK(BM_OracleEnumeration)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace soiv
