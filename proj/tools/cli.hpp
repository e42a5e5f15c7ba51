// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SOIV_TOOLS_CLI_HPP
#define SOIV_TOOLS_CLI_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "soiv/network.hpp"
#include "soiv/query.hpp"
#include "soiv/search.hpp"

namespace soiv::cli {

inline constexpr int kExitSat = 10;
inline constexpr int kExitUnsat = 20;
inline constexpr int kExitOther = 0;
inline constexpr int kExitError = 2;

/// Entry point shared by the soiv binary and the tests. Result records and
/// reports go to `out`; logs, traces and errors go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int exit_code(Result r);

struct TightenStep {
  double eps;
  Result result;
  double wall_time_s;
};

struct TightenReport {
  double eps0 = 0.0;
  double attacked_eps = 0.0;  // smallest eps with a counterexample (eps0 if none found)
  std::optional<double> certified_floor;
  std::vector<TightenStep> steps;
  std::string stop_reason;  // "unsat", "timeout", "unknown", "max_iterations"

  /// 100 * (1 - attacked_eps / eps0)
  double reduction_pct() const { return 100.0 * (1.0 - attacked_eps / eps0); }
};

/// eps <- (1 - step) * eps until Unsat (certified floor), a timeout or an
/// Unknown verdict, or `max_iterations`. `spec.eps` is ignored.
TightenReport tighten_bound(const Network& net, RobustnessSpec spec, double eps0, double step,
                            const SearchConfig& cfg, std::size_t max_iterations);

}  // namespace soiv::cli

#endif  // SOIV_TOOLS_CLI_HPP
