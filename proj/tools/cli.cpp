// Copyright 2026 The soiv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "soiv/generate.hpp"
#include "soiv/relaxation.hpp"

namespace soiv::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

enum class LogLevel { kDebug, kInfo, kWarn, kError, kOff };

LogLevel log_level() {
  const char* env = std::getenv("SOIV_LOG");
  if (!env) return LogLevel::kWarn;
  const std::string v = env;
  if (v == "debug") return LogLevel::kDebug;
  if (v == "info") return LogLevel::kInfo;
  if (v == "error") return LogLevel::kError;
  if (v == "off") return LogLevel::kOff;
  return LogLevel::kWarn;
}

void log(std::ostream& err, LogLevel lvl, const std::string& msg) {
  if (lvl < log_level()) return;
  static constexpr const char* kNames[] = {"debug", "info", "warn", "error"};
  err << "[soiv " << kNames[static_cast<int>(lvl)] << "] " << msg << '\n';
}

struct EngineOpts {
  std::string strategy = "mcmc";
  std::string heuristic = "pi";
  std::size_t T = 2;
  double beta = 10.0;
  double gamma = 0.5;
  std::optional<std::uint64_t> seed;
  double timeout = 0.0;  // <= 0: none
  std::size_t static_depth = 3;
  std::size_t node_limit = 0;  // 0: none
  bool reset_rejections = false;
  bool reset_pi_per_subtree = false;
};

void add_engine_options(CLI::App* app, EngineOpts& o) {
  app->add_option("--strategy", o.strategy, "SoI minimization strategy")
      ->check(CLI::IsMember({"mcmc", "walksat", "lponly"}))
      ->capture_default_str();
  app->add_option("--heuristic", o.heuristic, "Branching heuristic")
      ->check(CLI::IsMember({"pi", "static"}))
      ->capture_default_str();
  app->add_option("-T,--rejection-threshold", o.T, "Rejections before DeepSoI gives up")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--beta", o.beta, "Metropolis inverse temperature")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--gamma", o.gamma, "Pseudo-impact EMA discount")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app->add_option("--seed", o.seed, "RNG seed (random and printed when unset)");
  app->add_option("--timeout", o.timeout, "Wall-clock limit in seconds (0: none)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--static-depth", o.static_depth, "Depth below which static order is used")
      ->capture_default_str();
  app->add_option("--node-limit", o.node_limit, "Node limit (0: none)");
  app->add_flag("--reset-rejections-on-accept", o.reset_rejections,
                "Reset the rejection counter after every accepted proposal");
  app->add_flag("--reset-pi-per-subtree", o.reset_pi_per_subtree,
                "Give each subtree its own copy of the pseudo-impact table");
}

std::uint64_t resolve_seed(EngineOpts& o, std::ostream& err) {
  if (!o.seed) {
    std::random_device rd;
    o.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    err << "seed: " << *o.seed << '\n';
  }
  return *o.seed;
}

Strategy parse_strategy(const std::string& s) {
  if (s == "mcmc") return Strategy::kMcmc;
  if (s == "walksat") return Strategy::kWalkSat;
  if (s == "lponly") return Strategy::kLpOnly;
  throw std::invalid_argument("unknown strategy: " + s);
}

Heuristic parse_heuristic(const std::string& s) {
  if (s == "pi") return Heuristic::kPseudoImpact;
  if (s == "static") return Heuristic::kStaticOrder;
  throw std::invalid_argument("unknown heuristic: " + s);
}

SearchConfig to_config(const EngineOpts& o) {
  SearchConfig c;
  c.soi.strategy = parse_strategy(o.strategy);
  c.soi.rejection_threshold = o.T;
  c.soi.beta = o.beta;
  c.soi.seed = o.seed.value_or(0);
  c.soi.reset_rejections_on_accept = o.reset_rejections;
  c.heuristic = parse_heuristic(o.heuristic);
  c.gamma = o.gamma;
  c.static_depth = o.static_depth;
  if (o.timeout > 0.0) c.timeout_s = o.timeout;
  if (o.node_limit > 0) c.node_limit = o.node_limit;
  c.reset_pseudo_impact_per_subtree = o.reset_pi_per_subtree;
  return c;
}

ojson config_json(const EngineOpts& o) {
  ojson j;
  j["strategy"] = o.strategy;
  j["heuristic"] = o.heuristic;
  j["T"] = o.T;
  j["beta"] = o.beta;
  j["gamma"] = o.gamma;
  j["seed"] = o.seed.value_or(0);
  j["timeout_s"] = o.timeout > 0.0 ? ojson(o.timeout) : ojson(nullptr);
  j["static_depth"] = o.static_depth;
  j["node_limit"] = o.node_limit > 0 ? ojson(o.node_limit) : ojson(nullptr);
  j["reset_rejections_on_accept"] = o.reset_rejections;
  j["reset_pi_per_subtree"] = o.reset_pi_per_subtree;
  return j;
}

ojson stats_json(const SearchStats& s) {
  ojson j;
  j["nodes"] = s.nodes;
  j["proposals"] = s.proposals;
  j["lp_pivots"] = s.lp_pivots;
  j["bound_passes"] = s.bound_passes;
  j["max_depth"] = s.max_depth;
  return j;
}

ojson input_witness(const Network& net, const Verdict& v) {
  if (!v.witness) return nullptr;
  const VariableLayout layout(net);
  ojson w = ojson::array();
  for (std::size_t i = 0; i < layout.input_dim(); ++i) w.push_back((*v.witness)[layout.input(i)]);
  return w;
}

// Configs for portfolio mode: alternate pseudo-impact and static ordering,
// distinct seeds.
std::vector<SearchConfig> portfolio_configs(const EngineOpts& o, std::size_t n) {
  std::vector<SearchConfig> out;
  for (std::size_t i = 0; i < n; ++i) {
    SearchConfig c = to_config(o);
    c.heuristic = i % 2 == 0 ? Heuristic::kPseudoImpact : Heuristic::kStaticOrder;
    c.soi.seed = o.seed.value_or(0) + i;
    out.push_back(std::move(c));
  }
  return out;
}

struct VerifyOpts {
  std::string network;
  std::string query;
  std::string instance;
  std::size_t portfolio = 0;
  bool trace = false;
  std::string dump_lp;
  bool no_timing = false;
};

void attach_trace(SearchConfig& cfg, std::ostream& err, std::mutex& mu, std::size_t engine) {
  cfg.trace = [&err, &mu, engine](const NodeTrace& t) {
    ojson j;
    j["engine"] = engine;
    j["depth"] = t.depth;
    j["free_relus"] = t.free_relus;
    j["outcome"] = t.outcome;
    j["proposals"] = t.proposals;
    j["branch_relu"] = t.branch_relu ? ojson(*t.branch_relu) : ojson(nullptr);
    j["cost_trajectory"] = t.cost_trajectory;
    std::lock_guard lock(mu);
    err << j.dump() << '\n';
  };
}

void dump_root_lp(const Network& net, const Query& q, const std::string& path) {
  const ConstraintSystem cs = encode(net, q);
  const PhaseFixings fix(cs.num_relus(), Phase::kFree);
  const BoundsMap bm = back_substitute(net, q.input_box, fix);
  const RelaxationBuild rel = build_relaxation(cs, bm, detect_fixed(cs.layout, bm, fix));
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_lp_format(rel.lp, os);
}

int cmd_verify(VerifyOpts& vo, EngineOpts& eo, std::ostream& out, std::ostream& err) {
  resolve_seed(eo, err);
  const Network net = load_network(vo.network);
  const Query q = load_query(vo.query, net);
  if (!vo.dump_lp.empty()) dump_root_lp(net, q, vo.dump_lp);
  std::mutex trace_mu;
  Verdict v;
  std::optional<std::size_t> winner;
  if (vo.portfolio > 1) {
    auto configs = portfolio_configs(eo, vo.portfolio);
    if (vo.trace) {
      for (std::size_t i = 0; i < configs.size(); ++i) attach_trace(configs[i], err, trace_mu, i);
    }
    auto [pv, idx] = portfolio_search(net, q, configs);
    v = std::move(pv);
    winner = idx;
  } else {
    SearchConfig cfg = to_config(eo);
    if (vo.trace) attach_trace(cfg, err, trace_mu, 0);
    v = complete_search(net, q, cfg);
  }
  ojson rec;
  rec["instance"] = vo.instance.empty() ? fs::path(vo.query).stem().stem().string() : vo.instance;
  rec["verdict"] = to_string(v.result);
  rec["witness"] = input_witness(net, v);
  rec["stats"] = stats_json(v.stats);
  ojson cfg = config_json(eo);
  cfg["portfolio"] = vo.portfolio;
  if (winner) cfg["portfolio_winner"] = *winner;
  rec["config"] = std::move(cfg);
  if (!vo.no_timing) rec["wall_time_s"] = v.stats.wall_time_s;
  out << rec.dump() << '\n';
  return exit_code(v.result);
}

struct TightenOpts {
  std::string network;
  std::vector<double> x0;
  std::size_t true_label = 0;
  std::size_t target_label = 0;
  double eps0 = 0.0;
  double step = 0.02;
  double per_query_timeout = 1800.0;
  std::size_t max_iterations = 1000;
  double domain_lo = 0.0;
  double domain_hi = 1.0;
  bool no_timing = false;
};

int cmd_tighten(TightenOpts& to, EngineOpts& eo, std::ostream& out, std::ostream& err) {
  if (!(to.eps0 > 0.0)) throw std::invalid_argument("--eps0 must be > 0");
  if (!(to.step > 0.0 && to.step < 1.0)) throw std::invalid_argument("--step must be in (0, 1)");
  resolve_seed(eo, err);
  const Network net = load_network(to.network);
  RobustnessSpec spec;
  spec.x0 = to.x0;
  spec.true_label = to.true_label;
  spec.target_label = to.target_label;
  spec.domain = {to.domain_lo, to.domain_hi};
  SearchConfig cfg = to_config(eo);
  if (to.per_query_timeout > 0.0) cfg.timeout_s = to.per_query_timeout;
  const TightenReport rep = tighten_bound(net, spec, to.eps0, to.step, cfg, to.max_iterations);
  ojson j;
  j["eps0"] = rep.eps0;
  j["attacked_eps"] = rep.attacked_eps;
  j["certified_floor"] = rep.certified_floor ? ojson(*rep.certified_floor) : ojson(nullptr);
  j["reduction_pct"] = rep.reduction_pct();
  j["stop_reason"] = rep.stop_reason;
  ojson steps = ojson::array();
  for (const TightenStep& s : rep.steps) {
    ojson js;
    js["eps"] = s.eps;
    js["verdict"] = to_string(s.result);
    if (!to.no_timing) js["wall_time_s"] = s.wall_time_s;
    steps.push_back(std::move(js));
  }
  j["steps"] = std::move(steps);
  ojson cfgj = config_json(eo);
  cfgj["step"] = to.step;
  cfgj["per_query_timeout_s"] = to.per_query_timeout;
  cfgj["max_iterations"] = to.max_iterations;
  j["config"] = std::move(cfgj);
  out << j.dump() << '\n';
  return kExitOther;
}

struct BenchOpts {
  std::string dir;
  std::vector<std::string> configs{"mcmc+pi"};
  std::vector<std::size_t> sweep_T;
  std::string out_path;
  bool no_timing = false;
};

struct BenchInstance {
  std::string name;
  Network net;
  Query query;
};

std::vector<BenchInstance> load_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  std::vector<fs::path> queries;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.size() > 11 && name.ends_with(".query.json")) queries.push_back(e.path());
  }
  std::sort(queries.begin(), queries.end());
  std::vector<BenchInstance> out;
  for (const fs::path& qp : queries) {
    const std::string stem = qp.filename().string().substr(0, qp.filename().string().size() - 11);
    fs::path np = qp.parent_path() / (stem + ".nnet");
    if (!fs::exists(np)) np = qp.parent_path() / (stem + ".net.json");
    if (!fs::exists(np)) throw std::runtime_error("no network for " + qp.string());
    Network net = load_network(np.string());
    Query q = load_query(qp.string(), net);
    out.push_back({stem, std::move(net), std::move(q)});
  }
  if (out.empty()) throw std::runtime_error("no instances in " + dir);
  return out;
}

std::string fmt_time(double t, bool no_timing) {
  if (no_timing) return "";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(6) << t;
  return ss.str();
}

bool solved(Result r) { return r == Result::kSat || r == Result::kUnsat; }

void bench_configs(const std::vector<BenchInstance>& insts, const BenchOpts& bo,
                   const EngineOpts& base, std::ostream& os) {
  os << "instance,config,verdict,wall_time_s,nodes,proposals\n";
  for (const std::string& name : bo.configs) {
    const auto plus = name.find('+');
    EngineOpts eo = base;
    eo.strategy = name.substr(0, plus);
    if (plus != std::string::npos) eo.heuristic = name.substr(plus + 1);
    const SearchConfig cfg = to_config(eo);
    std::size_t n_solved = 0, nodes = 0, proposals = 0;
    double time_solved = 0.0;
    for (const BenchInstance& in : insts) {
      const Verdict v = complete_search(in.net, in.query, cfg);
      const std::string t = fmt_time(v.stats.wall_time_s, bo.no_timing);
      os << in.name << ',' << name << ',' << to_string(v.result) << ',' << t << ','
         << v.stats.nodes << ',' << v.stats.proposals << '\n';
      nodes += v.stats.nodes;
      proposals += v.stats.proposals;
      if (solved(v.result)) {
        ++n_solved;
        if (!bo.no_timing) time_solved += std::stod(t);
      }
    }
    os << "SUMMARY," << name << ',' << n_solved << ',' << fmt_time(time_solved, bo.no_timing)
       << ',' << nodes << ',' << proposals << '\n';
  }
}

void bench_sweep(const std::vector<BenchInstance>& insts, const BenchOpts& bo,
                 const EngineOpts& base, std::ostream& os) {
  struct Col {
    std::size_t sat = 0, unsat = 0;
    std::vector<Verdict> runs;
  };
  std::vector<Col> cols;
  for (std::size_t T : bo.sweep_T) {
    EngineOpts eo = base;
    eo.T = T;
    const SearchConfig cfg = to_config(eo);
    Col c;
    for (const BenchInstance& in : insts) {
      c.runs.push_back(complete_search(in.net, in.query, cfg));
      c.sat += c.runs.back().result == Result::kSat;
      c.unsat += c.runs.back().result == Result::kUnsat;
    }
    cols.push_back(std::move(c));
  }
  std::vector<std::size_t> common;
  for (std::size_t i = 0; i < insts.size(); ++i) {
    if (std::all_of(cols.begin(), cols.end(),
                    [&](const Col& c) { return c.runs[i].result == Result::kUnsat; })) {
      common.push_back(i);
    }
  }
  auto row = [&](const std::string& label, auto&& cell) {
    os << label;
    for (const Col& c : cols) os << ',' << cell(c);
    os << '\n';
  };
  os << "Rejection threshold T";
  for (std::size_t T : bo.sweep_T) os << ',' << T;
  os << '\n';
  row("SAT Solv.", [](const Col& c) { return std::to_string(c.sat); });
  row("UNSAT Solv.", [](const Col& c) { return std::to_string(c.unsat); });
  row("Avg. time (common)", [&](const Col& c) -> std::string {
    if (common.empty() || bo.no_timing) return "";
    double t = 0.0;
    for (std::size_t i : common) t += c.runs[i].stats.wall_time_s;
    return fmt_time(t / static_cast<double>(common.size()), false);
  });
  row("Avg. states (common)", [&](const Col& c) -> std::string {
    if (common.empty()) return "";
    double n = 0.0;
    for (std::size_t i : common) n += static_cast<double>(c.runs[i].stats.nodes);
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(2) << n / static_cast<double>(common.size());
    return ss.str();
  });
}

int cmd_bench(BenchOpts& bo, EngineOpts& eo, std::ostream& out, std::ostream& err) {
  resolve_seed(eo, err);
  for (const std::string& c : bo.configs) {
    const auto plus = c.find('+');
    parse_strategy(c.substr(0, plus));
    if (plus != std::string::npos) parse_heuristic(c.substr(plus + 1));
  }
  const auto insts = load_dir(bo.dir);
  log(err, LogLevel::kInfo, "bench: " + std::to_string(insts.size()) + " instances");
  std::ofstream file;
  if (!bo.out_path.empty()) {
    file.open(bo.out_path);
    if (!file) throw std::runtime_error("cannot write " + bo.out_path);
  }
  std::ostream& os = bo.out_path.empty() ? out : file;
  if (bo.sweep_T.empty()) bench_configs(insts, bo, eo, os);
  else bench_sweep(insts, bo, eo, os);
  return kExitOther;
}

struct GenOpts {
  std::string out_dir;
  std::string kind = "robustness";
  std::size_t count = 20;
  std::uint64_t seed = 0;
};

int cmd_gen(const GenOpts& go, std::ostream& out) {
  std::vector<Instance> insts;
  if (go.kind == "robustness") {
    insts = robustness_suite(go.count, go.seed);
  } else if (go.kind == "sat-biased") {
    NetShape shape;
    shape.min_relus = 8;
    insts = sat_biased_suite(go.count, go.seed, shape);
  } else {
    Rng rng(go.seed);
    for (std::size_t i = 0; i < go.count; ++i) {
      Instance in = toy_tightening_instance(rng);
      in.name = "toy" + std::to_string(i);
      insts.push_back(std::move(in));
    }
  }
  write_suite(go.out_dir, insts);
  out << "wrote " << insts.size() << " instances to " << go.out_dir << '\n';
  return kExitOther;
}

}  // namespace

int exit_code(Result r) {
  switch (r) {
    case Result::kSat: return kExitSat;
    case Result::kUnsat: return kExitUnsat;
    default: return kExitOther;
  }
}

TightenReport tighten_bound(const Network& net, RobustnessSpec spec, double eps0, double step,
                            const SearchConfig& cfg, std::size_t max_iterations) {
  TightenReport rep;
  rep.eps0 = eps0;
  rep.attacked_eps = eps0;
  double eps = eps0;
  for (std::size_t k = 0; k < max_iterations; ++k) {
    eps *= 1.0 - step;
    spec.eps = eps;
    const Verdict v = complete_search(net, targeted_robustness_query(net, spec), cfg);
    rep.steps.push_back({eps, v.result, v.stats.wall_time_s});
    if (v.result == Result::kSat) {
      rep.attacked_eps = eps;
      continue;
    }
    if (v.result == Result::kUnsat) {
      rep.certified_floor = eps;
      rep.stop_reason = "unsat";
    } else {
      rep.stop_reason = to_string(v.result);
    }
    return rep;
  }
  rep.stop_reason = "max_iterations";
  return rep;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"soiv: complete verification of ReLU networks by SoI minimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "soiv 0.1.0");

  VerifyOpts vo;
  EngineOpts eo;
  auto* verify = app.add_subcommand("verify", "Decide one (network, query) instance");
  verify->add_option("--network", vo.network, "Network (.nnet or JSON)")->required();
  verify->add_option("--query", vo.query, "Query JSON")->required();
  verify->add_option("--instance", vo.instance, "Instance id for the result record");
  verify->add_option("--portfolio", vo.portfolio, "Run N engines in parallel");
  verify->add_flag("--trace", vo.trace, "Write one JSON line per search node to stderr");
  verify->add_option("--dump-lp", vo.dump_lp, "Write the root relaxation in LP format");
  verify->add_flag("--no-timing", vo.no_timing, "Omit wall-clock fields");
  add_engine_options(verify, eo);

  TightenOpts to;
  auto* tighten = app.add_subcommand("tighten-bound", "Shrink a perturbation bound until UNSAT");
  tighten->add_option("--network", to.network)->required();
  tighten->add_option("--x0", to.x0, "Centre point, comma separated")->required()->delimiter(',');
  tighten->add_option("--true-label", to.true_label)->required();
  tighten->add_option("--target-label", to.target_label)->required();
  tighten->add_option("--eps0", to.eps0, "Initial (attacked) bound")->required();
  tighten->add_option("--step", to.step)->capture_default_str();
  tighten->add_option("--per-query-timeout", to.per_query_timeout)->capture_default_str();
  tighten->add_option("--max-iterations", to.max_iterations)->capture_default_str();
  tighten->add_option("--domain-lo", to.domain_lo)->capture_default_str();
  tighten->add_option("--domain-hi", to.domain_hi)->capture_default_str();
  tighten->add_flag("--no-timing", to.no_timing);
  add_engine_options(tighten, eo);

  BenchOpts bo;
  auto* bench = app.add_subcommand("bench", "Run every instance in a directory");
  bench->add_option("--dir", bo.dir, "Directory of <name>.query.json + <name>.nnet")->required();
  bench->add_option("--configs", bo.configs, "strategy+heuristic list")->delimiter(',');
  bench->add_option("--sweep-T", bo.sweep_T, "Rejection thresholds to sweep")->delimiter(',');
  bench->add_option("--out", bo.out_path, "CSV path (default stdout)");
  bench->add_flag("--no-timing", bo.no_timing);
  add_engine_options(bench, eo);

  GenOpts go;
  auto* gen = app.add_subcommand("gen-suite", "Write a generated instance suite");
  gen->add_option("--out", go.out_dir)->required();
  gen->add_option("--kind", go.kind)
      ->check(CLI::IsMember({"robustness", "sat-biased", "toy"}))
      ->capture_default_str();
  gen->add_option("--count", go.count)->capture_default_str();
  gen->add_option("--seed", go.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : kExitError;
  }
  try {
    if (*verify) return cmd_verify(vo, eo, out, err);
    if (*tighten) return cmd_tighten(to, eo, out, err);
    if (*bench) return cmd_bench(bo, eo, out, err);
    return cmd_gen(go, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace soiv::cli
