// Copyright 2026 The QCBB Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#include "qcbb/cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "qcbb/blp.h"

namespace qcbb {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string BitString(const Assignment& x) {
  std::string s;
  for (uint8_t v : x) s += v ? '1' : '0';
  return s;
}

std::string OptionalNumber(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : "none";
}

uint64_t ParseSeed(const std::string& text, const std::string& origin) {
  try {
    size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(origin + " is not a nonnegative integer: '" + text + "'");
  }
}

// Seed precedence: --seed, then the config file, then QCBB_SEED, then 0.
uint64_t EnvironmentSeed() {
  const char* env = std::getenv("QCBB_SEED");
  if (env == nullptr || *env == '\0') return 0;
  return ParseSeed(env, "QCBB_SEED");
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("malformed JSON in " + path + ": " + e.what());
  }
}

// Flags shared by solve and baseline. Values start at the defaults; a config
// file overrides defaults and explicit flags override the file.
struct RunFlags {
  std::string instance;
  std::string config;
  std::string trace;
  int p = 3;
  int64_t shots = 1024;
  int64_t node_queries = 50;
  int64_t node_limit = 0;
  double time_limit = 0.0;
  double gap = 0.0;
  std::string seed;
  bool warm_start = false;
  int workers = 1;
  std::string clock = "logical";
  bool no_bound_pruning = false;
  bool vqa_before_pruning = false;
  int64_t queries = 500;
};

const std::set<std::string>& ConfigKeys() {
  static const std::set<std::string> keys = {
      "p",          "shots",      "node_queries", "node_limit",
      "time_limit", "gap",        "seed",         "warm_start",
      "workers",    "clock",      "trace",        "queries",
      "bound_pruning", "vqa_before_pruning"};
  return keys;
}

struct ResolvedRun {
  SolverConfig solver;
  std::string trace;
  int64_t queries = 500;
};

ResolvedRun Resolve(const CLI::App& cmd, const RunFlags& flags) {
  ResolvedRun run;
  SolverConfig& c = run.solver;
  json file = json::object();
  if (!flags.config.empty()) {
    file = ReadJsonFile(flags.config);
    if (!file.is_object()) throw ParseError("config must be a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (!ConfigKeys().count(key)) {
        throw ParseError("unknown config key '" + key + "'");
      }
    }
  }
  auto given = [&cmd](const char* flag) {
    const CLI::Option* opt = cmd.get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  try {
    c.depth = given("--p") ? flags.p : file.value("p", flags.p);
    c.shots = given("--shots") ? flags.shots : file.value("shots", flags.shots);
    c.node_queries = given("--node-queries")
                         ? flags.node_queries
                         : file.value("node_queries", flags.node_queries);
    if (given("--node-limit")) {
      c.node_limit = flags.node_limit;
    } else if (file.contains("node_limit")) {
      c.node_limit = file.at("node_limit").get<int64_t>();
    }
    if (given("--time-limit")) {
      c.time_limit_s = flags.time_limit;
    } else if (file.contains("time_limit")) {
      c.time_limit_s = file.at("time_limit").get<double>();
    }
    if (given("--gap")) {
      c.gap_target = flags.gap;
    } else if (file.contains("gap")) {
      c.gap_target = file.at("gap").get<double>();
    }
    if (given("--seed")) {
      c.seed = ParseSeed(flags.seed, "--seed");
    } else if (file.contains("seed")) {
      c.seed = file.at("seed").get<uint64_t>();
    } else {
      c.seed = EnvironmentSeed();
    }
    c.warm_start = given("--warm-start") || file.value("warm_start", false);
    c.workers = given("--workers") ? flags.workers
                                   : file.value("workers", flags.workers);
    const std::string clock =
        given("--clock") ? flags.clock : file.value("clock", flags.clock);
    if (clock == "logical") {
      c.clock = TraceClock::kLogical;
    } else if (clock == "wall") {
      c.clock = TraceClock::kWall;
    } else {
      throw UsageError("clock must be 'logical' or 'wall', got '" + clock +
                       "'");
    }
    c.bound_pruning = !given("--no-bound-pruning") &&
                      file.value("bound_pruning", true);
    c.vqa_before_pruning = given("--vqa-before-pruning") ||
                           file.value("vqa_before_pruning", false);
    run.trace = given("--trace") ? flags.trace
                                 : file.value("trace", std::string());
    run.queries = given("--queries") ? flags.queries
                                     : file.value("queries", flags.queries);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad config value: ") + e.what());
  }
  try {
    c.Validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (run.queries < 1) throw UsageError("--queries must be >= 1");
  return run;
}

void AddRunFlags(CLI::App& cmd, RunFlags& flags, bool solve) {
  cmd.add_option("instance", flags.instance, "Instance JSON file")->required();
  cmd.add_option("--config", flags.config, "JSON file of flag values");
  cmd.add_option("--trace", flags.trace, "Trace output (.csv or .json)");
  cmd.add_option("--p", flags.p, "QAOA depth")->capture_default_str();
  cmd.add_option("--shots", flags.shots, "Samples per run")
      ->capture_default_str();
  cmd.add_option("--seed", flags.seed, "Master seed (else QCBB_SEED, else 0)");
  cmd.add_option("--clock", flags.clock, "Trace clock: logical or wall")
      ->capture_default_str();
  if (solve) {
    cmd.add_option("--node-queries", flags.node_queries,
                   "Optimizer queries per node")
        ->capture_default_str();
    cmd.add_option("--node-limit", flags.node_limit, "Maximum evaluated nodes");
    cmd.add_option("--time-limit", flags.time_limit, "Seconds");
    cmd.add_option("--gap", flags.gap, "Relative gap target");
    cmd.add_flag("--warm-start", flags.warm_start,
                 "Start children from the parent's angles");
    cmd.add_option("--workers", flags.workers, "Parallel node evaluations")
        ->capture_default_str();
    cmd.add_flag("--no-bound-pruning", flags.no_bound_pruning,
                 "Never prune by bound");
    cmd.add_flag("--vqa-before-pruning", flags.vqa_before_pruning,
                 "Run the VQA before the bound prune");
  } else {
    cmd.add_option("--queries", flags.queries, "Optimizer query budget")
        ->capture_default_str();
  }
}

void WriteTrace(const std::vector<TraceEvent>& trace, const std::string& path) {
  if (path.empty()) return;
  ExportTrace(trace, path, FormatForPath(path));
}

int CmdSolve(const CLI::App& cmd, const RunFlags& flags, std::ostream& out) {
  const ResolvedRun run = Resolve(cmd, flags);
  const BlpInstance instance = LoadInstance(flags.instance);
  const SolveResult result = Solve(instance, run.solver);
  WriteTrace(result.trace, run.trace);

  const std::optional<double> value =
      result.best_feasible ? std::optional(result.best_feasible->value)
                           : std::nullopt;
  out << SolveStatusName(result.status) << ' ' << OptionalNumber(value) << '\n';
  out << "assignment "
      << (result.best_feasible ? BitString(result.best_feasible->x) : "none")
      << '\n';
  out << "global_lb " << OptionalNumber(result.global_lb) << '\n';
  out << "nodes " << result.nodes_evaluated << '\n';
  out << "queries " << result.total_queries << '\n';
  const BoundSeries series =
      ExtractBoundSeries(result.trace, SeriesAxis::kNodes);
  out << "pd_integral "
      << (series.points.empty() ? "none"
                                : FormatDouble(PrimalDualIntegral(series)))
      << '\n';
  return ExitCodeFor(result.status);
}

int CmdBaseline(const CLI::App& cmd, const RunFlags& flags, std::ostream& out) {
  const ResolvedRun run = Resolve(cmd, flags);
  const BlpInstance instance = LoadInstance(flags.instance);
  const BaselineResult result =
      RunPlainQaoa(instance, run.solver, run.queries);
  WriteTrace(result.trace, run.trace);
  out << "best_penalized " << FormatDouble(result.best_penalized->value) << '\n';
  out << "best_feasible "
      << OptionalNumber(result.best_feasible
                            ? std::optional(result.best_feasible->value)
                            : std::nullopt)
      << '\n';
  out << "assignment " << BitString(result.best_penalized->x) << '\n';
  out << "final_expectation " << FormatDouble(result.final_expectation)
      << '\n';
  out << "queries " << result.optimizer_trace.total() << '\n';
  return kExitOk;
}

struct GenFlags {
  int n = 15;
  int m = 6;
  std::string seed;
  int count = 1;
  std::string out;
  int cost_low = 1;
  int cost_high = 20;
  bool with_optimum = false;
};

int CmdGen(const CLI::App& cmd, const GenFlags& flags, std::ostream& out) {
  if (flags.count < 1) throw UsageError("--count must be >= 1");
  if (flags.n <= flags.m || flags.m < 2) {
    throw UsageError("need n > m >= 2, got n = " + std::to_string(flags.n) +
                     ", m = " + std::to_string(flags.m));
  }
  if (flags.cost_low > flags.cost_high) {
    throw UsageError("--cost-low exceeds --cost-high");
  }
  const uint64_t base = cmd.count("--seed") ? ParseSeed(flags.seed, "--seed")
                                            : EnvironmentSeed();
  std::filesystem::create_directories(flags.out);
  SppOptions options{flags.n, flags.m, flags.cost_low, flags.cost_high};
  for (int k = 0; k < flags.count; ++k) {
    const uint64_t seed = base + static_cast<uint64_t>(k);
    BlpInstance instance = GenerateSpp(options, seed);
    std::ostringstream name;
    name << "spp_n" << flags.n << "_m" << flags.m << "_seed" << seed;
    instance.name = name.str();
    std::optional<double> optimum;
    if (flags.with_optimum && flags.n <= 16) {
      optimum = BruteForceOptimum(instance).value;
      instance.optimum = optimum;
    }
    const std::string path =
        (std::filesystem::path(flags.out) / (name.str() + ".json")).string();
    SaveInstance(instance, path);
    out << path;
    if (optimum) out << " optimum " << FormatDouble(*optimum);
    out << '\n';
  }
  return kExitOk;
}

struct ReportFlags {
  std::string trace;
  std::string baseline;
  std::string instance;
  std::string out;
};

int CmdReport(const ReportFlags& flags, std::ostream& out) {
  const std::vector<TraceEvent> trace = ImportTrace(flags.trace);
  std::optional<std::vector<TraceEvent>> baseline;
  if (!flags.baseline.empty()) baseline = ImportTrace(flags.baseline);
  std::optional<double> worst;
  if (!flags.instance.empty()) {
    const BlpInstance instance = LoadInstance(flags.instance);
    if (instance.num_vars <= kBruteForceMaxVars) {
      const BruteForceResult brute = BruteForceOptimum(instance);
      if (brute.feasible) worst = brute.worst_feasible;
    }
  }
  const std::string report = ReportJson(trace, baseline, worst);
  if (flags.out.empty()) {
    out << report << '\n';
  } else {
    std::ofstream file(flags.out);
    if (!file) throw std::runtime_error("cannot open " + flags.out);
    file << report << '\n';
  }
  return kExitOk;
}

json SeriesJson(const BoundSeries& series) {
  json points = json::array();
  for (const BoundPoint& p : series.points) {
    points.push_back({{"t", p.t}, {"ub", p.ub}, {"lb", p.lb}});
  }
  return points;
}

json TraceReport(const std::vector<TraceEvent>& trace) {
  if (trace.empty()) throw std::invalid_argument("trace has no events");
  const BoundSeries by_nodes = ExtractBoundSeries(trace, SeriesAxis::kNodes);
  const BoundSeries by_time = ExtractBoundSeries(trace, SeriesAxis::kSeconds);
  json report;
  report["bounds_vs_nodes"] = SeriesJson(by_nodes);
  report["bounds_vs_time"] = SeriesJson(by_time);
  json fractions = json::array();
  json expectations = json::array();
  std::optional<double> ub;
  std::optional<double> lb;
  std::optional<std::string> status;
  for (const TraceEvent& e : trace) {
    if (e.kind == EventKind::kNodeStart && e.many_body_fraction) {
      fractions.push_back(
          {{"node", e.node_index}, {"fraction", *e.many_body_fraction}});
    }
    if (e.kind == EventKind::kOptimizerQuery && e.expectation &&
        e.query_index) {
      expectations.push_back(
          {{"query", *e.query_index}, {"expectation", *e.expectation}});
    }
    if (e.ub) ub = e.ub;
    if (e.lb) lb = e.lb;
    if (e.status) status = e.status;
  }
  report["many_body_fraction"] = std::move(fractions);
  report["expected_cost_vs_queries"] = std::move(expectations);
  auto integral = [](const BoundSeries& s) -> json {
    if (s.points.empty()) return nullptr;
    return PrimalDualIntegral(s);
  };
  report["pd_integral"] = {{"nodes", integral(by_nodes)},
                           {"seconds", integral(by_time)}};
  auto opt = [](const auto& v) -> json {
    if (v) return json(*v);
    return nullptr;
  };
  report["final"] = {{"ub", opt(ub)}, {"lb", opt(lb)}, {"status", opt(status)}};
  return report;
}

}  // namespace

int ExitCodeFor(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
    case SolveStatus::kGapReached:
      return kExitOk;
    case SolveStatus::kInfeasible:
      return kExitInfeasible;
    case SolveStatus::kNodeLimit:
    case SolveStatus::kTimeLimit:
      return kExitLimit;
  }
  return kExitError;
}

std::string ReportJson(const std::vector<TraceEvent>& trace,
                       const std::optional<std::vector<TraceEvent>>& baseline,
                       std::optional<double> worst_feasible) {
  json report;
  if (baseline) {
    report["comparison"] = {{"qcbb", TraceReport(trace)},
                            {"baseline", TraceReport(*baseline)}};
  } else {
    report["series"] = TraceReport(trace);
  }
  // Above F the cost axis switches from linear to logarithmic scaling.
  report["F"] = worst_feasible ? json(*worst_feasible) : json(nullptr);
  return report.dump(1);
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Hybrid branch and bound for binary linear programs", "qcbb"};
  app.require_subcommand(1);

  GenFlags gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate set-partitioning instances");
  gen_cmd->add_option("--n", gen.n, "Variables")->capture_default_str();
  gen_cmd->add_option("--m", gen.m, "Constraints")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "First seed (else QCBB_SEED, else 0)");
  gen_cmd->add_option("--count", gen.count, "Instances")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--cost-low", gen.cost_low, "Smallest integer cost")->capture_default_str();
  gen_cmd->add_option("--cost-high", gen.cost_high, "Largest integer cost")->capture_default_str();
  gen_cmd->add_flag("--with-optimum", gen.with_optimum,
                    "Store the brute-force optimum (n <= 16)");

  RunFlags solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Run branch and bound");
  AddRunFlags(*solve_cmd, solve, /*solve=*/true);

  RunFlags baseline;
  CLI::App* baseline_cmd =
      app.add_subcommand("baseline", "Plain QAOA on the whole instance");
  AddRunFlags(*baseline_cmd, baseline, /*solve=*/false);

  ReportFlags report;
  CLI::App* report_cmd = app.add_subcommand("report", "Emit plot data");
  report_cmd->add_option("trace", report.trace, "Solve trace")->required();
  report_cmd->add_option("--baseline", report.baseline, "Baseline trace");
  report_cmd->add_option("--instance", report.instance,
                         "Instance, for the worst feasible cost");
  report_cmd->add_option("--out", report.out, "Output file (else stdout)");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  try {
    if (gen_cmd->parsed()) return CmdGen(*gen_cmd, gen, out);
    if (solve_cmd->parsed()) return CmdSolve(*solve_cmd, solve, out);
    if (baseline_cmd->parsed()) return CmdBaseline(*baseline_cmd, baseline, out);
    if (report_cmd->parsed()) return CmdReport(report, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace qcbb
