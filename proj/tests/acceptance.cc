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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any gating criterion fails. Criterion 8 is reported but
// does not gate.

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qcbb/blp.h"
#include "qcbb/bound.h"
#include "qcbb/engine.h"
#include "qcbb/ising.h"
#include "qcbb/metrics.h"
#include "qcbb/vqa.h"
#include "test_util.h"

namespace qcbb {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void Report(int id, const char* name, const Verdict& v, bool gating = true) {
  std::printf("%s %2d %-28s %s%s\n", v.pass ? "PASS" : "FAIL", id, name,
              v.detail.c_str(), gating ? "" : " (informational)");
  std::fflush(stdout);
  if (!v.pass && gating) ++failures;
}

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// Criterion 1.
Verdict EncodingExactness() {
  const auto start = Clock::now();
  Rng rng(1001);
  const double penalties[] = {1.0, 10.0, 1000.0};
  int passed = 0;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n = 3 + k % 10;  // 3..12
    const BlpInstance inst =
        k % 2 == 0 ? testing::RandomSppInstance(rng, n, n, 2, std::min(5, n - 1))
                   : testing::RandomDenseInstance(rng, n, 1 + k % 4);
    const double m = penalties[k % 3];
    const IsingModel model = Encode(inst, m);
    bool ok = true;
    for (uint64_t z = 0; z < (uint64_t{1} << inst.num_vars); ++z) {
      const Assignment x = testing::BitsOf(z, inst.num_vars);
      const double want = testing::ReferencePenalizedCost(inst, x, m);
      const double err = std::abs(Energy(model, SigmaOfX(x)) - want) /
                         std::max(1.0, std::abs(want));
      worst = std::max(worst, err);
      ok &= err <= 1e-9;
    }
    passed += ok;
  }
  const double secs = Seconds(start);
  return {passed == 100 && secs < 60.0,
          Fmt("%d/100 instances, max rel err %.2e, %.1f s", passed, worst, secs)};
}

// Criterion 2.
Verdict BoundSoundness() {
  const auto start = Clock::now();
  Rng rng(2002);
  int sound = 0;
  int converged = 0;
  int floor_ok = 0;
  double worst_floor_excess = -1e300;
  for (int k = 0; k < 200; ++k) {
    const int n = 1 + k % 10;
    const IsingModel model =
        testing::RandomIsingModel(rng, n, UniformReal(rng, 0.2, 1.0), 3.0);
    BoundConfig config;
    config.seed = rng();
    const BoundResult r = LowerBound(model, config);
    const double min_h = testing::ExhaustiveGroundState(model).energy;
    sound += r.lb_value <= min_h + 1e-9;
    // Well converged: the certified dual sits on top of the primal value.
    const double scale = 1.0 + r.total_weight - 2.0 * r.negative_weight;
    if (r.z_dual - r.z_sdp <= 1e-6 * scale) {
      ++converged;
      const double excess = BoundFloor(model, min_h) - r.lb_value;
      worst_floor_excess = std::max(worst_floor_excess, excess);
      floor_ok += excess <= 1e-4;
    }
  }
  const double secs = Seconds(start);
  return {sound == 200 && floor_ok == converged && converged > 0 && secs < 300,
          Fmt("sound %d/200, floor %d/%d converged runs (max excess %.2e), "
              "%.1f s",
              sound, floor_ok, converged, worst_floor_excess, secs)};
}

// Criterion 3.
Verdict ReductionIdentity() {
  Rng rng(3003);
  int passed = 0;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + k % 10;
    IsingModel model = testing::RandomIsingModel(rng, n, 0.7, 3.0);
    model.constant.transform_part = UniformReal(rng, -5, 5);
    const WeightedGraph g = IsingToMaxCut(model);
    const double lhs =
        testing::ExhaustiveGroundState(model).energy - model.Constant();
    const double rhs = -2.0 * testing::ExhaustiveMaxCut(g) + g.TotalWeight();
    worst = std::max(worst, std::abs(lhs - rhs));
    passed += std::abs(lhs - rhs) <= 1e-9;
  }
  return {passed == 100, Fmt("%d/100 models, max abs err %.2e", passed, worst)};
}

struct SolvedCase {
  BlpInstance instance;
  BruteForceResult brute;
  SolveResult result;
  double seconds = 0.0;
};

std::vector<SolvedCase> SolveOptimalityCorpus() {
  Rng rng(4004);
  std::vector<SolvedCase> cases;
  for (int k = 0; k < 50; ++k) {
    SolvedCase c;
    c.instance = testing::RandomSppInstance(rng, 8, 12, 3, 5);
    c.brute = BruteForceOptimum(c.instance);
    SolverConfig config;  // p = 3, 50 queries per node, 1024 shots
    config.seed = static_cast<uint64_t>(k);
    const auto start = Clock::now();
    c.result = Solve(c.instance, config);
    c.seconds = Seconds(start);
    cases.push_back(std::move(c));
  }
  return cases;
}

// Criterion 4.
Verdict EndToEndOptimality(const std::vector<SolvedCase>& cases) {
  int passed = 0;
  std::vector<double> times;
  std::vector<double> nodes;
  for (const SolvedCase& c : cases) {
    times.push_back(c.seconds);
    nodes.push_back(static_cast<double>(c.result.nodes_evaluated));
    passed += c.brute.feasible && c.result.status == SolveStatus::kOptimal &&
              c.result.best_feasible &&
              c.result.best_feasible->value == c.brute.value;
  }
  std::sort(times.begin(), times.end());
  std::sort(nodes.begin(), nodes.end());
  const double median = times[times.size() / 2];
  return {passed == static_cast<int>(cases.size()) && median < 60.0,
          Fmt("%d/%zu optimal, median %.2f s, median nodes %.0f, max nodes %.0f",
              passed, cases.size(), median, nodes[nodes.size() / 2],
              nodes.back())};
}

// Criterion 5. Returns the number of violated checks for one run.
int TraceViolations(const SolveResult& r, int64_t& checks) {
  int bad = 0;
  std::optional<double> last_ub;
  std::optional<double> last_lb;
  std::optional<double> last_gap;
  double last_t = 0.0;
  for (const TraceEvent& e : r.trace) {
    ++checks;
    bad += e.wall_time_s < last_t;
    last_t = e.wall_time_s;
    if (e.ub) {
      bad += last_ub && *e.ub > *last_ub;
      last_ub = e.ub;
    }
    if (e.lb) {
      bad += last_lb && *e.lb < *last_lb;
      last_lb = e.lb;
    }
    if (e.lb && e.ub) {
      bad += *e.lb > *e.ub + 1e-9;
      const double gap = *e.ub - *e.lb;
      bad += last_gap && gap > *last_gap + 1e-12;
      last_gap = gap;
    }
  }
  for (const NodeRecord& rec : r.nodes) {
    if (!rec.parent || !rec.evaluated) continue;
    const NodeRecord& parent = r.nodes.at(*rec.parent);
    checks += 2;
    bad += rec.local_lb < parent.local_lb;
    bad += rec.many_body_count >= 0 &&
           rec.many_body_count > parent.many_body_count;
  }
  return bad;
}

Verdict TraceInvariants(const std::vector<SolvedCase>& cases) {
  int64_t checks = 0;
  int bad = 0;
  int runs_ok = 0;
  for (const SolvedCase& c : cases) {
    const int v = TraceViolations(c.result, checks);
    bad += v;
    runs_ok += v == 0;
  }
  return {bad == 0, Fmt("%d/%zu runs clean, %d violations in %lld checks",
                        runs_ok, cases.size(), bad,
                        static_cast<long long>(checks))};
}

// Propagation-resistant instances: dense integer rows whose right-hand side
// is nudged off a known feasible point, so many have no or few solutions.
std::vector<BlpInstance> NearInfeasibleInstances() {
  Rng rng(6006);
  std::vector<BlpInstance> out;
  while (out.size() < 20) {
    const int n = static_cast<int>(UniformInt(rng, 7, 10));
    BlpInstance inst = testing::RandomDenseInstance(rng, n, 3);
    for (double& c : inst.cost) c = std::abs(c) + 1.0;
    inst.rhs[UniformInt(rng, 0, 2)] += UniformInt(rng, 0, 1) ? 1.0 : -1.0;
    if (Propagate(inst, PartialAssignment(n)).infeasible) continue;
    inst.name = "near_infeasible_" + std::to_string(out.size());
    out.push_back(std::move(inst));
  }
  return out;
}

// Criterion 6.
Verdict PenaltyRuleSafety(const std::vector<SolvedCase>& cases) {
  int fired = 0;
  int confirmed = 0;
  int crafted_agree = 0;
  int crafted_infeasible = 0;
  auto audit = [&](const BlpInstance& inst, const SolveResult& r) {
    for (const NodeRecord& rec : r.nodes) {
      if (rec.reason != PruneReason::kPenaltyBound) continue;
      ++fired;
      confirmed += !testing::HasFeasibleCompletion(inst, rec.fixings);
    }
  };
  for (const SolvedCase& c : cases) audit(c.instance, c.result);
  const std::vector<BlpInstance> crafted = NearInfeasibleInstances();
  for (size_t k = 0; k < crafted.size(); ++k) {
    SolverConfig config;
    config.seed = k;
    const SolveResult r = Solve(crafted[k], config);
    audit(crafted[k], r);
    const BruteForceResult brute = BruteForceOptimum(crafted[k]);
    crafted_infeasible += !brute.feasible;
    crafted_agree +=
        brute.feasible
            ? (r.status == SolveStatus::kOptimal &&
               r.best_feasible->value == brute.value)
            : r.status == SolveStatus::kInfeasible;
  }
  return {confirmed == fired && crafted_agree == 20,
          Fmt("%d/%d rule prunes confirmed infeasible; crafted %d/20 solved "
              "correctly (%d infeasible)",
              confirmed, fired, crafted_agree, crafted_infeasible)};
}

// Criterion 7.
Verdict PruningNeutrality() {
  Rng rng(7007);
  int same = 0;
  int64_t nodes_on = 0;
  int64_t nodes_off = 0;
  for (int k = 0; k < 20; ++k) {
    const BlpInstance inst = testing::RandomSppInstance(rng, 6, 10, 3, 5);
    SolverConfig on;
    on.seed = k;
    SolverConfig off = on;
    off.bound_pruning = false;
    const SolveResult a = Solve(inst, on);
    const SolveResult b = Solve(inst, off);
    nodes_on += a.nodes_evaluated;
    nodes_off += b.nodes_evaluated;
    same += a.status == b.status && a.best_feasible && b.best_feasible &&
            a.best_feasible->value == b.best_feasible->value;
  }
  return {same == 20, Fmt("%d/20 identical optima (nodes %lld pruned vs %lld "
                          "unpruned)",
                          same, static_cast<long long>(nodes_on),
                          static_cast<long long>(nodes_off))};
}

// Criterion 8.
Verdict BaselineComparison() {
  int wins = 0;
  std::string dist;
  for (int k = 0; k < 10; ++k) {
    const BlpInstance inst = GenerateSpp({15, 6, 1, 20}, 8000 + k);
    SolverConfig config;
    config.seed = k;
    config.node_limit = 10;  // 10 nodes x 50 queries
    const SolveResult q = Solve(inst, config);
    const BaselineResult b = RunPlainQaoa(inst, config, 500);
    const double qv = q.best_penalized->value;
    const double bv = b.best_penalized->value;
    wins += qv <= bv;
    dist += Fmt("%s%g/%g", k ? " " : "", qv, bv);
  }
  return {wins >= 8, Fmt("QCBB <= plain QAOA in %d/10 [qcbb/plain: %s]", wins,
                         dist.c_str())};
}

// Criterion 9.
Verdict SimulatorCorrectness() {
  bool uniform_exact = true;
  for (int n = 1; n <= 6; ++n) {
    CostDiagonal d;
    d.num_spins = n;
    for (uint64_t z = 0; z < (uint64_t{1} << n); ++z) {
      d.energies.push_back(static_cast<double>(z % 7) - 3.0);
    }
    const StateVector s = QaoaState(d, QaoaParams{{0, 0}, {0, 0}});
    const StateVector u = UniformState(n);
    uniform_exact &= s == u;
    for (const auto& a : s) {
      uniform_exact &= a.imag() == 0.0 && a == s[0];
    }
    uniform_exact &= std::abs(std::norm(s[0]) * static_cast<double>(s.size()) -
                              1.0) <= 1e-15;
  }
  Rng rng(9009);
  int matched = 0;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int n = 1 + k % 6;
    const int p = 1 + k % 3;
    CostDiagonal d;
    d.num_spins = n;
    for (uint64_t z = 0; z < (uint64_t{1} << n); ++z) {
      d.energies.push_back(UniformReal(rng, -10, 10));
    }
    QaoaParams params;
    for (int l = 0; l < p; ++l) {
      params.gammas.push_back(UniformReal(rng, -M_PI, M_PI));
      params.betas.push_back(UniformReal(rng, -M_PI, M_PI));
    }
    const auto ref = testing::DenseQaoaReference(d.energies, params);
    double ref_e = 0.0;
    for (size_t z = 0; z < ref.size(); ++z) ref_e += std::norm(ref[z]) * d.energies[z];
    const double err = std::abs(Expectation(QaoaState(d, params), d) - ref_e);
    worst = std::max(worst, err);
    matched += err <= 1e-8;
  }
  return {uniform_exact && matched == 50,
          Fmt("zero-angle identity %s, %d/50 draws within 1e-8 (max %.2e)",
              uniform_exact ? "exact" : "BROKEN", matched, worst)};
}

// Criterion 10.
Verdict Determinism() {
  const BlpInstance inst = GenerateSpp({12, 5, 1, 20}, 10010);
  SolverConfig config;
  config.seed = 77;
  const std::string first = TraceToCsv(Solve(inst, config).trace);
  int identical = 0;
  for (int k = 0; k < 10; ++k) {
    identical += TraceToCsv(Solve(inst, config).trace) == first;
  }
  return {identical == 10, Fmt("%d/10 byte-identical traces (%zu bytes)",
                               identical, first.size())};
}

}  // namespace
}  // namespace qcbb

int main() {
  using namespace qcbb;
  Report(1, "encoding-exactness", EncodingExactness());
  Report(2, "bound-soundness", BoundSoundness());
  Report(3, "maxcut-reduction-identity", ReductionIdentity());
  const std::vector<SolvedCase> corpus = SolveOptimalityCorpus();
  Report(4, "end-to-end-optimality", EndToEndOptimality(corpus));
  Report(5, "trace-invariants", TraceInvariants(corpus));
  Report(6, "penalty-rule-safety", PenaltyRuleSafety(corpus));
  Report(7, "pruning-neutrality", PruningNeutrality());
  Report(8, "baseline-comparison", BaselineComparison(), /*gating=*/false);
  Report(9, "simulator-correctness", SimulatorCorrectness());
  Report(10, "determinism", Determinism());
  return failures == 0 ? 0 : 1;
}
