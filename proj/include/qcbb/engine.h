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

// Hybrid branch and bound over penalised binary linear programs.
//
// Every node is a set of fixed master variables. Evaluating a node:
//   1. propagates the residual equalities (infeasible -> pruned),
//   2. reduces the master to the free columns, bounds the reduced Ising model
//      through MaxCut and inherits the parent bound if that is tighter
//      (bound >= M -> infeasible, bound >= incumbent -> pruned),
//   3. records the completion if nothing is free,
//   4. otherwise runs the variational solver, offers every distinct sample
//      to the incumbent, scores variables by how often the constraints they
//      appear in were violated, and branches on the most conflicting one.
// Open nodes are served lowest bound first.

#ifndef QCBB_ENGINE_H_
#define QCBB_ENGINE_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "qcbb/blp.h"
#include "qcbb/bound.h"
#include "qcbb/ising.h"
#include "qcbb/metrics.h"
#include "qcbb/vqa.h"

namespace qcbb {

struct ConflictData {
  int num_rows = 0;
  int num_samples = 0;
  int num_vars = 0;
  std::vector<uint8_t> violations;  // num_rows x num_samples, row-major
  std::vector<double> scores;       // per constraint, in [0, 1]
  std::vector<uint8_t> incidence;   // num_rows x num_vars, row-major
  std::vector<double> conflict;     // per variable: scores^T incidence
};

// Throws std::invalid_argument when sample width differs from core width.
ConflictData ConflictValues(const BlpInstance& core, const SampleSet& samples,
                            double tol = 1e-9);

// argmax of `conflict`, lowest index on ties. An all-zero vector falls back
// to the largest |field|. Throws on an empty problem.
int SelectBranchingVariable(std::span<const double> conflict,
                            std::span<const double> fields);

struct PropagationResult {
  PartialAssignment fixings;
  bool infeasible = false;
  int num_implied = 0;  // variables fixed by propagation
};

// Activity-based fixpoint over A x = b with the given fixings.
PropagationResult Propagate(const BlpInstance& instance,
                            PartialAssignment fixings, double tol = 1e-9);

struct Solution {
  double value = 0.0;
  Assignment x;
};

// Best penalised cost seen (upper bound used for pruning) and best feasible
// objective (the reported answer).
struct Incumbent {
  std::optional<Solution> best_penalized;
  std::optional<Solution> best_feasible;

  // Returns true if either record improved.
  bool Offer(const BlpInstance& master, double penalty, const Assignment& x);
};

struct SolverConfig {
  int depth = 3;
  int64_t shots = 1024;
  int64_t node_queries = 50;
  std::optional<int64_t> node_limit;
  std::optional<double> time_limit_s;
  std::optional<double> gap_target;
  uint64_t seed = 0;
  bool warm_start = false;
  // Disabling drops both bound-based prunes (incumbent and penalty rule).
  bool bound_pruning = true;
  // Run the variational solver before the bound-based prune decision.
  bool vqa_before_pruning = false;
  int workers = 1;
  TraceClock clock = TraceClock::kLogical;
  BoundConfig bound;

  // Throws std::invalid_argument.
  void Validate() const;
};

struct Node {
  int64_t id = 0;
  std::optional<int64_t> parent;
  int depth = 0;
  PartialAssignment fixings;  // master indices, already propagated
  double local_lb = 0.0;      // constant included
  uint64_t seed = 0;
  std::optional<QaoaParams> warm_start;
};

enum class NodeOutcomeKind {
  kPrunedInfeasible,
  kPrunedBound,
  kFathomedLeaf,
  kBranched,
};

enum class PruneReason { kNone, kPropagation, kPenaltyBound, kIncumbentBound };

struct NodeOutcome {
  NodeOutcomeKind kind = NodeOutcomeKind::kPrunedInfeasible;
  PruneReason reason = PruneReason::kNone;
  double local_lb = 0.0;
  int many_body_count = -1;  // -1 when no model was built
  int branch_var = -1;       // master index
  std::vector<Node> children;
  std::optional<VqaRun> vqa;
};

// One entry per node that was created, in creation order.
struct NodeRecord {
  int64_t id = 0;
  std::optional<int64_t> parent;
  int depth = 0;
  PartialAssignment fixings;
  double local_lb = 0.0;
  int many_body_count = -1;
  bool evaluated = false;
  NodeOutcomeKind outcome = NodeOutcomeKind::kPrunedInfeasible;
  PruneReason reason = PruneReason::kNone;
};

enum class SolveStatus {
  kOptimal,
  kGapReached,
  kNodeLimit,
  kTimeLimit,
  kInfeasible,
};

std::string_view SolveStatusName(SolveStatus status);

struct SolveResult {
  SolveStatus status = SolveStatus::kInfeasible;
  std::optional<Solution> best_feasible;
  std::optional<Solution> best_penalized;
  std::optional<double> global_lb;
  double penalty = 0.0;
  int64_t nodes_evaluated = 0;
  int64_t total_queries = 0;
  int master_many_body = 0;
  std::vector<TraceEvent> trace;
  std::vector<NodeRecord> nodes;
};

class Solver {
 public:
  // `vqa` defaults to a QaoaSolver and must outlive the Solver.
  Solver(BlpInstance master, SolverConfig config,
         const VariationalSolver* vqa = nullptr);

  const BlpInstance& master() const { return master_; }
  double penalty() const { return penalty_; }
  const IsingModel& master_model() const { return master_model_; }
  const Incumbent& incumbent() const { return incumbent_; }
  const SolverConfig& config() const { return config_; }

  // Propagated root; nullopt when propagation alone proves infeasibility.
  std::optional<Node> MakeRoot();

  // Evaluates one node against the current incumbent, updating it. Does not
  // touch the open-node queue.
  NodeOutcome EvaluateNode(const Node& node);

  SolveResult Solve();

 private:
  struct Prepared;
  struct OpenKey {
    double lb;
    int depth;
    int64_t id;
    bool operator<(const OpenKey& o) const;
  };

  Prepared Prepare(const Node& node) const;
  VqaRun Explore(const Node& node, const Prepared& prepared) const;
  bool NeedsExploration(const Prepared& prepared) const;
  NodeOutcome Finish(const Node& node, const Prepared& prepared,
                     std::optional<VqaRun> precomputed, bool enqueue_children);

  std::optional<Node> MakeChild(const Node& parent, double parent_lb, int var,
                                int value,
                                const std::optional<QaoaParams>& warm);
  void Emit(EventKind kind, std::optional<double> expectation = {},
            std::optional<int64_t> query_index = {},
            std::optional<double> many_body_fraction = {},
            std::optional<std::string> status = {});
  void MaybeEmitBoundUpdate();
  std::optional<double> GlobalLowerBound() const;
  std::optional<double> UpperBound() const;

  void Enqueue(Node node);
  void OpenNode(int64_t id, double lb);
  void CloseNode(int64_t id);
  void UpdateOpenLb(int64_t id, double lb);
  NodeRecord& RecordNode(const Node& node);

  BlpInstance master_;
  SolverConfig config_;
  std::unique_ptr<VariationalSolver> owned_vqa_;
  const VariationalSolver* vqa_ = nullptr;
  double penalty_ = 0.0;
  double feasible_ceiling_ = 0.0;  // max objective any feasible x can have
  IsingModel master_model_;
  Incumbent incumbent_;
  TraceRecorder recorder_;
  std::map<OpenKey, Node> queue_;
  std::map<int64_t, double> open_members_;  // queued or in evaluation
  std::multiset<double> open_lbs_;
  std::vector<NodeRecord> records_;  // indexed by node id
  int64_t next_id_ = 0;
  int64_t nodes_evaluated_ = 0;
  int64_t total_queries_ = 0;
  std::optional<double> last_emitted_lb_;
};

// Convenience wrapper: Solver(instance, config).Solve().
SolveResult Solve(const BlpInstance& instance, const SolverConfig& config);

struct BaselineResult {
  std::optional<Solution> best_penalized;
  std::optional<Solution> best_feasible;
  double penalty = 0.0;
  double final_expectation = 0.0;  // constant included
  OptimizerTrace optimizer_trace;  // constant included
  // One optimizer_query event per query; the last also carries the best
  // sampled penalised cost as `ub` and status "done".
  std::vector<TraceEvent> trace;
};

// Plain QAOA on the master model with a single query budget, sampled once.
BaselineResult RunPlainQaoa(const BlpInstance& instance,
                            const SolverConfig& config, int64_t max_queries);

}  // namespace qcbb

#endif  // QCBB_ENGINE_H_
