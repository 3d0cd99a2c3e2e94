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

#include "qcbb/engine.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace qcbb {

namespace {

// Absolute slack on "lower bound meets incumbent".
constexpr double kOptimalityTolerance = 1e-9;

constexpr uint64_t kBoundStream = 7;
constexpr uint64_t kVqaStream = 11;
constexpr uint64_t kBaselineStream = 0xba5e;

}  // namespace

ConflictData ConflictValues(const BlpInstance& core, const SampleSet& samples,
                            double tol) {
  if (samples.num_bits != core.num_vars) {
    throw std::invalid_argument("samples have " +
                                std::to_string(samples.num_bits) +
                                " bits, subproblem has " +
                                std::to_string(core.num_vars) + " variables");
  }
  ConflictData data;
  data.num_rows = core.num_rows;
  data.num_samples = samples.size();
  data.num_vars = core.num_vars;
  data.violations.assign(static_cast<size_t>(data.num_rows) * data.num_samples,
                         0);
  data.scores.assign(data.num_rows, 0.0);
  data.incidence.assign(static_cast<size_t>(data.num_rows) * data.num_vars, 0);
  data.conflict.assign(data.num_vars, 0.0);

  const double shots = static_cast<double>(samples.shots);
  for (int l = 0; l < data.num_samples; ++l) {
    const Assignment x = samples.Bits(l);
    const std::vector<double> activity = Activities(core, x);
    for (int j = 0; j < data.num_rows; ++j) {
      if (std::abs(activity[j] - core.rhs[j]) > tol) {
        data.violations[static_cast<size_t>(j) * data.num_samples + l] = 1;
        data.scores[j] += static_cast<double>(samples.counts[l]) / shots;
      }
    }
  }
  for (int j = 0; j < data.num_rows; ++j) {
    for (int i = 0; i < data.num_vars; ++i) {
      if (core.Coef(j, i) == 0.0) continue;
      data.incidence[static_cast<size_t>(j) * data.num_vars + i] = 1;
      data.conflict[i] += data.scores[j];
    }
  }
  return data;
}

int SelectBranchingVariable(std::span<const double> conflict,
                            std::span<const double> fields) {
  if (conflict.empty()) {
    throw std::invalid_argument("no variable to branch on");
  }
  int best = 0;
  for (int i = 1; i < static_cast<int>(conflict.size()); ++i) {
    if (conflict[i] > conflict[best]) best = i;
  }
  if (conflict[best] > 0.0) return best;
  if (fields.size() != conflict.size()) {
    throw std::invalid_argument("fallback needs one field per variable");
  }
  best = 0;
  for (int i = 1; i < static_cast<int>(fields.size()); ++i) {
    if (std::abs(fields[i]) > std::abs(fields[best])) best = i;
  }
  return best;
}

PropagationResult Propagate(const BlpInstance& instance,
                            PartialAssignment fixings, double tol) {
  if (fixings.size() != instance.num_vars) {
    throw std::invalid_argument("fixings do not match the instance");
  }
  PropagationResult result;
  bool changed = true;
  while (changed && !result.infeasible) {
    changed = false;
    for (int j = 0; j < instance.num_rows && !result.infeasible; ++j) {
      double residual = instance.rhs[j];
      double min_activity = 0.0;
      double max_activity = 0.0;
      for (int i = 0; i < instance.num_vars; ++i) {
        const double a = instance.Coef(j, i);
        if (a == 0.0) continue;
        if (fixings.IsFixed(i)) {
          residual -= a * fixings.Value(i);
        } else if (a < 0.0) {
          min_activity += a;
        } else {
          max_activity += a;
        }
      }
      if (min_activity > residual + tol || max_activity < residual - tol) {
        result.infeasible = true;
        break;
      }
      const bool at_min = std::abs(min_activity - residual) <= tol;
      const bool at_max = std::abs(max_activity - residual) <= tol;
      if (!at_min && !at_max) continue;
      for (int i = 0; i < instance.num_vars; ++i) {
        const double a = instance.Coef(j, i);
        if (a == 0.0 || fixings.IsFixed(i)) continue;
        // At the minimum every positive coefficient is off and every
        // negative one on; at the maximum the reverse.
        const int value = at_min ? (a > 0.0 ? 0 : 1) : (a > 0.0 ? 1 : 0);
        fixings.Fix(i, value);
        ++result.num_implied;
        changed = true;
      }
    }
  }
  result.fixings = std::move(fixings);
  return result;
}

bool Incumbent::Offer(const BlpInstance& master, double penalty,
                      const Assignment& x) {
  bool improved = false;
  const double penalized = PenalizedCost(master, x, penalty);
  if (!best_penalized || penalized < best_penalized->value) {
    best_penalized = Solution{penalized, x};
    improved = true;
  }
  if (IsFeasible(master, x)) {
    const double objective = Objective(master, x);
    if (!best_feasible || objective < best_feasible->value) {
      best_feasible = Solution{objective, x};
      improved = true;
    }
  }
  return improved;
}

void SolverConfig::Validate() const {
  if (depth < 1) throw std::invalid_argument("QAOA depth must be >= 1");
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  if (node_queries < 1) throw std::invalid_argument("node queries must be >= 1");
  if (node_limit && *node_limit < 1) {
    throw std::invalid_argument("node limit must be positive");
  }
  if (time_limit_s && !(*time_limit_s > 0.0)) {
    throw std::invalid_argument("time limit must be positive");
  }
  if (gap_target && !(*gap_target >= 0.0)) {
    throw std::invalid_argument("gap target must be nonnegative");
  }
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (bound.rounding_rounds < 1) {
    throw std::invalid_argument("rounding rounds must be >= 1");
  }
  if (bound.sdp_max_iters < 0) {
    throw std::invalid_argument("SDP iteration cap must be nonnegative");
  }
}

std::string_view SolveStatusName(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kGapReached:
      return "gap_reached";
    case SolveStatus::kNodeLimit:
      return "node_limit";
    case SolveStatus::kTimeLimit:
      return "time_limit";
    case SolveStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

struct Solver::Prepared {
  PropagationResult propagation;
  std::optional<ReducedProblem> reduced;
  BoundResult bound;
  double lb = -std::numeric_limits<double>::infinity();
  bool penalty_infeasible = false;
};

bool Solver::OpenKey::operator<(const OpenKey& o) const {
  if (lb != o.lb) return lb < o.lb;
  if (depth != o.depth) return depth > o.depth;
  return id < o.id;
}

Solver::Solver(BlpInstance master, SolverConfig config,
               const VariationalSolver* vqa)
    : master_(std::move(master)),
      config_(std::move(config)),
      vqa_(vqa),
      recorder_(config_.clock) {
  master_.Validate();
  config_.Validate();
  if (vqa_ == nullptr) {
    owned_vqa_ = std::make_unique<QaoaSolver>();
    vqa_ = owned_vqa_.get();
  }
  penalty_ = ComputeBigM(master_);
  for (double c : master_.cost) feasible_ceiling_ += std::max(c, 0.0);
  master_model_ = Encode(master_, penalty_);
}

std::optional<double> Solver::UpperBound() const {
  if (!incumbent_.best_penalized) return std::nullopt;
  return incumbent_.best_penalized->value;
}

std::optional<double> Solver::GlobalLowerBound() const {
  const std::optional<double> ub = UpperBound();
  if (open_lbs_.empty()) return ub;
  const double frontier = *open_lbs_.begin();
  if (!std::isfinite(frontier)) return std::nullopt;
  return ub ? std::min(frontier, *ub) : frontier;
}

void Solver::Emit(EventKind kind, std::optional<double> expectation,
                  std::optional<int64_t> query_index,
                  std::optional<double> many_body_fraction,
                  std::optional<std::string> status) {
  TraceEvent event;
  event.node_index = nodes_evaluated_;
  event.kind = kind;
  event.lb = GlobalLowerBound();
  event.ub = UpperBound();
  event.expectation = expectation;
  event.query_index = query_index;
  event.many_body_fraction = many_body_fraction;
  event.status = std::move(status);
  recorder_.Record(std::move(event));
}

void Solver::MaybeEmitBoundUpdate() {
  const std::optional<double> lb = GlobalLowerBound();
  if (!lb || (last_emitted_lb_ && *last_emitted_lb_ == *lb)) return;
  last_emitted_lb_ = lb;
  Emit(EventKind::kBoundUpdate);
}

void Solver::OpenNode(int64_t id, double lb) {
  open_members_.emplace(id, lb);
  open_lbs_.insert(lb);
}

void Solver::CloseNode(int64_t id) {
  auto it = open_members_.find(id);
  if (it == open_members_.end()) return;
  open_lbs_.erase(open_lbs_.find(it->second));
  open_members_.erase(it);
}

void Solver::UpdateOpenLb(int64_t id, double lb) {
  auto it = open_members_.find(id);
  if (it == open_members_.end()) return;
  open_lbs_.erase(open_lbs_.find(it->second));
  it->second = lb;
  open_lbs_.insert(lb);
}

void Solver::Enqueue(Node node) {
  OpenNode(node.id, node.local_lb);
  const OpenKey key{node.local_lb, node.depth, node.id};
  queue_.emplace(key, std::move(node));
}

NodeRecord& Solver::RecordNode(const Node& node) {
  NodeRecord record;
  record.id = node.id;
  record.parent = node.parent;
  record.depth = node.depth;
  record.fixings = node.fixings;
  record.local_lb = node.local_lb;
  records_.push_back(std::move(record));
  return records_.back();
}

std::optional<Node> Solver::MakeRoot() {
  PropagationResult prop =
      Propagate(master_, PartialAssignment(master_.num_vars));
  Node root;
  root.id = next_id_++;
  root.depth = 0;
  root.fixings = std::move(prop.fixings);
  root.local_lb = -std::numeric_limits<double>::infinity();
  root.seed = MixSeed(config_.seed, static_cast<uint64_t>(root.id));
  NodeRecord& record = RecordNode(root);
  if (prop.infeasible) {
    record.reason = PruneReason::kPropagation;
    return std::nullopt;
  }
  return root;
}

std::optional<Node> Solver::MakeChild(const Node& parent, double parent_lb,
                                      int var, int value,
                                      const std::optional<QaoaParams>& warm) {
  PartialAssignment fixings = parent.fixings;
  fixings.Fix(var, value);
  PropagationResult prop = Propagate(master_, std::move(fixings));
  Node child;
  child.id = next_id_++;
  child.parent = parent.id;
  child.depth = parent.depth + 1;
  child.fixings = std::move(prop.fixings);
  child.local_lb = parent_lb;
  child.seed = MixSeed(config_.seed, static_cast<uint64_t>(child.id));
  if (config_.warm_start) child.warm_start = warm;
  NodeRecord& record = RecordNode(child);
  if (prop.infeasible) {
    record.reason = PruneReason::kPropagation;
    Emit(EventKind::kPrune, {}, {}, {}, "infeasible");
    return std::nullopt;
  }
  return child;
}

Solver::Prepared Solver::Prepare(const Node& node) const {
  Prepared p;
  p.propagation = Propagate(master_, node.fixings);
  if (p.propagation.infeasible) return p;
  p.reduced = Reduce(master_, penalty_, p.propagation.fixings);
  const IsingModel& model = p.reduced->model;
  if (model.num_spins > 0) {
    BoundConfig bound_config = config_.bound;
    bound_config.seed = MixSeed(node.seed, kBoundStream);
    p.bound = LowerBound(model, bound_config);
  }
  p.lb = std::max(node.local_lb, p.bound.lb_value + model.Constant());
  p.penalty_infeasible = InfeasibleByBound(p.lb - model.Constant(),
                                           model.Constant(), penalty_) &&
                         p.lb > feasible_ceiling_;
  return p;
}

bool Solver::NeedsExploration(const Prepared& prepared) const {
  if (prepared.propagation.infeasible || !prepared.reduced) return false;
  if (prepared.reduced->core.num_vars == 0) return false;
  if (!config_.bound_pruning || config_.vqa_before_pruning) return true;
  if (prepared.penalty_infeasible) return false;
  const std::optional<double> ub = UpperBound();
  return !ub || prepared.lb < *ub;
}

VqaRun Solver::Explore(const Node& node, const Prepared& prepared) const {
  VqaOptions options;
  options.depth = config_.depth;
  options.max_queries = config_.node_queries;
  options.shots = config_.shots;
  options.warm_start = node.warm_start;
  return vqa_->SolveAndSample(prepared.reduced->model, options,
                              MixSeed(node.seed, kVqaStream));
}

NodeOutcome Solver::Finish(const Node& node, const Prepared& prepared,
                           std::optional<VqaRun> precomputed,
                           bool enqueue_children) {
  ++nodes_evaluated_;
  NodeOutcome outcome;
  NodeRecord& record = records_.at(node.id);
  record.evaluated = true;
  record.fixings = prepared.propagation.fixings;

  auto close = [&](NodeOutcomeKind kind, PruneReason reason,
                   const char* status) {
    outcome.kind = kind;
    outcome.reason = reason;
    record.outcome = kind;
    record.reason = reason;
    CloseNode(node.id);
    if (status != nullptr) Emit(EventKind::kPrune, {}, {}, {}, status);
    MaybeEmitBoundUpdate();
    return outcome;
  };

  if (prepared.propagation.infeasible) {
    Emit(EventKind::kNodeStart);
    outcome.local_lb = node.local_lb;
    record.local_lb = node.local_lb;
    return close(NodeOutcomeKind::kPrunedInfeasible, PruneReason::kPropagation,
                 "infeasible");
  }

  const ReducedProblem& reduced = *prepared.reduced;
  const double constant = reduced.model.Constant();
  outcome.many_body_count = ManyBodyCount(reduced.model);
  record.many_body_count = outcome.many_body_count;
  Emit(EventKind::kNodeStart, {}, {}, ManyBodyFraction(reduced.model,
                                                       master_model_));

  outcome.local_lb = prepared.lb;
  record.local_lb = prepared.lb;
  UpdateOpenLb(node.id, prepared.lb);
  MaybeEmitBoundUpdate();

  if (config_.bound_pruning && prepared.penalty_infeasible) {
    return close(NodeOutcomeKind::kPrunedInfeasible, PruneReason::kPenaltyBound,
                 "infeasible_bound");
  }

  if (reduced.core.num_vars == 0) {
    if (incumbent_.Offer(master_, penalty_, CompleteAssignment(reduced, {}))) {
      Emit(EventKind::kIncumbentUpdate);
    }
    outcome.kind = NodeOutcomeKind::kFathomedLeaf;
    record.outcome = outcome.kind;
    CloseNode(node.id);
    Emit(EventKind::kFathom);
    MaybeEmitBoundUpdate();
    return outcome;
  }

  auto prunable = [&] {
    const std::optional<double> ub = UpperBound();
    return config_.bound_pruning && ub && prepared.lb >= *ub;
  };
  if (!config_.vqa_before_pruning && prunable()) {
    return close(NodeOutcomeKind::kPrunedBound, PruneReason::kIncumbentBound,
                 "bound");
  }

  VqaRun run = precomputed ? std::move(*precomputed) : Explore(node, prepared);
  for (const OptimizerQuery& q : run.trace.queries) {
    recorder_.AdvanceLogicalTime(1.0);
    Emit(EventKind::kOptimizerQuery, q.value + constant, total_queries_++);
  }
  bool improved = false;
  for (int l = 0; l < run.samples.size(); ++l) {
    improved |= incumbent_.Offer(master_, penalty_,
                                 CompleteAssignment(reduced,
                                                    run.samples.Bits(l)));
  }
  if (improved) {
    Emit(EventKind::kIncumbentUpdate);
    MaybeEmitBoundUpdate();
  }

  if (config_.vqa_before_pruning && prunable()) {
    outcome.vqa = std::move(run);
    return close(NodeOutcomeKind::kPrunedBound, PruneReason::kIncumbentBound,
                 "bound");
  }

  const ConflictData conflict = ConflictValues(reduced.core, run.samples);
  const int local = SelectBranchingVariable(conflict.conflict,
                                            reduced.model.fields);
  outcome.branch_var = reduced.index_map[local];
  outcome.kind = NodeOutcomeKind::kBranched;
  record.outcome = outcome.kind;
  for (int value = 0; value <= 1; ++value) {
    std::optional<Node> child =
        MakeChild(node, prepared.lb, outcome.branch_var, value, run.params);
    if (child) outcome.children.push_back(std::move(*child));
  }
  if (enqueue_children) {
    for (const Node& child : outcome.children) Enqueue(child);
  }
  CloseNode(node.id);
  Emit(EventKind::kBranch);
  MaybeEmitBoundUpdate();
  outcome.vqa = std::move(run);
  return outcome;
}

NodeOutcome Solver::EvaluateNode(const Node& node) {
  if (node.id < 0 || node.id >= static_cast<int64_t>(records_.size())) {
    throw std::invalid_argument("node was not created by this solver");
  }
  const Prepared prepared = Prepare(node);
  return Finish(node, prepared, std::nullopt, /*enqueue_children=*/false);
}

SolveResult Solver::Solve() {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  };

  std::optional<SolveStatus> stop;
  std::optional<Node> root = MakeRoot();
  if (root) {
    Enqueue(std::move(*root));
  } else {
    Emit(EventKind::kPrune, {}, {}, {}, "infeasible");
  }

  while (!queue_.empty()) {
    const std::optional<double> lb = GlobalLowerBound();
    const std::optional<double> ub = UpperBound();
    const auto& feasible = incumbent_.best_feasible;
    if (feasible && lb && *lb >= feasible->value - kOptimalityTolerance) {
      stop = SolveStatus::kOptimal;
      break;
    }
    if (config_.gap_target && feasible && lb && ub &&
        (*ub - *lb) / std::max(1.0, std::abs(*ub)) <= *config_.gap_target) {
      stop = SolveStatus::kGapReached;
      break;
    }
    if (config_.node_limit && nodes_evaluated_ >= *config_.node_limit) {
      stop = SolveStatus::kNodeLimit;
      break;
    }
    if (config_.time_limit_s && elapsed() >= *config_.time_limit_s) {
      stop = SolveStatus::kTimeLimit;
      break;
    }

    int64_t batch_size = config_.workers;
    if (config_.node_limit) {
      batch_size = std::min(batch_size, *config_.node_limit - nodes_evaluated_);
    }
    std::vector<Node> batch;
    while (!queue_.empty() && static_cast<int64_t>(batch.size()) < batch_size) {
      batch.push_back(std::move(queue_.begin()->second));
      queue_.erase(queue_.begin());
    }

    if (batch.size() == 1) {
      const Prepared prepared = Prepare(batch.front());
      Finish(batch.front(), prepared, std::nullopt, true);
      continue;
    }

    // Node evaluations are pure in (node, seed); only the bookkeeping in
    // Finish is sequential.
    std::vector<std::future<Prepared>> prepare_jobs;
    for (const Node& node : batch) {
      prepare_jobs.push_back(std::async(std::launch::async, [this, &node] {
        return Prepare(node);
      }));
    }
    std::vector<Prepared> prepared;
    for (auto& job : prepare_jobs) prepared.push_back(job.get());
    std::vector<std::optional<std::future<VqaRun>>> explore_jobs(batch.size());
    for (size_t i = 0; i < batch.size(); ++i) {
      if (!NeedsExploration(prepared[i])) continue;
      explore_jobs[i] = std::async(std::launch::async, [this, &batch, &prepared, i] {
        return Explore(batch[i], prepared[i]);
      });
    }
    for (size_t i = 0; i < batch.size(); ++i) {
      std::optional<VqaRun> run;
      if (explore_jobs[i]) run = explore_jobs[i]->get();
      Finish(batch[i], prepared[i], std::move(run), true);
    }
  }

  SolveResult result;
  if (stop) {
    result.status = *stop;
  } else {
    result.status = incumbent_.best_feasible ? SolveStatus::kOptimal
                                             : SolveStatus::kInfeasible;
  }
  result.best_feasible = incumbent_.best_feasible;
  result.best_penalized = incumbent_.best_penalized;
  result.global_lb = GlobalLowerBound();
  result.penalty = penalty_;
  result.nodes_evaluated = nodes_evaluated_;
  result.total_queries = total_queries_;
  result.master_many_body = ManyBodyCount(master_model_);
  Emit(EventKind::kDone, {}, {}, {}, std::string(SolveStatusName(result.status)));
  result.trace = recorder_.events();
  result.nodes = records_;
  return result;
}

SolveResult Solve(const BlpInstance& instance, const SolverConfig& config) {
  Solver solver(instance, config);
  return solver.Solve();
}

BaselineResult RunPlainQaoa(const BlpInstance& instance,
                            const SolverConfig& config, int64_t max_queries) {
  instance.Validate();
  config.Validate();
  if (max_queries < 1) throw std::invalid_argument("need max_queries >= 1");
  BaselineResult result;
  result.penalty = ComputeBigM(instance);
  const IsingModel model = Encode(instance, result.penalty);
  const double constant = model.Constant();
  const CostDiagonal diagonal = BuildDiagonal(model, false);
  const uint64_t seed = MixSeed(config.seed, kBaselineStream);

  const AngleOptimization angles =
      OptimizeAngles(diagonal, config.depth, max_queries, MixSeed(seed, 0));
  const StateVector state = QaoaState(diagonal, angles.best);
  result.final_expectation = Expectation(state, diagonal) + constant;
  Rng rng(MixSeed(seed, 1));
  const SampleSet samples = Sample(state, config.shots, rng);
  Incumbent incumbent;
  for (int l = 0; l < samples.size(); ++l) {
    incumbent.Offer(instance, result.penalty, samples.Bits(l));
  }

  // One event per query; the sampled incumbent is reported on the last one.
  TraceRecorder recorder(config.clock);
  const auto& queries = angles.trace.queries;
  for (size_t k = 0; k < queries.size(); ++k) {
    const double value = queries[k].value + constant;
    result.optimizer_trace.queries.push_back({queries[k].index, value});
    recorder.AdvanceLogicalTime(1.0);
    TraceEvent e;
    e.node_index = 1;
    e.kind = EventKind::kOptimizerQuery;
    e.expectation = value;
    e.query_index = queries[k].index;
    if (k + 1 == queries.size()) {
      e.ub = incumbent.best_penalized->value;
      e.status = "done";
    }
    recorder.Record(std::move(e));
  }
  result.best_penalized = incumbent.best_penalized;
  result.best_feasible = incumbent.best_feasible;
  result.trace = recorder.events();
  return result;
}

}  // namespace qcbb
