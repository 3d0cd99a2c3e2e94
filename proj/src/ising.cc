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

#include "qcbb/ising.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qcbb {

namespace {

// Couplings below this fraction of the penalty count as structural zeros.
constexpr double kCouplingDropTolerance = 1e-12;

struct CoreReduction {
  BlpInstance core;
  std::vector<int> local_map;  // new core index -> old core index
  double objective_part = 0.0;
};

CoreReduction ReduceCore(const BlpInstance& core,
                         const PartialAssignment& local_fixings,
                         double base_objective) {
  if (local_fixings.size() != core.num_vars) {
    throw std::invalid_argument("fixings sized for " +
                                std::to_string(local_fixings.size()) +
                                " variables, problem has " +
                                std::to_string(core.num_vars));
  }
  CoreReduction out;
  out.objective_part = base_objective;
  out.local_map = local_fixings.FreeVars();
  const int n_free = static_cast<int>(out.local_map.size());

  BlpInstance& reduced = out.core;
  reduced.name = core.name;
  reduced.kappa = core.kappa;
  reduced.num_vars = n_free;
  reduced.num_rows = core.num_rows;
  reduced.rhs = core.rhs;
  reduced.cost.resize(n_free);
  reduced.matrix.assign(static_cast<size_t>(core.num_rows) * n_free, 0.0);

  for (int k = 0; k < core.num_vars; ++k) {
    if (!local_fixings.IsFixed(k) || local_fixings.Value(k) == 0) continue;
    out.objective_part += core.cost[k];
    for (int j = 0; j < core.num_rows; ++j) reduced.rhs[j] -= core.Coef(j, k);
  }
  for (int i = 0; i < n_free; ++i) {
    const int src = out.local_map[i];
    reduced.cost[i] = core.cost[src];
    for (int j = 0; j < core.num_rows; ++j) {
      reduced.Coef(j, i) = core.Coef(j, src);
    }
  }
  return out;
}

}  // namespace

double Energy(const IsingModel& model, std::span<const int8_t> spins) {
  if (static_cast<int>(spins.size()) != model.num_spins) {
    throw std::invalid_argument("spin vector has " +
                                std::to_string(spins.size()) +
                                " entries, model has " +
                                std::to_string(model.num_spins));
  }
  for (int8_t s : spins) {
    if (s != 1 && s != -1) throw std::invalid_argument("spins must be +-1");
  }
  double energy = model.Constant();
  for (int i = 0; i < model.num_spins; ++i) energy += model.fields[i] * spins[i];
  for (const auto& [key, w] : model.couplings) {
    energy += w * spins[key.first] * spins[key.second];
  }
  return energy;
}

Spins SigmaOfX(std::span<const uint8_t> x) {
  Spins spins(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 1) throw std::invalid_argument("binary entries must be 0 or 1");
    spins[i] = x[i] ? 1 : -1;
  }
  return spins;
}

Assignment XOfSigma(std::span<const int8_t> spins) {
  Assignment x(spins.size());
  for (size_t i = 0; i < spins.size(); ++i) {
    if (spins[i] != 1 && spins[i] != -1) {
      throw std::invalid_argument("spins must be +-1");
    }
    x[i] = spins[i] == 1 ? 1 : 0;
  }
  return x;
}

IsingModel Encode(const BlpInstance& instance, double penalty) {
  instance.CheckDimensions();
  if (!(penalty > 0.0) || !std::isfinite(penalty)) {
    throw std::invalid_argument("penalty must be positive and finite");
  }
  const int n = instance.num_vars;
  const int m = instance.num_rows;

  // Gram matrix A^T A, dense; n stays within simulator range.
  std::vector<double> gram(static_cast<size_t>(n) * n, 0.0);
  for (int j = 0; j < m; ++j) {
    for (int a = 0; a < n; ++a) {
      const double ja = instance.Coef(j, a);
      if (ja == 0.0) continue;
      for (int b = a; b < n; ++b) gram[a * n + b] += ja * instance.Coef(j, b);
    }
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < a; ++b) gram[a * n + b] = gram[b * n + a];
  }

  IsingModel model;
  model.num_spins = n;
  model.penalty = penalty;
  model.fields.assign(n, 0.0);

  double gram_sum = 0.0;
  double gram_trace = 0.0;
  double cost_sum = 0.0;
  double btab = 0.0;  // b^T A 1
  double btb = 0.0;
  for (int j = 0; j < m; ++j) {
    btb += instance.rhs[j] * instance.rhs[j];
    for (int i = 0; i < n; ++i) btab += instance.rhs[j] * instance.Coef(j, i);
  }
  for (int i = 0; i < n; ++i) {
    double atb_i = 0.0;
    for (int j = 0; j < m; ++j) atb_i += instance.Coef(j, i) * instance.rhs[j];
    double row_sum = 0.0;
    for (int k = 0; k < n; ++k) row_sum += gram[i * n + k];
    model.fields[i] =
        0.5 * (instance.cost[i] - 2.0 * penalty * atb_i + penalty * row_sum);
    gram_sum += row_sum;
    gram_trace += gram[i * n + i];
    cost_sum += instance.cost[i];
  }
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      const double w = 0.5 * penalty * gram[i * n + k];
      if (std::abs(w) > kCouplingDropTolerance * penalty) {
        model.couplings.emplace(std::make_pair(i, k), w);
      }
    }
  }
  model.constant.transform_part = 0.25 * penalty * gram_sum +
                                  0.25 * penalty * gram_trace +
                                  0.5 * cost_sum - penalty * btab +
                                  penalty * btb;
  return model;
}

ReducedProblem Reduce(const BlpInstance& master, double penalty,
                      const PartialAssignment& fixings) {
  master.CheckDimensions();
  CoreReduction r = ReduceCore(master, fixings, 0.0);
  ReducedProblem out;
  out.model = Encode(r.core, penalty);
  out.model.constant.objective_part = r.objective_part;
  out.core = std::move(r.core);
  out.index_map = std::move(r.local_map);
  out.fixings = fixings;
  return out;
}

ReducedProblem Reduce(const ReducedProblem& parent,
                      const PartialAssignment& extra_fixings) {
  if (extra_fixings.size() != parent.fixings.size()) {
    throw std::invalid_argument("extra fixings must be over master indices");
  }
  PartialAssignment merged = parent.fixings;
  PartialAssignment local(parent.core.num_vars);
  for (int v = 0; v < extra_fixings.size(); ++v) {
    if (!extra_fixings.IsFixed(v)) continue;
    merged.Fix(v, extra_fixings.Value(v));
    if (parent.fixings.IsFixed(v)) continue;
    for (int i = 0; i < parent.core.num_vars; ++i) {
      if (parent.index_map[i] == v) {
        local.Fix(i, extra_fixings.Value(v));
        break;
      }
    }
  }
  CoreReduction r = ReduceCore(parent.core, local,
                               parent.model.constant.objective_part);
  ReducedProblem out;
  out.model = Encode(r.core, parent.model.penalty);
  out.model.constant.objective_part = r.objective_part;
  out.core = std::move(r.core);
  out.index_map.reserve(r.local_map.size());
  for (int old_local : r.local_map) {
    out.index_map.push_back(parent.index_map[old_local]);
  }
  out.fixings = std::move(merged);
  return out;
}

Assignment CompleteAssignment(const ReducedProblem& reduced,
                              std::span<const uint8_t> core_values) {
  if (static_cast<int>(core_values.size()) != reduced.core.num_vars) {
    throw std::invalid_argument("completion has wrong length");
  }
  PartialAssignment full = reduced.fixings;
  for (size_t i = 0; i < core_values.size(); ++i) {
    full.Fix(reduced.index_map[i], core_values[i]);
  }
  return full.ToAssignment();
}

int ManyBodyCount(const IsingModel& model) {
  return static_cast<int>(model.couplings.size());
}

}  // namespace qcbb
