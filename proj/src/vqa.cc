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

#include "qcbb/vqa.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qcbb {

Assignment SampleSet::Bits(int l) const {
  Assignment x(num_bits);
  const uint64_t z = bitstrings.at(l);
  for (int i = 0; i < num_bits; ++i) x[i] = (z >> i) & 1U;
  return x;
}

CostDiagonal BuildDiagonal(const IsingModel& model, bool include_constant,
                           int max_spins) {
  const int n = model.num_spins;
  if (n > max_spins) {
    throw std::length_error("cannot simulate " + std::to_string(n) +
                            " spins; limit is " + std::to_string(max_spins));
  }
  CostDiagonal diagonal;
  diagonal.num_spins = n;
  const uint64_t dim = uint64_t{1} << n;
  diagonal.energies.resize(dim);
  const double offset = include_constant ? model.Constant() : 0.0;
  for (uint64_t z = 0; z < dim; ++z) {
    double e = offset;
    for (int i = 0; i < n; ++i) {
      e += ((z >> i) & 1U) ? model.fields[i] : -model.fields[i];
    }
    for (const auto& [key, w] : model.couplings) {
      const bool same = ((z >> key.first) & 1U) == ((z >> key.second) & 1U);
      e += same ? w : -w;
    }
    diagonal.energies[z] = e;
  }
  return diagonal;
}

StateVector UniformState(int num_spins) {
  const uint64_t dim = uint64_t{1} << num_spins;
  return StateVector(dim, std::complex<double>(
                              1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
}

StateVector QaoaState(const CostDiagonal& diagonal, const QaoaParams& params) {
  if (params.gammas.size() != params.betas.size()) {
    throw std::invalid_argument("QAOA needs as many gammas as betas");
  }
  const int n = diagonal.num_spins;
  const uint64_t dim = uint64_t{1} << n;
  if (diagonal.energies.size() != dim) {
    throw std::invalid_argument("diagonal length is not 2^num_spins");
  }
  StateVector state = UniformState(n);
  for (int layer = 0; layer < params.depth(); ++layer) {
    const double gamma = params.gammas[layer];
    for (uint64_t z = 0; z < dim; ++z) {
      const double phase = -gamma * diagonal.energies[z];
      state[z] *= std::complex<double>(std::cos(phase), std::sin(phase));
    }
    const double c = std::cos(params.betas[layer]);
    const std::complex<double> mis(0.0, -std::sin(params.betas[layer]));
    for (int q = 0; q < n; ++q) {
      const uint64_t bit = uint64_t{1} << q;
      for (uint64_t z = 0; z < dim; ++z) {
        if (z & bit) continue;
        const std::complex<double> a = state[z];
        const std::complex<double> b = state[z | bit];
        state[z] = c * a + mis * b;
        state[z | bit] = mis * a + c * b;
      }
    }
  }
  return state;
}

double Expectation(std::span<const std::complex<double>> state,
                   const CostDiagonal& diagonal) {
  if (state.size() != diagonal.energies.size()) {
    throw std::invalid_argument("state and diagonal sizes differ");
  }
  double value = 0.0;
  for (size_t z = 0; z < state.size(); ++z) {
    value += std::norm(state[z]) * diagonal.energies[z];
  }
  return value;
}

SampleSet Sample(std::span<const std::complex<double>> state, int64_t shots,
                 Rng& rng) {
  if (shots < 1) throw std::invalid_argument("need at least one shot");
  if (state.empty() || !std::has_single_bit(state.size())) {
    throw std::invalid_argument("state length must be a power of two");
  }
  std::vector<double> cumulative(state.size());
  double total = 0.0;
  for (size_t z = 0; z < state.size(); ++z) {
    total += std::norm(state[z]);
    cumulative[z] = total;
  }
  std::map<uint64_t, int64_t> tally;
  for (int64_t s = 0; s < shots; ++s) {
    const double u = UniformUnit(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    // Skip zero-probability entries that share the cumulative value.
    size_t z = static_cast<size_t>(it - cumulative.begin());
    while (z > 0 && std::norm(state[z]) == 0.0) --z;
    ++tally[z];
  }
  SampleSet samples;
  samples.num_bits = std::countr_zero(state.size());
  samples.shots = shots;
  for (const auto& [z, count] : tally) {
    samples.bitstrings.push_back(z);
    samples.counts.push_back(count);
  }
  return samples;
}

namespace {

// Budgeted objective: refuses to evaluate once the budget is spent.
class BudgetedObjective {
 public:
  BudgetedObjective(const std::function<double(std::span<const double>)>& f,
                    int64_t budget, MinimizeResult& result)
      : f_(f), budget_(budget), result_(result) {}

  bool exhausted() const { return result_.trace.total() >= budget_; }

  // Returns false without evaluating when the budget is spent.
  bool operator()(const std::vector<double>& x, double& value) {
    if (exhausted()) return false;
    value = f_(x);
    result_.trace.queries.push_back({result_.trace.total(), value});
    if (result_.trace.total() == 1 || value < result_.best_value) {
      result_.best_value = value;
      result_.best_point = x;
    }
    return true;
  }

 private:
  const std::function<double(std::span<const double>)>& f_;
  int64_t budget_;
  MinimizeResult& result_;
};

}  // namespace

MinimizeResult NelderMeadMinimize(
    const std::function<double(std::span<const double>)>& objective,
    std::vector<double> start, double initial_step, int64_t max_queries,
    double tolerance) {
  MinimizeResult result;
  result.best_point = start;
  if (max_queries < 1) return result;
  BudgetedObjective eval(objective, max_queries, result);
  double f_start;
  eval(start, f_start);

  const size_t d = start.size();
  if (d == 0) return result;
  const double dd = static_cast<double>(d);
  const double kReflect = 1.0;
  const double kExpand = 1.0 + 2.0 / dd;
  const double kContract = 0.75 - 1.0 / (2.0 * dd);
  const double kShrink = d > 1 ? 1.0 - 1.0 / dd : 0.5;

  double step = initial_step;
  while (!eval.exhausted() && step > 1e-6) {
    const double best_before = result.best_value;
    std::vector<std::vector<double>> simplex(d + 1, result.best_point);
    std::vector<double> values(d + 1, result.best_value);
    for (size_t i = 0; i < d; ++i) {
      simplex[i + 1][i] += step;
      if (!eval(simplex[i + 1], values[i + 1])) return result;
    }

    std::vector<size_t> order(d + 1);
    while (true) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return values[a] < values[b];
      });
      const size_t best = order.front();
      const size_t worst = order.back();
      const size_t second_worst = order[d - 1];

      double diameter = 0.0;
      for (size_t i = 0; i <= d; ++i) {
        for (size_t k = 0; k < d; ++k) {
          diameter = std::max(diameter,
                              std::abs(simplex[i][k] - simplex[best][k]));
        }
      }
      const double spread = values[worst] - values[best];
      if (spread <= tolerance * (1.0 + std::abs(values[best])) ||
          diameter <= tolerance) {
        break;
      }

      std::vector<double> centroid(d, 0.0);
      for (size_t i = 0; i <= d; ++i) {
        if (i == worst) continue;
        for (size_t k = 0; k < d; ++k) centroid[k] += simplex[i][k] / dd;
      }
      auto along = [&](double t) {
        std::vector<double> x(d);
        for (size_t k = 0; k < d; ++k) {
          x[k] = centroid[k] + t * (centroid[k] - simplex[worst][k]);
        }
        return x;
      };

      std::vector<double> reflected = along(kReflect);
      double f_reflected;
      if (!eval(reflected, f_reflected)) return result;

      if (f_reflected < values[best]) {
        std::vector<double> expanded = along(kReflect * kExpand);
        double f_expanded;
        if (!eval(expanded, f_expanded)) return result;
        if (f_expanded < f_reflected) {
          simplex[worst] = std::move(expanded);
          values[worst] = f_expanded;
        } else {
          simplex[worst] = std::move(reflected);
          values[worst] = f_reflected;
        }
        continue;
      }
      if (f_reflected < values[second_worst]) {
        simplex[worst] = std::move(reflected);
        values[worst] = f_reflected;
        continue;
      }
      const bool outside = f_reflected < values[worst];
      std::vector<double> contracted =
          along(outside ? kReflect * kContract : -kContract);
      double f_contracted;
      if (!eval(contracted, f_contracted)) return result;
      if (f_contracted < (outside ? f_reflected : values[worst])) {
        simplex[worst] = std::move(contracted);
        values[worst] = f_contracted;
        continue;
      }
      for (size_t i = 0; i <= d; ++i) {
        if (i == best) continue;
        for (size_t k = 0; k < d; ++k) {
          simplex[i][k] =
              simplex[best][k] + kShrink * (simplex[i][k] - simplex[best][k]);
        }
        if (!eval(simplex[i], values[i])) return result;
      }
    }
    // Collapsed; restart around the best point, smaller if nothing improved.
    if (!(result.best_value < best_before)) step *= 0.5;
  }
  return result;
}

AngleOptimization OptimizeAngles(const CostDiagonal& diagonal, int depth,
                                 int64_t max_queries, uint64_t seed,
                                 const std::optional<QaoaParams>& initial) {
  if (depth < 1) throw std::invalid_argument("QAOA depth must be >= 1");
  if (max_queries < 1) throw std::invalid_argument("need max_queries >= 1");
  std::vector<double> start(2 * depth);
  if (initial) {
    if (initial->depth() != depth ||
        static_cast<int>(initial->betas.size()) != depth) {
      throw std::invalid_argument("warm start has the wrong depth");
    }
    std::copy(initial->gammas.begin(), initial->gammas.end(), start.begin());
    std::copy(initial->betas.begin(), initial->betas.end(),
              start.begin() + depth);
  } else {
    Rng rng(seed);
    for (double& angle : start) angle = UniformReal(rng, 0.0, std::numbers::pi);
  }
  auto unpack = [depth](std::span<const double> x) {
    QaoaParams params;
    params.gammas.assign(x.begin(), x.begin() + depth);
    params.betas.assign(x.begin() + depth, x.end());
    return params;
  };
  auto objective = [&](std::span<const double> x) {
    return Expectation(QaoaState(diagonal, unpack(x)), diagonal);
  };
  MinimizeResult run = NelderMeadMinimize(objective, std::move(start),
                                          std::numbers::pi / 4.0, max_queries);
  AngleOptimization out;
  out.best = unpack(run.best_point);
  out.best_value = run.best_value;
  out.trace = std::move(run.trace);
  return out;
}

VqaRun QaoaSolver::SolveAndSample(const IsingModel& model,
                                  const VqaOptions& options,
                                  uint64_t seed) const {
  const CostDiagonal diagonal = BuildDiagonal(model, /*include_constant=*/false);
  AngleOptimization angles =
      OptimizeAngles(diagonal, options.depth, options.max_queries,
                     MixSeed(seed, 0), options.warm_start);
  const StateVector state = QaoaState(diagonal, angles.best);
  Rng rng(MixSeed(seed, 1));
  VqaRun run;
  run.samples = Sample(state, options.shots, rng);
  run.params = std::move(angles.best);
  run.best_expectation = angles.best_value;
  run.trace = std::move(angles.trace);
  return run;
}

}  // namespace qcbb
