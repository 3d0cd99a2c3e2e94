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

// Statevector QAOA over diagonal Ising cost Hamiltonians.
//
// Basis index z encodes spin i in bit i (LSB first): bit clear is s_i = -1
// (x_i = 0), bit set is s_i = +1 (x_i = 1).

#ifndef QCBB_VQA_H_
#define QCBB_VQA_H_

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qcbb/ising.h"
#include "qcbb/random.h"

namespace qcbb {

inline constexpr int kMaxSimulatedSpins = 22;

struct CostDiagonal {
  int num_spins = 0;
  std::vector<double> energies;  // size 2^num_spins
};

struct QaoaParams {
  std::vector<double> gammas;
  std::vector<double> betas;

  int depth() const { return static_cast<int>(gammas.size()); }
  bool operator==(const QaoaParams&) const = default;
};

using StateVector = std::vector<std::complex<double>>;

struct SampleSet {
  int num_bits = 0;
  std::vector<uint64_t> bitstrings;  // distinct basis indices, ascending
  std::vector<int64_t> counts;       // same length, all positive
  int64_t shots = 0;

  int size() const { return static_cast<int>(bitstrings.size()); }
  // Sample `l` as a 0/1 vector of length num_bits.
  Assignment Bits(int l) const;
};

struct OptimizerQuery {
  int64_t index = 0;  // 0-based, strictly increasing
  double value = 0.0;
};

struct OptimizerTrace {
  std::vector<OptimizerQuery> queries;
  int64_t total() const { return static_cast<int64_t>(queries.size()); }
};

// Throws std::length_error above `max_spins`.
CostDiagonal BuildDiagonal(const IsingModel& model, bool include_constant,
                           int max_spins = kMaxSimulatedSpins);

StateVector UniformState(int num_spins);

// prod_l Mixer(beta_l) Phase(gamma_l) |+>^n with
// Phase(g)|z> = exp(-i g E_z)|z> and Mixer(b) = prod_q exp(-i b X_q).
StateVector QaoaState(const CostDiagonal& diagonal, const QaoaParams& params);

double Expectation(std::span<const std::complex<double>> state,
                   const CostDiagonal& diagonal);

// `shots` independent measurements in the computational basis.
SampleSet Sample(std::span<const std::complex<double>> state, int64_t shots,
                 Rng& rng);

// Derivative-free minimisation of `objective` under a hard evaluation budget.
// Adaptive-coefficient Nelder-Mead, restarted around the best point whenever
// the simplex collapses and budget remains.
struct MinimizeResult {
  std::vector<double> best_point;
  double best_value = 0.0;
  OptimizerTrace trace;
};

MinimizeResult NelderMeadMinimize(
    const std::function<double(std::span<const double>)>& objective,
    std::vector<double> start, double initial_step, int64_t max_queries,
    double tolerance = 1e-8);

struct AngleOptimization {
  QaoaParams best;
  double best_value = 0.0;  // expectation at `best`
  OptimizerTrace trace;
};

// Minimises Expectation(QaoaState(diagonal, .), diagonal) over 2p angles.
// Initial angles are uniform in (0, pi) drawn from `seed` unless `initial` is
// given. Never evaluates more than `max_queries` times.
AngleOptimization OptimizeAngles(const CostDiagonal& diagonal, int depth,
                                 int64_t max_queries, uint64_t seed,
                                 const std::optional<QaoaParams>& initial = {});

// The variational subroutine run at every tree node. Implementations must be
// pure functions of (model, options, seed).
struct VqaOptions {
  int depth = 3;
  int64_t max_queries = 50;
  int64_t shots = 1024;
  std::optional<QaoaParams> warm_start;
};

struct VqaRun {
  SampleSet samples;
  QaoaParams params;
  double best_expectation = 0.0;  // constant excluded
  OptimizerTrace trace;           // constant excluded
};

class VariationalSolver {
 public:
  virtual ~VariationalSolver() = default;
  virtual VqaRun SolveAndSample(const IsingModel& model,
                                const VqaOptions& options,
                                uint64_t seed) const = 0;
};

class QaoaSolver final : public VariationalSolver {
 public:
  VqaRun SolveAndSample(const IsingModel& model, const VqaOptions& options,
                        uint64_t seed) const override;
};

}  // namespace qcbb

#endif  // QCBB_VQA_H_
