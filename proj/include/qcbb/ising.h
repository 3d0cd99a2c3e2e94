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

// Exact encoding of a penalised binary linear program as an Ising model.
//
// Storage convention: every stored coefficient is the weight it contributes to
// the energy, i.e.
//
//   E(s) = sum_{i<j} couplings[(i,j)] s_i s_j + sum_i fields[i] s_i + constant
//
// with s in {-1,+1}^n and x = (s + 1) / 2. For a program (c, A, b) and
// penalty M this gives
//
//   couplings[(i,j)] = M (A^T A)_ij / 2
//   fields[i]        = (c - 2 M A^T b + M A^T A 1)_i / 2
//   transform part   = M/4 1^T A^T A 1 + M/4 tr(A^T A) + 1^T c / 2
//                      - M b^T A 1 + M b^T b
//
// so that E(s(x)) = c^T x + M ||A x - b||^2 for every binary x. The trace term
// comes from s_i^2 = 1 on the diagonal of the quadratic form.

#ifndef QCBB_ISING_H_
#define QCBB_ISING_H_

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "qcbb/blp.h"

namespace qcbb {

using Spins = std::vector<int8_t>;

struct ConstantLedger {
  double transform_part = 0.0;
  double objective_part = 0.0;  // sum of c_k x_k over fixed variables

  double total() const { return transform_part + objective_part; }
  bool operator==(const ConstantLedger&) const = default;
};

struct IsingModel {
  int num_spins = 0;
  std::map<std::pair<int, int>, double> couplings;  // keys i < j, no zeros
  std::vector<double> fields;
  ConstantLedger constant;
  double penalty = 0.0;

  double Constant() const { return constant.total(); }
};

// Energy of `spins` under `model`, constant included.
double Energy(const IsingModel& model, std::span<const int8_t> spins);

Spins SigmaOfX(std::span<const uint8_t> x);
Assignment XOfSigma(std::span<const int8_t> spins);

// Throws on invalid dimensions or a non-positive penalty. Accepts zero-width
// systems (all variables fixed).
IsingModel Encode(const BlpInstance& instance, double penalty);

// A subproblem obtained by fixing variables of a master program.
struct ReducedProblem {
  BlpInstance core;             // free columns only, adjusted right-hand side
  IsingModel model;             // Encode(core) plus the objective ledger
  std::vector<int> index_map;   // core variable -> master variable
  PartialAssignment fixings;    // over master indices
};

// Removes every fixed column: b~ = b - A_F x_F, and c~, A~ drop the fixed
// columns. For every completion y of the free variables,
// Energy(model, SigmaOfX(y)) equals PenalizedCost(master, merge(fixings, y)).
ReducedProblem Reduce(const BlpInstance& master, double penalty,
                      const PartialAssignment& fixings);

// Fixes more master variables on top of an existing reduction. The result is
// identical to reducing the master by the union of fixings in one step.
ReducedProblem Reduce(const ReducedProblem& parent,
                      const PartialAssignment& extra_fixings);

// Merges a completion of the free core variables into a master assignment.
Assignment CompleteAssignment(const ReducedProblem& reduced,
                              std::span<const uint8_t> core_values);

// Number of stored pairwise terms.
int ManyBodyCount(const IsingModel& model);

}  // namespace qcbb

#endif  // QCBB_ISING_H_
