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

// Binary linear programs with equality constraints,
//
//   min c^T x  s.t.  A x = b,  x in {0,1}^n,
//
// together with the penalty (big-M) machinery used to fold the constraints
// into an unconstrained objective.

#ifndef QCBB_BLP_H_
#define QCBB_BLP_H_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcbb {

class InvalidInstanceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A full binary assignment, one entry per variable, each 0 or 1.
using Assignment = std::vector<uint8_t>;

struct BlpInstance {
  std::string name;
  int num_vars = 0;
  int num_rows = 0;
  std::vector<double> cost;    // length num_vars
  std::vector<double> matrix;  // row-major, num_rows * num_vars
  std::vector<double> rhs;     // length num_rows
  double kappa = 1.0;
  std::optional<double> optimum;  // known optimum, test fixtures only

  double Coef(int row, int col) const {
    return matrix[static_cast<size_t>(row) * num_vars + col];
  }
  double& Coef(int row, int col) {
    return matrix[static_cast<size_t>(row) * num_vars + col];
  }

  // Throws InvalidInstanceError on inconsistent sizes or non-finite data.
  // Zero-width systems are accepted; they arise as fully fixed subproblems.
  void CheckDimensions() const;

  // CheckDimensions() plus n >= 1, m >= 1 and kappa > 0.
  void Validate() const;

  bool operator==(const BlpInstance&) const = default;
};

// Variables fixed so far; the rest are free. Indices refer to the instance the
// assignment was created for.
class PartialAssignment {
 public:
  static constexpr int8_t kFree = -1;

  PartialAssignment() = default;
  explicit PartialAssignment(int num_vars) : values_(num_vars, kFree) {}

  int size() const { return static_cast<int>(values_.size()); }
  bool IsFixed(int var) const { return values_.at(var) != kFree; }
  int Value(int var) const { return values_.at(var); }

  // Fixing a variable twice to the same value is a no-op; to a different
  // value it throws std::invalid_argument.
  void Fix(int var, int value);

  int NumFixed() const;
  std::vector<int> FreeVars() const;
  bool IsComplete() const { return NumFixed() == size(); }

  // Requires IsComplete().
  Assignment ToAssignment() const;

  std::span<const int8_t> raw() const { return values_; }

  bool operator==(const PartialAssignment&) const = default;

 private:
  std::vector<int8_t> values_;
};

// M = (1/kappa) * sum_i |c_i|, floored at 1/kappa for an all-zero objective.
double ComputeBigM(const BlpInstance& instance);

// Row activities A x.
std::vector<double> Activities(const BlpInstance& instance,
                               std::span<const uint8_t> x);

// c^T x.
double Objective(const BlpInstance& instance, std::span<const uint8_t> x);

// Squared residual ||A x - b||^2.
double SquaredViolation(const BlpInstance& instance,
                        std::span<const uint8_t> x);

bool IsFeasible(const BlpInstance& instance, std::span<const uint8_t> x,
                double tol = 1e-9);

// c^T x + M ||A x - b||^2.
double PenalizedCost(const BlpInstance& instance, std::span<const uint8_t> x,
                     double penalty);

struct SppOptions {
  int num_vars = 15;
  int num_rows = 6;
  int cost_low = 1;
  int cost_high = 20;
};

// Random set partitioning instance: a planted partition of the rows into at
// least two blocks guarantees feasibility; the remaining columns are random
// proper non-empty subsets. Deterministic in `seed`.
BlpInstance GenerateSpp(const SppOptions& options, uint64_t seed);

struct BruteForceResult {
  bool feasible = false;
  double value = 0.0;              // optimum, valid when feasible
  Assignment argmin;               // first minimiser in enumeration order
  double worst_feasible = 0.0;     // max feasible objective, valid when feasible
  int64_t num_feasible = 0;
};

inline constexpr int kBruteForceMaxVars = 20;

// Exhaustive enumeration of all 2^n assignments. Throws std::invalid_argument
// for n > kBruteForceMaxVars.
BruteForceResult BruteForceOptimum(const BlpInstance& instance);

std::string InstanceToJson(const BlpInstance& instance);
BlpInstance InstanceFromJson(const std::string& text);

void SaveInstance(const BlpInstance& instance, const std::string& path);
BlpInstance LoadInstance(const std::string& path);

}  // namespace qcbb

#endif  // QCBB_BLP_H_
