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

#include "qcbb/blp.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "qcbb/random.h"

namespace qcbb {

namespace {

bool AllFinite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

void CheckAssignmentSize(const BlpInstance& instance,
                         std::span<const uint8_t> x) {
  if (static_cast<int>(x.size()) != instance.num_vars) {
    throw std::invalid_argument("assignment has " + std::to_string(x.size()) +
                                " entries, instance has " +
                                std::to_string(instance.num_vars) +
                                " variables");
  }
}

}  // namespace

void BlpInstance::CheckDimensions() const {
  if (num_vars < 0 || num_rows < 0) {
    throw InvalidInstanceError("negative dimension");
  }
  if (static_cast<int>(cost.size()) != num_vars) {
    throw InvalidInstanceError("|c| = " + std::to_string(cost.size()) +
                               " but n = " + std::to_string(num_vars));
  }
  if (static_cast<int>(rhs.size()) != num_rows) {
    throw InvalidInstanceError("|b| = " + std::to_string(rhs.size()) +
                               " but m = " + std::to_string(num_rows));
  }
  if (matrix.size() != static_cast<size_t>(num_rows) * num_vars) {
    throw InvalidInstanceError("A must have m*n entries");
  }
  if (!AllFinite(cost) || !AllFinite(rhs) || !AllFinite(matrix)) {
    throw InvalidInstanceError("non-finite coefficient");
  }
}

void BlpInstance::Validate() const {
  CheckDimensions();
  if (num_vars < 1 || num_rows < 1) {
    throw InvalidInstanceError("instance needs n >= 1 and m >= 1");
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw InvalidInstanceError("kappa must be a positive finite number");
  }
}

void PartialAssignment::Fix(int var, int value) {
  if (value != 0 && value != 1) {
    throw std::invalid_argument("fixed value must be 0 or 1");
  }
  int8_t& slot = values_.at(var);
  if (slot != kFree && slot != value) {
    throw std::invalid_argument("variable " + std::to_string(var) +
                                " fixed twice with different values");
  }
  slot = static_cast<int8_t>(value);
}

int PartialAssignment::NumFixed() const {
  return static_cast<int>(
      std::count_if(values_.begin(), values_.end(),
                    [](int8_t v) { return v != kFree; }));
}

std::vector<int> PartialAssignment::FreeVars() const {
  std::vector<int> free;
  for (int i = 0; i < size(); ++i) {
    if (values_[i] == kFree) free.push_back(i);
  }
  return free;
}

Assignment PartialAssignment::ToAssignment() const {
  if (!IsComplete()) {
    throw std::logic_error("partial assignment has free variables");
  }
  return Assignment(values_.begin(), values_.end());
}

double ComputeBigM(const BlpInstance& instance) {
  if (!AllFinite(instance.cost) || !(instance.kappa > 0.0) ||
      !std::isfinite(instance.kappa)) {
    throw InvalidInstanceError("big-M needs finite costs and kappa > 0");
  }
  double sum = 0.0;
  for (double c : instance.cost) sum += std::abs(c);
  if (sum == 0.0) return 1.0 / instance.kappa;
  return sum / instance.kappa;
}

std::vector<double> Activities(const BlpInstance& instance,
                               std::span<const uint8_t> x) {
  CheckAssignmentSize(instance, x);
  std::vector<double> activity(instance.num_rows, 0.0);
  for (int j = 0; j < instance.num_rows; ++j) {
    for (int i = 0; i < instance.num_vars; ++i) {
      if (x[i]) activity[j] += instance.Coef(j, i);
    }
  }
  return activity;
}

double Objective(const BlpInstance& instance, std::span<const uint8_t> x) {
  CheckAssignmentSize(instance, x);
  double value = 0.0;
  for (int i = 0; i < instance.num_vars; ++i) {
    if (x[i]) value += instance.cost[i];
  }
  return value;
}

double SquaredViolation(const BlpInstance& instance,
                        std::span<const uint8_t> x) {
  const std::vector<double> activity = Activities(instance, x);
  double sq = 0.0;
  for (int j = 0; j < instance.num_rows; ++j) {
    const double r = activity[j] - instance.rhs[j];
    sq += r * r;
  }
  return sq;
}

bool IsFeasible(const BlpInstance& instance, std::span<const uint8_t> x,
                double tol) {
  const std::vector<double> activity = Activities(instance, x);
  for (int j = 0; j < instance.num_rows; ++j) {
    if (std::abs(activity[j] - instance.rhs[j]) > tol) return false;
  }
  return true;
}

double PenalizedCost(const BlpInstance& instance, std::span<const uint8_t> x,
                     double penalty) {
  return Objective(instance, x) + penalty * SquaredViolation(instance, x);
}

BlpInstance GenerateSpp(const SppOptions& options, uint64_t seed) {
  const int n = options.num_vars;
  const int m = options.num_rows;
  if (m < 2 || n <= m) {
    throw std::invalid_argument("set partitioning generator needs n > m >= 2");
  }
  if (options.cost_low > options.cost_high) {
    throw std::invalid_argument("cost_low must not exceed cost_high");
  }
  Rng rng(seed);

  BlpInstance instance;
  instance.name = "spp_n" + std::to_string(n) + "_m" + std::to_string(m) +
                  "_s" + std::to_string(seed);
  instance.num_vars = n;
  instance.num_rows = m;
  instance.rhs.assign(m, 1.0);
  instance.matrix.assign(static_cast<size_t>(m) * n, 0.0);

  // Columns as row-membership masks; planted blocks first, shuffled later.
  std::vector<std::vector<uint8_t>> columns;
  const int num_blocks = static_cast<int>(UniformInt(rng, 2, m));
  std::vector<int> rows(m);
  std::iota(rows.begin(), rows.end(), 0);
  Shuffle(rows.begin(), rows.end(), rng);
  std::vector<std::vector<uint8_t>> blocks(num_blocks,
                                           std::vector<uint8_t>(m, 0));
  for (int r = 0; r < m; ++r) {
    const int block =
        r < num_blocks ? r : static_cast<int>(UniformInt(rng, 0, num_blocks - 1));
    blocks[block][rows[r]] = 1;
  }
  for (auto& block : blocks) columns.push_back(std::move(block));

  while (static_cast<int>(columns.size()) < n) {
    const int size = static_cast<int>(UniformInt(rng, 1, m - 1));
    Shuffle(rows.begin(), rows.end(), rng);
    std::vector<uint8_t> column(m, 0);
    for (int r = 0; r < size; ++r) column[rows[r]] = 1;
    columns.push_back(std::move(column));
  }
  Shuffle(columns.begin(), columns.end(), rng);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) instance.Coef(j, i) = columns[i][j];
  }
  instance.cost.resize(n);
  for (int i = 0; i < n; ++i) {
    instance.cost[i] = static_cast<double>(
        UniformInt(rng, options.cost_low, options.cost_high));
  }
  return instance;
}

BruteForceResult BruteForceOptimum(const BlpInstance& instance) {
  instance.CheckDimensions();
  const int n = instance.num_vars;
  const int m = instance.num_rows;
  if (n > kBruteForceMaxVars) {
    throw std::invalid_argument("brute force refused: n = " +
                                std::to_string(n) + " exceeds " +
                                std::to_string(kBruteForceMaxVars));
  }
  double scale = 1.0;
  for (double a : instance.matrix) scale = std::max(scale, std::abs(a));
  for (double b : instance.rhs) scale = std::max(scale, std::abs(b));
  const double tol = 1e-9 * scale;

  BruteForceResult result;
  // Gray-code walk: one column toggles per step.
  std::vector<double> residual(m);
  for (int j = 0; j < m; ++j) residual[j] = -instance.rhs[j];
  Assignment x(n, 0);
  double objective = 0.0;
  const uint64_t total = uint64_t{1} << n;
  for (uint64_t step = 0; step < total; ++step) {
    if (step > 0) {
      const int flip = std::countr_zero(step);
      const double sign = x[flip] ? -1.0 : 1.0;
      x[flip] ^= 1;
      objective += sign * instance.cost[flip];
      for (int j = 0; j < m; ++j) residual[j] += sign * instance.Coef(j, flip);
    }
    bool feasible = true;
    for (int j = 0; j < m && feasible; ++j) {
      feasible = std::abs(residual[j]) <= tol;
    }
    if (!feasible) continue;
    ++result.num_feasible;
    if (!result.feasible || objective < result.value) {
      result.value = objective;
      result.argmin = x;
    }
    if (!result.feasible || objective > result.worst_feasible) {
      result.worst_feasible = objective;
    }
    result.feasible = true;
  }
  if (result.feasible) {
    // Remove drift accumulated by the incremental walk.
    result.value = Objective(instance, result.argmin);
  }
  return result;
}

std::string InstanceToJson(const BlpInstance& instance) {
  instance.CheckDimensions();
  nlohmann::json j;
  j["n"] = instance.num_vars;
  j["m"] = instance.num_rows;
  j["c"] = instance.cost;
  nlohmann::json a = nlohmann::json::array();
  for (int r = 0; r < instance.num_rows; ++r) {
    a.push_back(std::vector<double>(
        instance.matrix.begin() + static_cast<ptrdiff_t>(r) * instance.num_vars,
        instance.matrix.begin() +
            static_cast<ptrdiff_t>(r + 1) * instance.num_vars));
  }
  j["A"] = std::move(a);
  j["b"] = instance.rhs;
  if (!instance.name.empty()) j["name"] = instance.name;
  j["kappa"] = instance.kappa;
  if (instance.optimum) j["optimum"] = *instance.optimum;
  return j.dump(2);
}

BlpInstance InstanceFromJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed instance JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("instance JSON must be an object");
  for (const char* key : {"n", "m", "c", "A", "b"}) {
    if (!j.contains(key)) {
      throw ParseError(std::string("instance JSON lacks field \"") + key +
                       "\"");
    }
  }
  BlpInstance instance;
  try {
    instance.num_vars = j.at("n").get<int>();
    instance.num_rows = j.at("m").get<int>();
    instance.cost = j.at("c").get<std::vector<double>>();
    instance.rhs = j.at("b").get<std::vector<double>>();
    const auto rows = j.at("A").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rows.size()) != instance.num_rows) {
      throw ParseError("A has " + std::to_string(rows.size()) +
                       " rows, expected m = " +
                       std::to_string(instance.num_rows));
    }
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != instance.num_vars) {
        throw ParseError("row of A has " + std::to_string(row.size()) +
                         " entries, expected n = " +
                         std::to_string(instance.num_vars));
      }
      instance.matrix.insert(instance.matrix.end(), row.begin(), row.end());
    }
    if (j.contains("name")) instance.name = j.at("name").get<std::string>();
    if (j.contains("kappa")) instance.kappa = j.at("kappa").get<double>();
    if (j.contains("optimum")) instance.optimum = j.at("optimum").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad instance field: ") + e.what());
  }
  try {
    instance.Validate();
  } catch (const InvalidInstanceError& e) {
    throw ParseError(e.what());
  }
  return instance;
}

void SaveInstance(const BlpInstance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << InstanceToJson(instance) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

BlpInstance LoadInstance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return InstanceFromJson(buffer.str());
}

}  // namespace qcbb
