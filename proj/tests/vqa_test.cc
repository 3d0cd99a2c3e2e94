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
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "qcbb/ising.h"
#include "test_util.h"

namespace qcbb {
namespace {

constexpr double kPi = std::numbers::pi;

BlpInstance TwoVar() {
  BlpInstance inst;
  inst.num_vars = 2;
  inst.num_rows = 1;
  inst.cost = {1, 2};
  inst.matrix = {1, 1};
  inst.rhs = {1};
  return inst;
}

CostDiagonal FromValues(std::vector<double> values) {
  CostDiagonal d;
  d.energies = std::move(values);
  while ((size_t{1} << d.num_spins) < d.energies.size()) ++d.num_spins;
  return d;
}

CostDiagonal RandomDiagonal(Rng& rng, int n) {
  std::vector<double> v(size_t{1} << n);
  for (double& e : v) e = UniformReal(rng, -5.0, 5.0);
  return FromValues(std::move(v));
}

QaoaParams RandomParams(Rng& rng, int p) {
  QaoaParams params;
  for (int l = 0; l < p; ++l) {
    params.gammas.push_back(UniformReal(rng, -kPi, kPi));
    params.betas.push_back(UniformReal(rng, -kPi, kPi));
  }
  return params;
}

double Norm(const StateVector& s) {
  double t = 0.0;
  for (const auto& a : s) t += std::norm(a);
  return std::sqrt(t);
}

TEST(BuildDiagonalTest, SingleSpin) {
  IsingModel model;
  model.num_spins = 1;
  model.fields = {2.5};
  model.constant.transform_part = 2.5;
  const CostDiagonal d = BuildDiagonal(model, true);
  EXPECT_EQ(d.energies, (std::vector<double>{0.0, 5.0}));
  const CostDiagonal shifted = BuildDiagonal(model, false);
  EXPECT_EQ(shifted.energies, (std::vector<double>{-2.5, 2.5}));
}

TEST(BuildDiagonalTest, TwoVariableEncodingLsbFirst) {
  const CostDiagonal d = BuildDiagonal(Encode(TwoVar(), 10), true);
  ASSERT_EQ(d.energies.size(), 4u);
  EXPECT_NEAR(d.energies[0], 10.0, 1e-12);
  EXPECT_NEAR(d.energies[1], 1.0, 1e-12);
  EXPECT_NEAR(d.energies[2], 2.0, 1e-12);
  EXPECT_NEAR(d.energies[3], 13.0, 1e-12);
}

TEST(BuildDiagonalTest, MatchesEnergyEverywhere) {
  Rng rng(4);
  const IsingModel model = testing::RandomIsingModel(rng, 7, 0.6, 2.0);
  const CostDiagonal d = BuildDiagonal(model, true);
  for (uint64_t z = 0; z < d.energies.size(); ++z) {
    EXPECT_NEAR(d.energies[z],
                Energy(model, SigmaOfX(testing::BitsOf(z, 7))), 1e-12);
  }
}

TEST(BuildDiagonalTest, ZeroModelAndLimit) {
  IsingModel zero;
  zero.num_spins = 3;
  zero.fields.assign(3, 0.0);
  EXPECT_EQ(BuildDiagonal(zero, true).energies, std::vector<double>(8, 0.0));
  IsingModel big;
  big.num_spins = kMaxSimulatedSpins + 1;
  big.fields.assign(big.num_spins, 0.0);
  EXPECT_THROW(BuildDiagonal(big, true), std::length_error);
  EXPECT_THROW(BuildDiagonal(zero, true, 2), std::length_error);
}

TEST(QaoaStateTest, ZeroAnglesGiveUniformState) {
  Rng rng(6);
  for (int n = 1; n <= 6; ++n) {
    const CostDiagonal d = RandomDiagonal(rng, n);
    const QaoaParams params{{0, 0, 0}, {0, 0, 0}};
    const StateVector s = QaoaState(d, params);
    const double amp = std::pow(2.0, -n / 2.0);
    for (const auto& a : s) {
      EXPECT_NEAR(a.real(), amp, 1e-15);
      EXPECT_NEAR(a.imag(), 0.0, 1e-15);
    }
    const double mean =
        std::accumulate(d.energies.begin(), d.energies.end(), 0.0) /
        static_cast<double>(d.energies.size());
    EXPECT_NEAR(Expectation(s, d), mean, 1e-12);
  }
}

TEST(QaoaStateTest, ZeroCostLayerKeepsMagnitudes) {
  const StateVector s =
      QaoaState(FromValues({0.0, 0.0}), QaoaParams{{0.3}, {kPi / 2}});
  EXPECT_NEAR(std::abs(s[0]), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(std::abs(s[1]), std::sqrt(0.5), 1e-15);
}

TEST(QaoaStateTest, TwoVariableMatchesDenseReference) {
  const CostDiagonal d = BuildDiagonal(Encode(TwoVar(), 10), true);
  const QaoaParams params{{0.4}, {0.7}};
  const StateVector s = QaoaState(d, params);
  const auto ref = testing::DenseQaoaReference(d.energies, params);
  double ref_expectation = 0.0;
  for (size_t z = 0; z < ref.size(); ++z) {
    EXPECT_NEAR(std::abs(s[z] - ref[z]), 0.0, 1e-10);
    ref_expectation += std::norm(ref[z]) * d.energies[z];
  }
  EXPECT_NEAR(Expectation(s, d), ref_expectation, 1e-8);
  // Frozen from an independent scipy expm evaluation.
  EXPECT_NEAR(ref_expectation, 6.243575486437237, 1e-8);
}

TEST(QaoaStateTest, RandomAgainstDenseReference) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 5;
    const int p = 1 + trial % 3;
    const CostDiagonal d = RandomDiagonal(rng, n);
    const QaoaParams params = RandomParams(rng, p);
    const StateVector s = QaoaState(d, params);
    const auto ref = testing::DenseQaoaReference(d.energies, params);
    for (size_t z = 0; z < ref.size(); ++z) {
      EXPECT_NEAR(std::abs(s[z] - ref[z]), 0.0, 1e-9);
    }
  }
}

TEST(QaoaStateTest, NormPreserved) {
  Rng rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 12;
    const int p = 1 + trial % 5;
    const StateVector s = QaoaState(RandomDiagonal(rng, n), RandomParams(rng, p));
    EXPECT_NEAR(Norm(s), 1.0, 1e-10);
  }
}

TEST(QaoaStateTest, MixerPeriodPi) {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const CostDiagonal d = RandomDiagonal(rng, 4);
    QaoaParams a = RandomParams(rng, 2);
    QaoaParams b = a;
    b.betas[trial % 2] += kPi;
    const StateVector sa = QaoaState(d, a);
    const StateVector sb = QaoaState(d, b);
    for (size_t z = 0; z < sa.size(); ++z) {
      EXPECT_NEAR(std::norm(sa[z]), std::norm(sb[z]), 1e-10);
    }
  }
}

TEST(QaoaStateTest, RejectsMismatchedParams) {
  EXPECT_THROW(QaoaState(FromValues({0, 1}), QaoaParams{{0.1, 0.2}, {0.1}}),
               std::invalid_argument);
}

TEST(ExpectationTest, Basics) {
  EXPECT_NEAR(Expectation(UniformState(1), FromValues({0, 1})), 0.5, 1e-15);
  StateVector basis(4, 0.0);
  basis[2] = 1.0;
  EXPECT_EQ(Expectation(basis, FromValues({3, 1, 4, 1})), 4.0);
  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const CostDiagonal d = RandomDiagonal(rng, 3);
    const StateVector s = QaoaState(d, RandomParams(rng, 2));
    const double e = Expectation(s, d);
    EXPECT_GE(e, *std::min_element(d.energies.begin(), d.energies.end()) - 1e-12);
    EXPECT_LE(e, *std::max_element(d.energies.begin(), d.energies.end()) + 1e-12);
  }
}

TEST(SampleTest, BasisStateGivesOneBitstring) {
  StateVector basis(4, 0.0);
  basis[2] = 1.0;  // x0 = 0, x1 = 1
  Rng rng(1);
  const SampleSet s = Sample(basis, 100, rng);
  ASSERT_EQ(s.size(), 1);
  EXPECT_EQ(s.bitstrings[0], 2u);
  EXPECT_EQ(s.counts[0], 100);
  EXPECT_EQ(s.shots, 100);
  EXPECT_EQ(s.Bits(0), (Assignment{0, 1}));
}

TEST(SampleTest, UniformSingleSpinWithinFiveSigma) {
  Rng rng(2);
  const int64_t q = 100000;
  const SampleSet s = Sample(UniformState(1), q, rng);
  ASSERT_EQ(s.size(), 2);
  const double sigma = std::sqrt(q * 0.25);
  EXPECT_LE(std::abs(s.counts[0] - q / 2.0), 5 * sigma);
}

TEST(SampleTest, CountsSumToShotsAndAreDistinct) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const CostDiagonal d = RandomDiagonal(rng, 5);
    const StateVector state = QaoaState(d, RandomParams(rng, 2));
    const int64_t q = 1 + trial * 137;
    const SampleSet s = Sample(state, q, rng);
    EXPECT_EQ(std::accumulate(s.counts.begin(), s.counts.end(), int64_t{0}), q);
    EXPECT_TRUE(std::is_sorted(s.bitstrings.begin(), s.bitstrings.end()));
    EXPECT_EQ(std::adjacent_find(s.bitstrings.begin(), s.bitstrings.end()),
              s.bitstrings.end());
    for (int64_t c : s.counts) EXPECT_GT(c, 0);
  }
}

TEST(SampleTest, DeterministicGivenSeed) {
  const StateVector state = QaoaState(FromValues({1, 2, 3, 4, 5, 6, 7, 8}),
                                      QaoaParams{{0.3}, {0.9}});
  Rng a(77);
  Rng b(77);
  const SampleSet sa = Sample(state, 500, a);
  const SampleSet sb = Sample(state, 500, b);
  EXPECT_EQ(sa.bitstrings, sb.bitstrings);
  EXPECT_EQ(sa.counts, sb.counts);
}

TEST(SampleTest, ChiSquaredAgainstBornRule) {
  Rng rng(5);
  const int64_t q = 100000;
  for (int n = 1; n <= 4; ++n) {
    const CostDiagonal d = RandomDiagonal(rng, n);
    const StateVector state = QaoaState(d, RandomParams(rng, 2));
    const SampleSet s = Sample(state, q, rng);
    std::vector<double> observed(state.size(), 0.0);
    for (int l = 0; l < s.size(); ++l) observed[s.bitstrings[l]] = s.counts[l];
    // Bins with small expectation are pooled.
    double chi2 = 0.0;
    int bins = 0;
    double pooled_expected = 0.0;
    double pooled_observed = 0.0;
    for (size_t z = 0; z < state.size(); ++z) {
      const double expected = std::norm(state[z]) * q;
      if (expected < 5.0) {
        pooled_expected += expected;
        pooled_observed += observed[z];
        continue;
      }
      chi2 += (observed[z] - expected) * (observed[z] - expected) / expected;
      ++bins;
    }
    if (pooled_expected >= 5.0) {
      chi2 += (pooled_observed - pooled_expected) *
              (pooled_observed - pooled_expected) / pooled_expected;
      ++bins;
    }
    if (bins < 2) continue;
    const boost::math::chi_squared dist(bins - 1);
    EXPECT_LT(chi2, boost::math::quantile(dist, 1.0 - 1e-3)) << "n = " << n;
  }
}

TEST(SampleTest, RejectsNonPositiveShots) {
  Rng rng(1);
  EXPECT_THROW(Sample(UniformState(1), 0, rng), std::invalid_argument);
}

TEST(NelderMeadTest, MinimizesQuadratic) {
  auto f = [](std::span<const double> x) {
    return (x[0] - 1) * (x[0] - 1) + 3 * (x[1] + 2) * (x[1] + 2) + 0.5;
  };
  const MinimizeResult r = NelderMeadMinimize(f, {0.0, 0.0}, 0.5, 400);
  EXPECT_NEAR(r.best_point[0], 1.0, 1e-3);
  EXPECT_NEAR(r.best_point[1], -2.0, 1e-3);
  EXPECT_NEAR(r.best_value, 0.5, 1e-6);
  EXPECT_LE(r.trace.total(), 400);
}

TEST(NelderMeadTest, HonoursBudgetExactly) {
  int calls = 0;
  auto f = [&calls](std::span<const double> x) {
    ++calls;
    return std::sin(3 * x[0]) + std::cos(2 * x[1]) + x[2] * x[2];
  };
  for (int64_t budget : {1, 2, 3, 7, 50, 333}) {
    calls = 0;
    const MinimizeResult r = NelderMeadMinimize(f, {0.1, 0.2, 0.3}, 0.7, budget);
    EXPECT_EQ(calls, r.trace.total());
    EXPECT_LE(r.trace.total(), budget);
  }
}

TEST(OptimizeAnglesTest, SingleQueryReturnsInitialAngles) {
  const CostDiagonal d = BuildDiagonal(Encode(TwoVar(), 10), false);
  const AngleOptimization a = OptimizeAngles(d, 3, 1, 99);
  ASSERT_EQ(a.trace.total(), 1);
  EXPECT_EQ(a.trace.queries[0].index, 0);
  EXPECT_EQ(a.best.depth(), 3);
  for (double g : a.best.gammas) {
    EXPECT_GT(g, 0.0);
    EXPECT_LT(g, kPi);
  }
  EXPECT_DOUBLE_EQ(a.best_value, Expectation(QaoaState(d, a.best), d));
  // The initial angles come from the seed alone.
  EXPECT_EQ(OptimizeAngles(d, 3, 1, 99).best, a.best);
}

TEST(OptimizeAnglesTest, ConstantDiagonal) {
  const CostDiagonal d = FromValues({2.5, 2.5, 2.5, 2.5});
  const AngleOptimization a = OptimizeAngles(d, 2, 40, 1);
  for (const OptimizerQuery& q : a.trace.queries) {
    EXPECT_NEAR(q.value, 2.5, 1e-12);
  }
}

TEST(OptimizeAnglesTest, BestSoFarAndBudget) {
  const CostDiagonal d = BuildDiagonal(Encode(TwoVar(), 10), true);
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const AngleOptimization a = OptimizeAngles(d, 3, 200, seed);
    ASSERT_GE(a.trace.total(), 1);
    EXPECT_LE(a.trace.total(), 200);
    double min_value = a.trace.queries[0].value;
    for (size_t k = 0; k < a.trace.queries.size(); ++k) {
      EXPECT_EQ(a.trace.queries[k].index, static_cast<int64_t>(k));
      min_value = std::min(min_value, a.trace.queries[k].value);
    }
    EXPECT_EQ(a.best_value, min_value);
    EXPECT_LE(a.best_value, a.trace.queries[0].value);
    EXPECT_NEAR(a.best_value, Expectation(QaoaState(d, a.best), d), 1e-12);
  }
}

TEST(OptimizeAnglesTest, WarmStartIsFirstQuery) {
  const CostDiagonal d = BuildDiagonal(Encode(TwoVar(), 10), false);
  const QaoaParams warm{{0.1, 0.2}, {0.3, 0.4}};
  const AngleOptimization a = OptimizeAngles(d, 2, 1, 5, warm);
  EXPECT_EQ(a.best, warm);
  EXPECT_THROW(OptimizeAngles(d, 3, 1, 5, warm), std::invalid_argument);
}

TEST(QaoaSolverTest, DeterministicAndConsistent) {
  const IsingModel model = Encode(TwoVar(), 10);
  QaoaSolver solver;
  VqaOptions options;
  options.max_queries = 30;
  options.shots = 256;
  const VqaRun a = solver.SolveAndSample(model, options, 4);
  const VqaRun b = solver.SolveAndSample(model, options, 4);
  EXPECT_EQ(a.samples.bitstrings, b.samples.bitstrings);
  EXPECT_EQ(a.samples.counts, b.samples.counts);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.samples.shots, 256);
  EXPECT_EQ(a.samples.num_bits, 2);
  EXPECT_LE(a.trace.total(), 30);
}

}  // namespace
}  // namespace qcbb
