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

#include "qcbb/bound.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "qcbb/random.h"

namespace qcbb {

double WeightedGraph::TotalWeight() const {
  double w = 0.0;
  for (const auto& [key, weight] : edges) w += weight;
  return w;
}

double WeightedGraph::NegativeWeight() const {
  double w = 0.0;
  for (const auto& [key, weight] : edges) {
    if (weight < 0.0) w += weight;
  }
  return w;
}

WeightedGraph IsingToMaxCut(const IsingModel& model) {
  WeightedGraph graph;
  graph.num_vertices = model.num_spins + 1;
  for (int i = 0; i < model.num_spins; ++i) {
    if (model.fields[i] != 0.0) graph.edges.emplace(std::make_pair(0, i + 1),
                                                    model.fields[i]);
  }
  for (const auto& [key, w] : model.couplings) {
    if (w != 0.0) {
      graph.edges.emplace(std::make_pair(key.first + 1, key.second + 1), w);
    }
  }
  return graph;
}

double CutValue(const WeightedGraph& graph, const std::vector<int8_t>& side) {
  if (static_cast<int>(side.size()) != graph.num_vertices) {
    throw std::invalid_argument("side labelling has the wrong length");
  }
  double value = 0.0;
  for (const auto& [key, w] : graph.edges) {
    if (side[key.first] != side[key.second]) value += w;
  }
  return value;
}

int DefaultSdpRank(int num_vertices) {
  const int rank =
      static_cast<int>(std::ceil(std::sqrt(2.0 * std::max(num_vertices, 1))));
  return std::max(rank, 2);
}

namespace {

double SdpObjective(const WeightedGraph& graph, const Eigen::MatrixXd& v) {
  double value = 0.0;
  for (const auto& [key, w] : graph.edges) {
    value += 0.5 * w * (1.0 - v.row(key.first).dot(v.row(key.second)));
  }
  return value;
}

void NormalizeRows(Eigen::MatrixXd& v) {
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const double norm = v.row(i).norm();
    if (norm > 0.0) {
      v.row(i) /= norm;
    } else {
      v.row(i).setZero();
      v(i, 0) = 1.0;
    }
  }
}

}  // namespace

SdpSolution SolveSdp(const WeightedGraph& graph, int rank, int max_iters,
                     uint64_t seed, double tolerance) {
  const int nv = graph.num_vertices;
  if (rank <= 0) rank = DefaultSdpRank(nv);
  if (rank < 2) throw std::invalid_argument("SDP rank must be at least 2");

  Rng rng(seed);
  SdpSolution sol;
  sol.vectors.resize(nv, rank);
  for (int i = 0; i < nv; ++i) {
    for (int k = 0; k < rank; ++k) sol.vectors(i, k) = StandardNormal(rng);
  }
  NormalizeRows(sol.vectors);
  sol.objective = SdpObjective(graph, sol.vectors);
  sol.objective_history.push_back(sol.objective);

  if (!graph.edges.empty()) {
    double max_degree = 0.0;
    std::vector<double> degree(nv, 0.0);
    for (const auto& [key, w] : graph.edges) {
      degree[key.first] += std::abs(w);
      degree[key.second] += std::abs(w);
    }
    for (double d : degree) max_degree = std::max(max_degree, d);
    double step = 1.0 / max_degree;

    Eigen::MatrixXd grad(nv, rank);
    for (int it = 0; it < max_iters; ++it) {
      // Euclidean gradient of the objective, then projection onto the
      // tangent space of each row's sphere.
      grad.setZero();
      for (const auto& [key, w] : graph.edges) {
        grad.row(key.first) -= 0.5 * w * sol.vectors.row(key.second);
        grad.row(key.second) -= 0.5 * w * sol.vectors.row(key.first);
      }
      for (int i = 0; i < nv; ++i) {
        grad.row(i) -= grad.row(i).dot(sol.vectors.row(i)) * sol.vectors.row(i);
      }
      const double grad_sq = grad.squaredNorm();
      if (grad_sq <= 1e-24 * max_degree * max_degree) break;

      bool accepted = false;
      double candidate_value = sol.objective;
      Eigen::MatrixXd candidate;
      step *= 2.0;
      for (int backtrack = 0; backtrack < 60; ++backtrack) {
        candidate = sol.vectors + step * grad;
        NormalizeRows(candidate);
        candidate_value = SdpObjective(graph, candidate);
        if (candidate_value >= sol.objective + 1e-4 * step * grad_sq) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      // Keep shrinking while it still pays; overshooting steps can pass the
      // Armijo test yet oscillate around the optimum.
      for (int refine = 0; refine < 30; ++refine) {
        Eigen::MatrixXd shorter = sol.vectors + 0.5 * step * grad;
        NormalizeRows(shorter);
        const double shorter_value = SdpObjective(graph, shorter);
        if (shorter_value <= candidate_value) break;
        step *= 0.5;
        candidate = std::move(shorter);
        candidate_value = shorter_value;
      }
      const double change = candidate_value - sol.objective;
      sol.vectors = std::move(candidate);
      sol.objective = candidate_value;
      sol.objective_history.push_back(sol.objective);
      sol.iterations = it + 1;
      const double scale = std::max(1.0, std::abs(sol.objective));
      if (change <= tolerance * scale &&
          SdpDualBound(graph, sol.vectors) - sol.objective <= tolerance * scale) {
        break;
      }
    }
  }
  sol.dual_bound = SdpDualBound(graph, sol.vectors);
  return sol;
}

double SdpDualBound(const WeightedGraph& graph,
                    const Eigen::MatrixXd& vectors) {
  const int nv = graph.num_vertices;
  if (graph.edges.empty()) return 0.0;
  Eigen::MatrixXd quarter_laplacian = Eigen::MatrixXd::Zero(nv, nv);
  double abs_sum = 0.0;
  for (const auto& [key, w] : graph.edges) {
    const auto [u, v] = key;
    quarter_laplacian(u, u) += 0.25 * w;
    quarter_laplacian(v, v) += 0.25 * w;
    quarter_laplacian(u, v) -= 0.25 * w;
    quarter_laplacian(v, u) -= 0.25 * w;
    abs_sum += std::abs(w);
  }
  // Complementary-slackness multipliers y = diag(L/4 X) for X = V V^T.
  const Eigen::MatrixXd gram = vectors * vectors.transpose();
  Eigen::VectorXd y(nv);
  for (int u = 0; u < nv; ++u) y(u) = quarter_laplacian.row(u).dot(gram.col(u));

  Eigen::MatrixXd slack = -quarter_laplacian;
  slack.diagonal() += y;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(slack,
                                                     Eigen::EigenvaluesOnly);
  const double lambda_min = eig.eigenvalues().minCoeff();
  // Shift y until Diag(y) - L/4 is PSD; the margin absorbs eigensolver error.
  const double shift = std::max(0.0, -lambda_min);
  const double margin = 1e-10 * (1.0 + abs_sum) * nv;
  return y.sum() + nv * shift + margin;
}

CutResult GwRound(const Eigen::MatrixXd& vectors, const WeightedGraph& graph,
                  int rounds, uint64_t seed) {
  if (rounds < 1) throw std::invalid_argument("need at least one round");
  const int nv = graph.num_vertices;
  if (vectors.rows() != nv) {
    throw std::invalid_argument("one SDP vector per vertex required");
  }
  Rng rng(seed);
  CutResult best;
  best.side.assign(nv, 1);
  best.value = CutValue(graph, best.side);
  bool have_best = false;
  std::vector<int8_t> side(nv);
  Eigen::VectorXd normal(vectors.cols());
  for (int r = 0; r < rounds; ++r) {
    for (Eigen::Index k = 0; k < normal.size(); ++k) {
      normal(k) = StandardNormal(rng);
    }
    const Eigen::VectorXd proj = vectors * normal;
    for (int u = 0; u < nv; ++u) side[u] = proj(u) >= 0.0 ? 1 : -1;
    if (nv > 0 && side[0] == -1) {
      for (int8_t& s : side) s = static_cast<int8_t>(-s);
    }
    const double value = CutValue(graph, side);
    if (!have_best || value > best.value) {
      best.value = value;
      best.side = side;
      have_best = true;
    }
  }
  return best;
}

BoundResult LowerBound(const IsingModel& model, const BoundConfig& config) {
  const WeightedGraph graph = IsingToMaxCut(model);
  BoundResult result;
  result.total_weight = graph.TotalWeight();
  result.negative_weight = graph.NegativeWeight();
  result.cut_spins.assign(model.num_spins, 1);
  if (graph.edges.empty()) return result;  // energy is identically zero

  const SdpSolution sdp =
      SolveSdp(graph, config.sdp_rank, config.sdp_max_iters,
               MixSeed(config.seed, 0), config.sdp_tolerance);
  const CutResult cut = GwRound(sdp.vectors, graph, config.rounding_rounds,
                                MixSeed(config.seed, 1));
  const double a = result.alpha;
  result.z_sdp = sdp.objective;
  result.z_dual = sdp.dual_bound;
  result.z_gw = cut.value;
  result.alpha_bound = -(2.0 / a) * cut.value +
                       (2.0 / a - 2.0) * result.negative_weight +
                       result.total_weight;
  result.relaxation_bound = -2.0 * result.z_dual + result.total_weight;
  result.lb_value = std::max(result.alpha_bound, result.relaxation_bound);
  for (int i = 0; i < model.num_spins; ++i) result.cut_spins[i] = cut.side[i + 1];
  return result;
}

double BoundFloor(const IsingModel& model, double min_h) {
  const WeightedGraph graph = IsingToMaxCut(model);
  const double a = kGoemansWilliamsonAlpha;
  const double abs_weight = graph.TotalWeight() - 2.0 * graph.NegativeWeight();
  return min_h / a - ((1.0 - a) / a) * abs_weight;
}

bool InfeasibleByBound(double lb_value, double constant, double penalty) {
  return lb_value + constant >= penalty;
}

}  // namespace qcbb
