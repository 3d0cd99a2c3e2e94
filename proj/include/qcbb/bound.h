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

// Lower bounds on the ground-state energy of an Ising model via MaxCut.
//
// The model (constant excluded) is mapped onto a graph with an extra field
// vertex 0: edge (i+1, j+1) carries the coupling on s_i s_j and edge (0, i+1)
// the field on s_i. With s_0 = +1 the energy is sum_e w_e s_u s_v = W - 2 cut,
// hence min E = W - 2 z* where z* is the maximum cut. The maximum cut is
// approximated with the Goemans-Williamson relaxation (low-rank SDP plus random
// hyperplane rounding) and turned into a bound with the alpha correction for
// graphs with negative weights.

#ifndef QCBB_BOUND_H_
#define QCBB_BOUND_H_

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcbb/ising.h"

namespace qcbb {

inline constexpr double kGoemansWilliamsonAlpha = 0.87856;

struct WeightedGraph {
  int num_vertices = 0;
  std::map<std::pair<int, int>, double> edges;  // u < v, nonzero weights

  double TotalWeight() const;     // W
  double NegativeWeight() const;  // W^-, sum of negative weights
};

WeightedGraph IsingToMaxCut(const IsingModel& model);

// Cut value of a +-1 side labelling of the vertices.
double CutValue(const WeightedGraph& graph, const std::vector<int8_t>& side);

struct SdpSolution {
  Eigen::MatrixXd vectors;  // one unit row per vertex
  double objective = 0.0;   // sum_e w_e (1 - <v_u, v_v>) / 2 at `vectors`
  // Certified upper bound on the SDP optimum (and hence on the max cut),
  // obtained from a dual-feasible point built from `vectors`.
  double dual_bound = 0.0;
  int iterations = 0;
  std::vector<double> objective_history;  // one entry per accepted iterate
};

// Rank used when the caller passes rank <= 0: ceil(sqrt(2 |V|)), at least 2.
int DefaultSdpRank(int num_vertices);

// Burer-Monteiro ascent: Riemannian gradient steps on the product of spheres
// with Armijo backtracking. Stops when the relative objective change drops
// below `tolerance` and the certified dual is within the same relative
// distance, or after `max_iters` iterations.
SdpSolution SolveSdp(const WeightedGraph& graph, int rank, int max_iters,
                     uint64_t seed, double tolerance = 1e-7);

// Upper bound on max_X 1/4 <L, X> from any multiplier vector (dual point
// repaired by the smallest eigenvalue of Diag(y) - L/4).
double SdpDualBound(const WeightedGraph& graph, const Eigen::MatrixXd& vectors);

struct CutResult {
  double value = 0.0;
  std::vector<int8_t> side;  // +1 / -1 per vertex; side[0] == +1
};

// Best of `rounds` random-hyperplane cuts. Vertex 0 always lands on +1.
CutResult GwRound(const Eigen::MatrixXd& vectors, const WeightedGraph& graph,
                  int rounds, uint64_t seed);

struct BoundConfig {
  int sdp_rank = 0;  // <= 0 selects DefaultSdpRank
  int sdp_max_iters = 2000;
  double sdp_tolerance = 1e-7;
  int rounding_rounds = 64;
  uint64_t seed = 0;
};

struct BoundResult {
  double z_gw = 0.0;
  double z_sdp = 0.0;
  double z_dual = 0.0;
  double total_weight = 0.0;     // W
  double negative_weight = 0.0;  // W^-
  double alpha_bound = 0.0;      // -(2/a) z_gw + (2/a - 2) W^- + W
  double relaxation_bound = 0.0; // -2 z_dual + W
  double lb_value = 0.0;         // max of the two; constant excluded
  std::vector<int8_t> cut_spins; // spins of the best rounded cut
  double alpha = kGoemansWilliamsonAlpha;
};

// Lower bound on min E(s) - constant.
BoundResult LowerBound(const IsingModel& model, const BoundConfig& config);

// Worst case the alpha bound can reach given the true minimum (constant
// excluded): min_H / a - ((1 - a) / a) (W - 2 W^-).
double BoundFloor(const IsingModel& model, double min_h);

// A subproblem whose bound reaches the penalty has no feasible completion.
bool InfeasibleByBound(double lb_value, double constant, double penalty);

}  // namespace qcbb

#endif  // QCBB_BOUND_H_
