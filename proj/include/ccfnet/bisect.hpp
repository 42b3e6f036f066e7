#pragma once

#include <string>
#include <vector>

#include "ccfnet/bnb.hpp"
#include "ccfnet/netmodel.hpp"

namespace ccfnet {

/// UE targets and BS floors for splitting a subnetwork of k_n UEs.
struct BisectPlan {
  int k_n = 0;
  int k1 = 0;  // k_max * floor(ceil(k_n / k_max) / 2)
  int k2 = 0;  // k_n - k1
  int bs_floor_1 = 0;
  int bs_floor_2 = 0;
};

/// Requires k_n > k_max.
BisectPlan bisect_targets(int k_n, int k_max);

/// Final UE counts of repeated largest-first bisection of k UEs, ascending.
/// Pure recursion on the targets; no graph involved.
std::vector<int> bisect_size_profile(int k, int k_max);

struct BisectIteration {
  int iteration = 0;  // 1-based
  int selected = 0;   // label of the split subnetwork before the split
  int ue_count = 0;
  int bs_count = 0;
  BisectPlan plan;
  double objective = 0.0;  // two-way sumcut inside the selected subnetwork
  long nodes = 0;
  SolveStatus status = SolveStatus::kOptimal;
};

std::string to_json_line(const BisectIteration& it);

struct BisectResult {
  /// objective is the sumcut of the final decomposition on the whole graph;
  /// nodes and wall time are summed over iterations, gap is the largest
  /// per-iteration gap and status the worst per-iteration status.
  SolveReport report;
  std::vector<BisectIteration> iterations;
};

/// Splits the subnetwork with the most UEs (ties: lowest first vertex) in two
/// until ceil(K / k_max) subnetworks exist. Each split is solved exactly.
/// Throws Infeasible when L < ceil(K / k_max) or a split cannot meet its floors.
BisectResult bc2f_net(const BipartiteGraph& graph, int k_max, const SolverConfig& cfg);

}  // namespace ccfnet
