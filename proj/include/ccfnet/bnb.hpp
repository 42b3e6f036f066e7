#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccfnet/netmodel.hpp"
#include "ccfnet/partition.hpp"
#include "ccfnet/relaxation.hpp"

namespace ccfnet {

struct SolverConfig {
  double epsilon = 1e-6;     // relative optimality gap
  double relax_tol = 1e-8;   // relaxation convergence tolerance
  int relax_max_iterations = 400;
  long node_limit = 1'000'000;
  double time_limit = 0.0;   // seconds; 0 disables
  std::uint64_t seed = 0;    // branching tie-breaks
  bool trace = false;        // keep a NodeRecord per evaluated node

  void check() const;
};

enum class SolveStatus { kOptimal, kGapReached, kLimitHit };

std::string to_string(SolveStatus s);

enum class NodeOutcome { kBranched, kPrunedBound, kInfeasible, kSolved, kOpen };

struct NodeRecord {
  long id = 0;
  long parent = -1;
  int depth = 0;
  double lb = 0.0;
  double incumbent = 0.0;  // incumbent after evaluating this node
  NodeOutcome outcome = NodeOutcome::kOpen;
  AllowedMask mask;
};

struct SolveReport {
  double objective = 0.0;  // sumcut of the returned decomposition
  std::optional<Decomposition> decomposition;
  long nodes_explored = 0;
  double gap = 0.0;
  double wall_time = 0.0;  // seconds
  SolveStatus status = SolveStatus::kOptimal;
  std::vector<NodeRecord> trace;
};

/// Round each row to its largest entry, then repair the column bounds
/// greedily: over-full columns shed their least-committed UEs to the open
/// column that raises the objective least, under-full columns pull the
/// cheapest UE from a column with spare UEs, and BS-deficient columns take
/// the BS with the strongest fractional preference for them. Returns the
/// column of every vertex, or nullopt when counting rules out feasibility.
std::optional<std::vector<int>> round_and_repair(const BipartiteGraph& graph,
                                                 const Eigen::MatrixXd& x,
                                                 const ColumnBounds& bounds);

/// Exact branch-and-bound for min sum_m x_m^T Lap x_m under `bounds`.
/// `symmetric` declares the columns interchangeable, enabling first-occupant
/// symmetry breaking. Throws Infeasible when no assignment exists.
SolveReport solve_partition(const BipartiteGraph& graph, const ColumnBounds& bounds,
                            bool symmetric, const SolverConfig& cfg);

/// Decomposition into ceil(K / k_max) subnetworks with at most k_max UEs and
/// at least one BS each, minimizing the sumcut.
SolveReport solve_p4(const BipartiteGraph& graph, int k_max, const SolverConfig& cfg);

/// Two-way split with exactly k1 / k2 UEs and at least floor1 / floor2 BSs.
SolveReport solve_p5(const BipartiteGraph& graph, int k1, int k2, int floor1, int floor2,
                     const SolverConfig& cfg);

}  // namespace ccfnet
