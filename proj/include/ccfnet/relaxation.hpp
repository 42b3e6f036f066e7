#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ccfnet/netmodel.hpp"

namespace ccfnet {

/// Per-column linear constraints of a partition program: UE count in
/// [ue_lo, ue_hi] and BS count at least bs_lo.
struct ColumnBounds {
  std::vector<int> ue_lo;
  std::vector<int> ue_hi;
  std::vector<int> bs_lo;

  int columns() const { return static_cast<int>(ue_hi.size()); }

  /// M = ceil(K / k_max) columns, each with at most k_max UEs and one BS.
  static ColumnBounds capped(int columns, int k_max);
  /// Two columns with exactly k1 / k2 UEs and at least floor1 / floor2 BSs.
  static ColumnBounds bisection(int k1, int k2, int floor1, int floor2);
};

/// Bit m of entry i set means vertex i may still go to column m. A vertex with
/// a single bit is fixed; a cleared bit is a variable fixed to zero.
using AllowedMask = std::vector<std::uint64_t>;

AllowedMask full_mask(int vertices, int columns);

inline bool is_fixed(std::uint64_t bits) { return bits != 0 && (bits & (bits - 1)) == 0; }

/// An integral assignment meeting the bounds under the mask, or nullopt. The
/// constraint matrix is totally unimodular, so this also decides feasibility
/// of the continuous relaxation.
std::optional<std::vector<int>> feasible_assignment(const BipartiteGraph& graph,
                                                    const ColumnBounds& bounds,
                                                    const AllowedMask& mask);

struct RelaxOptions {
  double tol = 1e-8;
  int max_iterations = 2000;
  /// Stop as soon as the certified bound reaches this value.
  double cutoff = std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd* warm_x = nullptr;
  const Eigen::VectorXd* warm_multipliers = nullptr;
};

struct Relaxation {
  bool feasible = false;
  /// Row-stochastic point satisfying the mask and column bounds.
  Eigen::MatrixXd x;
  /// Certified lower bound on the integer optimum under the mask.
  double lb = 0.0;
  /// Objective value at x (an upper bound on the relaxation optimum).
  double value = 0.0;
  Eigen::VectorXd multipliers;
  int iterations = 0;
};

/// Lower bound for min sum_m x_m^T Lap x_m over the relaxed polytope.
///
/// The column constraints are handled by an augmented Lagrangian; each inner
/// problem over the product of per-vertex simplices is solved by accelerated
/// projected gradient in the degree-scaled metric. The returned bound does not
/// rely on convergence: for the current multipliers it is the Lagrangian at the
/// iterate plus the minimum of its linearization over the simplices, which is
/// valid for any iterate by convexity.
Relaxation relax_lower_bound(const BipartiteGraph& graph, const ColumnBounds& bounds,
                             const AllowedMask& mask, const RelaxOptions& opts = {});

/// Combinatorial bound from fixed vertices: cut edges between fixed vertices
/// plus, for each free vertex, the cheapest column given its fixed neighbours.
double fixed_edge_bound(const BipartiteGraph& graph, const AllowedMask& mask);

}  // namespace ccfnet
