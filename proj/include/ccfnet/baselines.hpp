#pragma once

#include <cstdint>
#include <vector>

#include "ccfnet/netmodel.hpp"
#include "ccfnet/partition.hpp"

namespace ccfnet {

struct EnumerationBudget {
  std::uint64_t max_assignments = 100'000'000;
};

/// Stirling number of the second kind S(n, m) (saturates at UINT64_MAX).
std::uint64_t stirling2(int n, int m);

/// Calls f(labels) for every restricted growth string of length n with
/// exactly m distinct labels, i.e. every partition of n items into m blocks.
/// Returns the number of strings visited.
template <typename F>
std::uint64_t for_each_rgs(int n, int m, F&& f);

enum class BruteObjective { kSumcut, kApproxCapacity };

struct BruteResult {
  Decomposition decomposition;
  /// Sumcut (minimized) or diagonal-approximation capacity (maximized).
  double value = 0.0;
  std::uint64_t enumerated = 0;  // complete assignments evaluated
};

/// Global optimum over decompositions with exactly m subnetworks, at most
/// k_max UEs and at least one BS each. BS partitions are enumerated as
/// restricted growth strings (one per unlabelled partition), then UEs are
/// assigned to the m labelled BS groups. The capacity objective reads the
/// path gains from the edge weights. Ties keep the first assignment found.
/// Throws BudgetExceeded when S(L, m) * m^K exceeds the budget and Infeasible
/// when no decomposition qualifies.
BruteResult brute_force(const BipartiteGraph& graph, int k_max, int m, BruteObjective objective,
                        const ChannelModel& channel = {}, const EnumerationBudget& budget = {});

/// Squared-Euclidean K-means with farthest-point seeding (first centre drawn
/// from `seed`) and at most 100 Lloyd iterations. Empty clusters keep their
/// centre. Returns a label per point.
std::vector<int> kmeans(const std::vector<Point>& points, int clusters, std::uint64_t seed);

/// Clusters UEs by position, re-splitting any cluster above k_max in two until
/// the cap holds; every BS then joins the nearest UE centroid, and clusters
/// left without a BS take the nearest BS from a cluster that has several.
Decomposition kmeans_ue_centric(const NetworkLayout& layout, int k_max, std::uint64_t seed);

/// Clusters BSs by position into ceil(K / k_max) groups; every UE joins the
/// group of its strongest BS, and over-full groups shed their weakest UEs to
/// the best group with room.
Decomposition kmeans_bs_centric(const NetworkLayout& layout, const PathGainMatrix& gains,
                                int k_max, std::uint64_t seed);

template <typename F>
std::uint64_t for_each_rgs(int n, int m, F&& f) {
  if (n < 0 || m < 0 || m > n) return 0;
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::uint64_t visited = 0;
  // used = number of labels opened by the prefix.
  auto rec = [&](auto&& self, int i, int used) -> void {
    if (n - i < m - used) return;
    if (i == n) {
      if (used == m) {
        ++visited;
        f(static_cast<const std::vector<int>&>(labels));
      }
      return;
    }
    const int top = std::min(used, m - 1);
    for (int c = 0; c <= top; ++c) {
      labels[static_cast<std::size_t>(i)] = c;
      self(self, i + 1, c == used ? used + 1 : used);
    }
  };
  rec(rec, 0, 0);
  return visited;
}

}  // namespace ccfnet
