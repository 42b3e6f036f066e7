#pragma once

#include <algorithm>
#include <limits>
#include <queue>
#include <vector>

namespace ccfnet::detail {

/// Dinic max-flow on integer capacities. Sized for the tiny assignment networks
/// used in feasibility checks.
class MaxFlow {
 public:
  explicit MaxFlow(int n) : adj_(static_cast<std::size_t>(n)) {}

  /// Returns the edge handle for flow queries.
  int add_edge(int from, int to, int cap) {
    const int id = static_cast<int>(edges_.size());
    edges_.push_back({to, cap});
    adj_[static_cast<std::size_t>(from)].push_back(id);
    edges_.push_back({from, 0});
    adj_[static_cast<std::size_t>(to)].push_back(id + 1);
    return id;
  }

  int flow_on(int edge) const { return edges_[static_cast<std::size_t>(edge ^ 1)].cap; }

  int run(int s, int t) {
    int total = 0;
    while (bfs(s, t)) {
      iter_.assign(adj_.size(), 0);
      while (int f = dfs(s, t, std::numeric_limits<int>::max())) total += f;
    }
    return total;
  }

 private:
  struct Edge {
    int to;
    int cap;
  };

  bool bfs(int s, int t) {
    level_.assign(adj_.size(), -1);
    std::queue<int> q;
    level_[static_cast<std::size_t>(s)] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int id : adj_[static_cast<std::size_t>(u)]) {
        const Edge& e = edges_[static_cast<std::size_t>(id)];
        if (e.cap > 0 && level_[static_cast<std::size_t>(e.to)] < 0) {
          level_[static_cast<std::size_t>(e.to)] = level_[static_cast<std::size_t>(u)] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[static_cast<std::size_t>(t)] >= 0;
  }

  int dfs(int u, int t, int pushed) {
    if (u == t) return pushed;
    auto& it = iter_[static_cast<std::size_t>(u)];
    const auto& out = adj_[static_cast<std::size_t>(u)];
    for (; it < out.size(); ++it) {
      const int id = out[it];
      Edge& e = edges_[static_cast<std::size_t>(id)];
      if (e.cap <= 0 ||
          level_[static_cast<std::size_t>(e.to)] != level_[static_cast<std::size_t>(u)] + 1) {
        continue;
      }
      if (int f = dfs(e.to, t, std::min(pushed, e.cap))) {
        e.cap -= f;
        edges_[static_cast<std::size_t>(id ^ 1)].cap += f;
        return f;
      }
    }
    return 0;
  }

  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> iter_;
};

}  // namespace ccfnet::detail
