#include "ccfnet/bnb.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>

#include "ccfnet/errors.hpp"
#include "ccfnet/rng.hpp"

namespace ccfnet {

void SolverConfig::check() const {
  if (!(epsilon > 0.0)) throw InvalidArgument("solver: epsilon must be positive");
  if (!(relax_tol > 0.0)) throw InvalidArgument("solver: relax_tol must be positive");
  if (node_limit < 1) throw InvalidArgument("solver: node_limit must be at least 1");
  if (relax_max_iterations < 1) throw InvalidArgument("solver: relax_max_iterations must be positive");
  if (time_limit < 0.0) throw InvalidArgument("solver: time_limit must be non-negative");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kGapReached:
      return "gap-reached";
    case SolveStatus::kLimitHit:
      return "limit-hit";
  }
  return "unknown";
}

namespace {

double assignment_objective(const BipartiteGraph& graph, const std::vector<int>& col) {
  const Eigen::MatrixXd& w = graph.weights();
  const int k = graph.num_ue();
  double s = 0.0;
  for (int u = 0; u < k; ++u) {
    for (int b = 0; b < graph.num_bs(); ++b) {
      if (col[static_cast<std::size_t>(u)] != col[static_cast<std::size_t>(k + b)]) {
        s += w(u, b);
      }
    }
  }
  return 2.0 * s;
}

// Restricts the mask so that, read in vertex order, each column's first
// occupant comes after the previous column's. Returns false if a vertex is
// left without columns.
bool break_symmetry(AllowedMask& mask) {
  int highest = -1;
  for (std::uint64_t& bits : mask) {
    const int limit = highest + 1;
    if (limit < 63) bits &= (1ULL << (limit + 1)) - 1;
    if (bits == 0) return false;
    highest = std::max(highest, 63 - std::countl_zero(bits));
  }
  return true;
}

struct Node {
  long id = 0;
  long parent = -1;
  int depth = 0;
  double lb = 0.0;
  AllowedMask mask;
  Eigen::MatrixXd x;
  Eigen::VectorXd multipliers;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.lb != b.lb) return a.lb > b.lb;
    return a.id > b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const BipartiteGraph& graph, const ColumnBounds& bounds, bool symmetric,
                 const SolverConfig& cfg)
      : graph_(graph), bounds_(bounds), symmetric_(symmetric), cfg_(cfg),
        rng_(derive_seed(cfg.seed, Stream::kSolver)),
        start_(std::chrono::steady_clock::now()) {}

  SolveReport run() {
    Node root;
    root.mask = full_mask(graph_.num_vertices(), bounds_.columns());
    if ((symmetric_ && !break_symmetry(root.mask)) ||
        !feasible_assignment(graph_, bounds_, root.mask)) {
      throw Infeasible("no decomposition satisfies the column bounds");
    }
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    if (evaluate(root, -std::numeric_limits<double>::infinity())) open.push(std::move(root));

    bool limit_hit = false;
    while (!open.empty()) {
      if (open.top().lb >= threshold()) {
        note_slack(open.top().lb);
        break;
      }
      if (nodes_ + 2 > cfg_.node_limit || out_of_time()) {
        limit_hit = true;
        break;
      }
      Node node = open.top();
      open.pop();
      set_outcome(node.id, NodeOutcome::kBranched);
      auto [i, m] = choose_branch(node);
      Node one = child(node);
      one.mask[static_cast<std::size_t>(i)] = 1ULL << m;
      Node zero = child(node);
      zero.mask[static_cast<std::size_t>(i)] &= ~(1ULL << m);
      if (evaluate(one, node.lb)) open.push(std::move(one));
      if (evaluate(zero, node.lb)) open.push(std::move(zero));
    }

    SolveReport report;
    report.nodes_explored = nodes_;
    report.trace = std::move(trace_);
    if (!incumbent_) {
      if (!limit_hit) throw Infeasible("branch-and-bound found no feasible decomposition");
      report.status = SolveStatus::kLimitHit;
      report.gap = std::numeric_limits<double>::infinity();
      report.objective = std::numeric_limits<double>::infinity();
      report.wall_time = elapsed();
      return report;
    }
    double global_lb = best_value_;
    for (double lb : slack_lbs_) global_lb = std::min(global_lb, lb);
    if (limit_hit && !open.empty()) global_lb = std::min(global_lb, open.top().lb);
    report.objective = best_value_;
    report.gap = best_value_ > 0.0 ? std::max(0.0, (best_value_ - global_lb) / best_value_) : 0.0;
    if (limit_hit) {
      report.status = SolveStatus::kLimitHit;
    } else {
      // Gaps at rounding level come from ties between equal-cost columns.
      const bool exact = report.gap <= 64.0 * std::numeric_limits<double>::epsilon();
      report.status = exact ? SolveStatus::kOptimal : SolveStatus::kGapReached;
    }
    report.decomposition =
        Decomposition(graph_.num_ue(), graph_.num_bs(), std::move(*incumbent_));
    report.wall_time = elapsed();
    return report;
  }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  bool out_of_time() const { return cfg_.time_limit > 0.0 && elapsed() >= cfg_.time_limit; }

  // Nodes whose bound reaches this value cannot improve the incumbent by more
  // than the relative tolerance.
  double threshold() const {
    if (!incumbent_) return std::numeric_limits<double>::infinity();
    return best_value_ - cfg_.epsilon * std::abs(best_value_);
  }

  void note_slack(double lb) {
    if (incumbent_ && lb < best_value_) slack_lbs_.push_back(lb);
  }

  Node child(const Node& parent) {
    Node c;
    c.id = next_id_++;
    c.parent = parent.id;
    c.depth = parent.depth + 1;
    c.mask = parent.mask;
    c.x = parent.x;
    c.multipliers = parent.multipliers;
    return c;
  }

  void set_outcome(long id, NodeOutcome outcome) {
    if (cfg_.trace) trace_[static_cast<std::size_t>(id)].outcome = outcome;
  }

  void record(const Node& node, NodeOutcome outcome) {
    if (!cfg_.trace) return;
    if (trace_.size() <= static_cast<std::size_t>(node.id)) {
      trace_.resize(static_cast<std::size_t>(node.id) + 1);
    }
    NodeRecord& r = trace_[static_cast<std::size_t>(node.id)];
    r.id = node.id;
    r.parent = node.parent;
    r.depth = node.depth;
    r.lb = node.lb;
    r.incumbent = incumbent_ ? best_value_ : std::numeric_limits<double>::infinity();
    r.outcome = outcome;
    r.mask = node.mask;
  }

  void offer(std::vector<int> assignment) {
    const double value = assignment_objective(graph_, assignment);
    if (!incumbent_ || value < best_value_) {
      best_value_ = value;
      incumbent_ = std::move(assignment);
    }
  }

  // Bounds the node and tries to improve the incumbent. Returns true if the
  // node stays open.
  bool evaluate(Node& node, double parent_lb) {
    ++nodes_;
    if (symmetric_ && !break_symmetry(node.mask)) {
      node.lb = std::numeric_limits<double>::infinity();
      record(node, NodeOutcome::kInfeasible);
      return false;
    }
    RelaxOptions opts;
    opts.tol = cfg_.relax_tol;
    opts.max_iterations = cfg_.relax_max_iterations;
    opts.cutoff = threshold();
    if (node.x.size() > 0) opts.warm_x = &node.x;
    if (node.multipliers.size() > 0) opts.warm_multipliers = &node.multipliers;
    Relaxation relax = relax_lower_bound(graph_, bounds_, node.mask, opts);
    if (!relax.feasible) {
      node.lb = std::numeric_limits<double>::infinity();
      record(node, NodeOutcome::kInfeasible);
      return false;
    }
    // A child's feasible set lies inside its parent's, so the parent bound
    // still applies.
    node.lb = std::max({parent_lb, relax.lb, fixed_edge_bound(graph_, node.mask)});
    node.x = std::move(relax.x);
    node.multipliers = std::move(relax.multipliers);

    if (auto rounded = round_and_repair(graph_, node.x, bounds_)) offer(std::move(*rounded));

    bool all_fixed = true;
    for (std::uint64_t bits : node.mask) all_fixed = all_fixed && is_fixed(bits);
    if (all_fixed) {
      std::vector<int> col(node.mask.size());
      for (std::size_t i = 0; i < col.size(); ++i) col[i] = std::countr_zero(node.mask[i]);
      offer(col);
      node.lb = assignment_objective(graph_, col);
      record(node, NodeOutcome::kSolved);
      return false;
    }
    if (node.lb >= threshold()) {
      note_slack(node.lb);
      record(node, NodeOutcome::kPrunedBound);
      return false;
    }
    record(node, NodeOutcome::kOpen);
    return true;
  }

  // Most fractional free entry; ties go to the seeded generator.
  std::pair<int, int> choose_branch(const Node& node) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, int>> ties;
    for (int i = 0; i < static_cast<int>(node.mask.size()); ++i) {
      const std::uint64_t bits = node.mask[static_cast<std::size_t>(i)];
      if (is_fixed(bits)) continue;
      for (std::uint64_t b = bits; b != 0; b &= b - 1) {
        const int m = std::countr_zero(b);
        const double score = std::abs(node.x(i, m) - 0.5);
        if (score < best - 1e-9) {
          best = score;
          ties.clear();
        }
        if (score <= best + 1e-9) ties.push_back({i, m});
      }
    }
    return ties[static_cast<std::size_t>(rng_.below(ties.size()))];
  }

  const BipartiteGraph& graph_;
  const ColumnBounds& bounds_;
  bool symmetric_;
  SolverConfig cfg_;
  Rng rng_;
  std::chrono::steady_clock::time_point start_;
  long nodes_ = 0;
  long next_id_ = 1;
  std::optional<std::vector<int>> incumbent_;
  double best_value_ = std::numeric_limits<double>::infinity();
  std::vector<double> slack_lbs_;
  std::vector<NodeRecord> trace_;
};

// Per-vertex weight towards each column under a hard assignment.
Eigen::MatrixXd column_affinity(const BipartiteGraph& graph, const std::vector<int>& col, int m) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(graph.num_vertices(), m);
  const Eigen::MatrixXd& a = graph.adjacency();
  for (int i = 0; i < graph.num_vertices(); ++i) {
    for (int j = 0; j < graph.num_vertices(); ++j) {
      s(i, col[static_cast<std::size_t>(j)]) += a(i, j);
    }
  }
  return s;
}

}  // namespace

std::optional<std::vector<int>> round_and_repair(const BipartiteGraph& graph,
                                                 const Eigen::MatrixXd& x,
                                                 const ColumnBounds& bounds) {
  const int n = graph.num_vertices();
  const int k = graph.num_ue();
  const int cols = bounds.columns();
  if (x.rows() != n || x.cols() != cols) throw InvalidArgument("round_and_repair: shape mismatch");
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (std::abs(x.row(i).sum() - 1.0) > 1e-6) {
      throw InvalidArgument("round_and_repair: x is not row-stochastic");
    }
  }
  long lo_sum = 0, hi_sum = 0, floor_sum = 0;
  for (int m = 0; m < cols; ++m) {
    lo_sum += bounds.ue_lo[static_cast<std::size_t>(m)];
    hi_sum += bounds.ue_hi[static_cast<std::size_t>(m)];
    floor_sum += bounds.bs_lo[static_cast<std::size_t>(m)];
  }
  if (lo_sum > k || hi_sum < k || floor_sum > graph.num_bs()) return std::nullopt;

  std::vector<int> col(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    x.row(i).maxCoeff(&best);
    col[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  std::vector<int> ue(static_cast<std::size_t>(cols), 0), bs(static_cast<std::size_t>(cols), 0);
  for (int i = 0; i < n; ++i) ++(i < k ? ue : bs)[static_cast<std::size_t>(col[static_cast<std::size_t>(i)])];
  Eigen::MatrixXd affinity = column_affinity(graph, col, cols);

  auto margin = [&](int i) {
    const int a = col[static_cast<std::size_t>(i)];
    double second = 0.0;
    for (int m = 0; m < cols; ++m) {
      if (m != a) second = std::max(second, x(i, m));
    }
    return x(i, a) - second;
  };
  auto delta = [&](int i, int to) {
    return 2.0 * (affinity(i, col[static_cast<std::size_t>(i)]) - affinity(i, to));
  };
  auto move = [&](int i, int to) {
    const int from = col[static_cast<std::size_t>(i)];
    auto& count = i < k ? ue : bs;
    --count[static_cast<std::size_t>(from)];
    ++count[static_cast<std::size_t>(to)];
    col[static_cast<std::size_t>(i)] = to;
    for (int j = 0; j < n; ++j) {
      const double w = graph.weight(i, j);
      if (w == 0.0) continue;
      affinity(j, from) -= w;
      affinity(j, to) += w;
    }
  };
  auto at = [](const std::vector<int>& v, int m) { return v[static_cast<std::size_t>(m)]; };

  for (;;) {
    int over = -1, under = -1, short_bs = -1;
    for (int m = 0; m < cols && over < 0; ++m) {
      if (at(ue, m) > at(bounds.ue_hi, m)) over = m;
    }
    for (int m = 0; m < cols && under < 0; ++m) {
      if (at(ue, m) < at(bounds.ue_lo, m)) under = m;
    }
    for (int m = 0; m < cols && short_bs < 0; ++m) {
      if (at(bs, m) < at(bounds.bs_lo, m)) short_bs = m;
    }
    if (over >= 0) {
      int pick = -1;
      for (int i = 0; i < k; ++i) {
        if (col[static_cast<std::size_t>(i)] == over && (pick < 0 || margin(i) < margin(pick))) {
          pick = i;
        }
      }
      int target = -1;
      for (int m = 0; m < cols; ++m) {
        if (m == over || at(ue, m) >= at(bounds.ue_hi, m)) continue;
        if (target < 0 || delta(pick, m) < delta(pick, target)) target = m;
      }
      if (target < 0) return std::nullopt;
      move(pick, target);
    } else if (under >= 0) {
      int pick = -1;
      for (int i = 0; i < k; ++i) {
        const int from = col[static_cast<std::size_t>(i)];
        if (from == under || at(ue, from) <= at(bounds.ue_lo, from)) continue;
        if (pick < 0 || delta(i, under) < delta(pick, under) ||
            (delta(i, under) == delta(pick, under) && margin(i) < margin(pick))) {
          pick = i;
        }
      }
      if (pick < 0) return std::nullopt;
      move(pick, under);
    } else if (short_bs >= 0) {
      int pick = -1;
      for (int i = k; i < n; ++i) {
        const int from = col[static_cast<std::size_t>(i)];
        if (from == short_bs || at(bs, from) <= at(bounds.bs_lo, from)) continue;
        if (pick < 0 || x(i, short_bs) > x(pick, short_bs) ||
            (x(i, short_bs) == x(pick, short_bs) && delta(i, short_bs) < delta(pick, short_bs))) {
          pick = i;
        }
      }
      if (pick < 0) return std::nullopt;
      move(pick, short_bs);
    } else {
      break;
    }
  }
  return col;
}

SolveReport solve_partition(const BipartiteGraph& graph, const ColumnBounds& bounds,
                            bool symmetric, const SolverConfig& cfg) {
  cfg.check();
  const int cols = bounds.columns();
  if (cols < 1 || cols > 64 || static_cast<int>(bounds.ue_lo.size()) != cols ||
      static_cast<int>(bounds.bs_lo.size()) != cols) {
    throw InvalidArgument("solve: inconsistent column bounds");
  }
  BranchAndBound bnb(graph, bounds, symmetric, cfg);
  return bnb.run();
}

SolveReport solve_p4(const BipartiteGraph& graph, int k_max, const SolverConfig& cfg) {
  const int m = optimal_m(graph.num_ue(), k_max);
  if (graph.num_bs() < m) {
    throw Infeasible("need at least " + std::to_string(m) + " BSs for " +
                     std::to_string(graph.num_ue()) + " UEs with cap " + std::to_string(k_max));
  }
  SolveReport r = solve_partition(graph, ColumnBounds::capped(m, k_max), true, cfg);
  if (r.decomposition) r.decomposition = r.decomposition->canonical();
  return r;
}

SolveReport solve_p5(const BipartiteGraph& graph, int k1, int k2, int floor1, int floor2,
                     const SolverConfig& cfg) {
  if (k1 < 1 || k2 < 1) throw InvalidArgument("solve_p5: both sides need at least one UE");
  if (k1 + k2 != graph.num_ue()) throw InvalidArgument("solve_p5: k1 + k2 must equal K");
  if (floor1 < 0 || floor2 < 0) throw InvalidArgument("solve_p5: negative BS floor");
  if (floor1 + floor2 > graph.num_bs()) {
    throw Infeasible("solve_p5: BS floors " + std::to_string(floor1) + "+" +
                     std::to_string(floor2) + " exceed " + std::to_string(graph.num_bs()) +
                     " BSs");
  }
  const bool symmetric = k1 == k2 && floor1 == floor2;
  return solve_partition(graph, ColumnBounds::bisection(k1, k2, floor1, floor2), symmetric, cfg);
}

}  // namespace ccfnet
