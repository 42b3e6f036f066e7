#include "ccfnet/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "ccfnet/capacity.hpp"
#include "ccfnet/errors.hpp"
#include "ccfnet/rng.hpp"

namespace ccfnet {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return b > kSaturated - a ? kSaturated : a + b;
}

double dist2(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::vector<Point> centroids(const std::vector<Point>& points, const std::vector<int>& labels,
                             int clusters) {
  std::vector<Point> c(static_cast<std::size_t>(clusters));
  std::vector<int> count(static_cast<std::size_t>(clusters), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto m = static_cast<std::size_t>(labels[i]);
    c[m].x += points[i].x;
    c[m].y += points[i].y;
    ++count[m];
  }
  for (std::size_t m = 0; m < c.size(); ++m) {
    if (count[m] > 0) {
      c[m].x /= count[m];
      c[m].y /= count[m];
    }
  }
  return c;
}

int nearest(const Point& p, const std::vector<Point>& centres) {
  int best = 0;
  for (int m = 1; m < static_cast<int>(centres.size()); ++m) {
    if (dist2(p, centres[static_cast<std::size_t>(m)]) <
        dist2(p, centres[static_cast<std::size_t>(best)])) {
      best = m;
    }
  }
  return best;
}

// Exhaustive search for one BS partition. UE costs are separable for the
// sumcut, so that case prunes with the cheapest completion.
class UeSearch {
 public:
  UeSearch(const BipartiteGraph& graph, int k_max, int m, BruteObjective objective,
           const ChannelModel& channel)
      : w_(graph.weights()), k_(graph.num_ue()), l_(graph.num_bs()), k_max_(k_max), m_(m),
        objective_(objective), channel_(channel), cols_(static_cast<std::size_t>(k_)),
        count_(static_cast<std::size_t>(m), 0), in_(static_cast<std::size_t>(l_), 0.0),
        total_(static_cast<std::size_t>(l_), 0.0) {
    for (int b = 0; b < l_; ++b) total_[static_cast<std::size_t>(b)] = w_.col(b).sum();
  }

  std::uint64_t evaluated = 0;
  bool found = false;
  double best = 0.0;
  std::vector<int> best_assignment;

  void run(const std::vector<int>& bs_labels) {
    bs_ = &bs_labels;
    cost_.assign(static_cast<std::size_t>(k_) * static_cast<std::size_t>(m_), 0.0);
    tail_min_.assign(static_cast<std::size_t>(k_) + 1, 0.0);
    for (int u = 0; u < k_; ++u) {
      const double row = w_.row(u).sum();
      for (int c = 0; c < m_; ++c) {
        double inside = 0.0;
        for (int b = 0; b < l_; ++b) {
          if (bs_labels[static_cast<std::size_t>(b)] == c) inside += w_(u, b);
        }
        cost(u, c) = 2.0 * (row - inside);
      }
    }
    for (int u = k_ - 1; u >= 0; --u) {
      double lo = std::numeric_limits<double>::infinity();
      for (int c = 0; c < m_; ++c) lo = std::min(lo, cost(u, c));
      tail_min_[static_cast<std::size_t>(u)] = tail_min_[static_cast<std::size_t>(u) + 1] + lo;
    }
    std::fill(in_.begin(), in_.end(), 0.0);
    std::fill(count_.begin(), count_.end(), 0);
    descend(0, 0.0);
  }

 private:
  double& cost(int u, int c) {
    return cost_[static_cast<std::size_t>(u) * static_cast<std::size_t>(m_) +
                 static_cast<std::size_t>(c)];
  }

  void descend(int u, double partial) {
    if (objective_ == BruteObjective::kSumcut && found &&
        partial + tail_min_[static_cast<std::size_t>(u)] >= best) {
      return;
    }
    if (u == k_) {
      leaf(partial);
      return;
    }
    for (int c = 0; c < m_; ++c) {
      if (count_[static_cast<std::size_t>(c)] >= k_max_) continue;
      ++count_[static_cast<std::size_t>(c)];
      cols_[static_cast<std::size_t>(u)] = c;
      if (objective_ == BruteObjective::kApproxCapacity) shift(u, c, 1.0);
      descend(u + 1, partial + cost(u, c));
      if (objective_ == BruteObjective::kApproxCapacity) shift(u, c, -1.0);
      --count_[static_cast<std::size_t>(c)];
    }
  }

  void shift(int u, int c, double sign) {
    for (int b = 0; b < l_; ++b) {
      if ((*bs_)[static_cast<std::size_t>(b)] == c) in_[static_cast<std::size_t>(b)] += sign * w_(u, b);
    }
  }

  void leaf(double partial) {
    ++evaluated;
    double value = partial;
    bool better = !found || value < best;
    if (objective_ == BruteObjective::kApproxCapacity) {
      const double p = channel_.power_p;
      const double n0 = channel_.noise_n0;
      value = 0.0;
      for (int b = 0; b < l_; ++b) {
        const auto i = static_cast<std::size_t>(b);
        const double interference = std::max(0.0, total_[i] - in_[i]);
        value += std::log2(1.0 + p * in_[i] / (n0 + p * interference));
      }
      better = !found || value > best;
    }
    if (!better) return;
    found = true;
    best = value;
    best_assignment.assign(cols_.begin(), cols_.end());
    best_assignment.insert(best_assignment.end(), bs_->begin(), bs_->end());
  }

  const Eigen::MatrixXd& w_;
  int k_;
  int l_;
  int k_max_;
  int m_;
  BruteObjective objective_;
  ChannelModel channel_;
  const std::vector<int>* bs_ = nullptr;
  std::vector<int> cols_;
  std::vector<int> count_;
  std::vector<double> in_;
  std::vector<double> total_;
  std::vector<double> cost_;
  std::vector<double> tail_min_;
};

// Repeatedly splits clusters above the cap in two. Labels stay dense.
void enforce_cap(const std::vector<Point>& points, std::vector<int>& labels, int& clusters,
                 int k_max, std::uint64_t seed) {
  std::uint64_t split = 0;
  std::deque<int> pending(static_cast<std::size_t>(clusters));
  std::iota(pending.begin(), pending.end(), 0);
  while (!pending.empty()) {
    const int c = pending.front();
    pending.pop_front();
    std::vector<int> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) members.push_back(static_cast<int>(i));
    }
    if (static_cast<int>(members.size()) <= k_max) continue;
    std::vector<Point> sub;
    for (int i : members) sub.push_back(points[static_cast<std::size_t>(i)]);
    std::vector<int> halves = kmeans(sub, 2, derive_seed(seed, Stream::kBaseline, {1, split++}));
    if (std::count(halves.begin(), halves.end(), 1) == 0) {
      // Coincident points: split by index instead.
      for (std::size_t j = members.size() / 2; j < members.size(); ++j) halves[j] = 1;
    }
    const int fresh = clusters++;
    for (std::size_t j = 0; j < members.size(); ++j) {
      if (halves[j] == 1) labels[static_cast<std::size_t>(members[j])] = fresh;
    }
    pending.push_back(c);
    pending.push_back(fresh);
  }
}

}  // namespace

std::uint64_t stirling2(int n, int m) {
  if (n < 0 || m < 0) return 0;
  std::vector<std::vector<std::uint64_t>> s(static_cast<std::size_t>(n) + 1,
                                            std::vector<std::uint64_t>(static_cast<std::size_t>(m) + 1, 0));
  s[0][0] = 1;
  for (std::size_t i = 1; i <= static_cast<std::size_t>(n); ++i) {
    for (std::size_t j = 1; j <= static_cast<std::size_t>(m); ++j) {
      s[i][j] = sat_add(sat_mul(j, s[i - 1][j]), s[i - 1][j - 1]);
    }
  }
  return s[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)];
}

BruteResult brute_force(const BipartiteGraph& graph, int k_max, int m, BruteObjective objective,
                        const ChannelModel& channel, const EnumerationBudget& budget) {
  const int k = graph.num_ue();
  const int l = graph.num_bs();
  if (k_max < 1 || m < 1) throw InvalidArgument("brute_force: k_max and m must be positive");
  if (budget.max_assignments == 0) throw InvalidArgument("brute_force: empty budget");
  if (objective == BruteObjective::kApproxCapacity) channel.check();
  if (m > l || static_cast<long>(m) * k_max < k) {
    throw Infeasible("brute_force: no decomposition into " + std::to_string(m) +
                     " subnetworks fits " + std::to_string(k) + " UEs and " +
                     std::to_string(l) + " BSs");
  }
  std::uint64_t required = stirling2(l, m);
  for (int u = 0; u < k; ++u) required = sat_mul(required, static_cast<std::uint64_t>(m));
  if (required > budget.max_assignments) {
    throw BudgetExceeded("brute_force: " + std::to_string(required) +
                         " assignments required, budget is " +
                         std::to_string(budget.max_assignments));
  }
  UeSearch search(graph, k_max, m, objective, channel);
  for_each_rgs(l, m, [&](const std::vector<int>& bs_labels) { search.run(bs_labels); });
  if (!search.found) throw Infeasible("brute_force: no feasible decomposition");
  BruteResult r;
  r.decomposition = Decomposition(k, l, search.best_assignment).canonical();
  // The search accumulates by difference; report the cut summed directly.
  r.value = objective == BruteObjective::kSumcut ? sumcut(graph, r.decomposition) : search.best;
  r.enumerated = search.evaluated;
  return r;
}

std::vector<int> kmeans(const std::vector<Point>& points, int clusters, std::uint64_t seed) {
  const int n = static_cast<int>(points.size());
  if (clusters < 1 || clusters > n) throw InvalidArgument("kmeans: need 1 <= clusters <= points");
  Rng rng(seed);
  std::vector<Point> centres;
  centres.push_back(points[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n)))]);
  std::vector<double> d(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  while (static_cast<int>(centres.size()) < clusters) {
    int far = 0;
    for (int i = 0; i < n; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      d[ii] = std::min(d[ii], dist2(points[ii], centres.back()));
      if (d[ii] > d[static_cast<std::size_t>(far)]) far = i;
    }
    centres.push_back(points[static_cast<std::size_t>(far)]);
  }
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const int c = nearest(points[static_cast<std::size_t>(i)], centres);
      if (c != labels[static_cast<std::size_t>(i)]) {
        labels[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }
    if (!changed) break;
    const std::vector<Point> next = centroids(points, labels, clusters);
    for (int c = 0; c < clusters; ++c) {
      if (std::count(labels.begin(), labels.end(), c) > 0) {
        centres[static_cast<std::size_t>(c)] = next[static_cast<std::size_t>(c)];
      }
    }
  }
  return labels;
}

Decomposition kmeans_ue_centric(const NetworkLayout& layout, int k_max, std::uint64_t seed) {
  const int k = layout.num_ue();
  const int l = layout.num_bs();
  int clusters = std::min(optimal_m(k, k_max), k);
  std::vector<int> ue_labels = kmeans(layout.ue, clusters, derive_seed(seed, Stream::kBaseline, {0}));
  enforce_cap(layout.ue, ue_labels, clusters, k_max, seed);
  // The initial run may leave empty clusters; drop them.
  std::vector<int> remap(static_cast<std::size_t>(clusters), -1);
  int used = 0;
  for (int& c : ue_labels) {
    if (remap[static_cast<std::size_t>(c)] < 0) remap[static_cast<std::size_t>(c)] = used++;
    c = remap[static_cast<std::size_t>(c)];
  }
  clusters = used;
  if (clusters > l) {
    throw Infeasible("kmeans-ue: " + std::to_string(clusters) + " UE clusters but only " +
                     std::to_string(l) + " BSs");
  }
  const std::vector<Point> centres = centroids(layout.ue, ue_labels, clusters);
  std::vector<int> bs_labels(static_cast<std::size_t>(l));
  std::vector<int> bs_count(static_cast<std::size_t>(clusters), 0);
  for (int b = 0; b < l; ++b) {
    bs_labels[static_cast<std::size_t>(b)] = nearest(layout.bs[static_cast<std::size_t>(b)], centres);
    ++bs_count[static_cast<std::size_t>(bs_labels[static_cast<std::size_t>(b)])];
  }
  for (int c = 0; c < clusters; ++c) {
    if (bs_count[static_cast<std::size_t>(c)] > 0) continue;
    int pick = -1;
    for (int b = 0; b < l; ++b) {
      if (bs_count[static_cast<std::size_t>(bs_labels[static_cast<std::size_t>(b)])] < 2) continue;
      if (pick < 0 || dist2(layout.bs[static_cast<std::size_t>(b)], centres[static_cast<std::size_t>(c)]) <
                          dist2(layout.bs[static_cast<std::size_t>(pick)], centres[static_cast<std::size_t>(c)])) {
        pick = b;
      }
    }
    if (pick < 0) throw Infeasible("kmeans-ue: no BS can be spared for an empty cluster");
    --bs_count[static_cast<std::size_t>(bs_labels[static_cast<std::size_t>(pick)])];
    bs_labels[static_cast<std::size_t>(pick)] = c;
    ++bs_count[static_cast<std::size_t>(c)];
  }
  std::vector<int> assignment = ue_labels;
  assignment.insert(assignment.end(), bs_labels.begin(), bs_labels.end());
  return Decomposition(k, l, std::move(assignment)).canonical();
}

Decomposition kmeans_bs_centric(const NetworkLayout& layout, const PathGainMatrix& gains,
                                int k_max, std::uint64_t seed) {
  const int k = layout.num_ue();
  const int l = layout.num_bs();
  if (gains.num_ue() != k || gains.num_bs() != l) {
    throw InvalidArgument("kmeans-bs: gain matrix does not match the layout");
  }
  const int clusters = optimal_m(k, k_max);
  if (clusters > l) {
    throw Infeasible("kmeans-bs: " + std::to_string(clusters) + " clusters need more than " +
                     std::to_string(l) + " BSs");
  }
  std::vector<int> bs_labels = kmeans(layout.bs, clusters, derive_seed(seed, Stream::kBaseline, {2}));
  std::vector<int> bs_count(static_cast<std::size_t>(clusters), 0);
  for (int c : bs_labels) ++bs_count[static_cast<std::size_t>(c)];
  for (int c = 0; c < clusters; ++c) {
    // Coincident BSs can leave a cluster empty; lend it a BS from a shared one.
    if (bs_count[static_cast<std::size_t>(c)] > 0) continue;
    for (int b = 0; b < l; ++b) {
      auto& from = bs_count[static_cast<std::size_t>(bs_labels[static_cast<std::size_t>(b)])];
      if (from < 2) continue;
      --from;
      bs_labels[static_cast<std::size_t>(b)] = c;
      ++bs_count[static_cast<std::size_t>(c)];
      break;
    }
  }
  // gain(u, c): strongest path gain from UE u to a BS of cluster c.
  Eigen::MatrixXd gain = Eigen::MatrixXd::Zero(k, clusters);
  for (int u = 0; u < k; ++u) {
    for (int b = 0; b < l; ++b) {
      const int c = bs_labels[static_cast<std::size_t>(b)];
      gain(u, c) = std::max(gain(u, c), gains.q(u, b));
    }
  }
  std::vector<int> ue_labels(static_cast<std::size_t>(k));
  std::vector<int> ue_count(static_cast<std::size_t>(clusters), 0);
  for (int u = 0; u < k; ++u) {
    Eigen::Index best = 0;
    gain.row(u).maxCoeff(&best);
    ue_labels[static_cast<std::size_t>(u)] = static_cast<int>(best);
    ++ue_count[static_cast<std::size_t>(best)];
  }
  for (int c = 0; c < clusters; ++c) {
    while (ue_count[static_cast<std::size_t>(c)] > k_max) {
      int weakest = -1;
      for (int u = 0; u < k; ++u) {
        if (ue_labels[static_cast<std::size_t>(u)] != c) continue;
        if (weakest < 0 || gain(u, c) < gain(weakest, c)) weakest = u;
      }
      int target = -1;
      for (int d = 0; d < clusters; ++d) {
        if (ue_count[static_cast<std::size_t>(d)] >= k_max) continue;
        if (target < 0 || gain(weakest, d) > gain(weakest, target)) target = d;
      }
      // ceil(K / k_max) clusters always leave room somewhere.
      --ue_count[static_cast<std::size_t>(c)];
      ++ue_count[static_cast<std::size_t>(target)];
      ue_labels[static_cast<std::size_t>(weakest)] = target;
    }
  }
  std::vector<int> assignment = ue_labels;
  assignment.insert(assignment.end(), bs_labels.begin(), bs_labels.end());
  return Decomposition(k, l, std::move(assignment)).canonical();
}

}  // namespace ccfnet
