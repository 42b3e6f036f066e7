#include <gtest/gtest.h>

#include <bit>

#include "ccfnet/bnb.hpp"
#include "ccfnet/capacity.hpp"
#include "ccfnet/errors.hpp"
#include "ccfnet/rng.hpp"
#include "oracles.hpp"

using namespace ccfnet;

namespace {

BipartiteGraph random_graph(std::uint64_t seed, int k, int l) {
  return build_graph(path_gains(gen_layout(seed, k, l), ChannelModel{}));
}

double rel(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

Eigen::MatrixXd one_hot(const std::vector<int>& a, int m) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.size()), m);
  for (std::size_t i = 0; i < a.size(); ++i) x(static_cast<Eigen::Index>(i), a[i]) = 1.0;
  return x;
}

bool meets(const std::vector<int>& a, const ColumnBounds& b, int k) {
  std::vector<int> ue(b.columns(), 0), bs(b.columns(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) ++(static_cast<int>(i) < k ? ue : bs)[a[i]];
  for (int c = 0; c < b.columns(); ++c) {
    if (ue[c] < b.ue_lo[c] || ue[c] > b.ue_hi[c] || bs[c] < b.bs_lo[c]) return false;
  }
  return true;
}

}  // namespace

TEST(Config, Validation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.check());
  c.epsilon = 0.0;
  EXPECT_THROW(c.check(), InvalidArgument);
  c = SolverConfig{};
  c.node_limit = 0;
  EXPECT_THROW(c.check(), InvalidArgument);
}

TEST(RoundRepair, BinaryFeasibleIsUnchanged) {
  const BipartiteGraph g = random_graph(1, 4, 3);
  const std::vector<int> a{0, 1, 0, 1, 0, 1, 1};
  const auto r = round_and_repair(g, one_hot(a, 2), ColumnBounds::capped(2, 2));
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(*r, a);
}

TEST(RoundRepair, MovesOneUeOutOfOverfullColumn) {
  const BipartiteGraph g = random_graph(2, 5, 3);
  // Column 0 holds 3 UEs against a cap of 2; every column has a BS.
  const std::vector<int> start{0, 0, 0, 1, 1, 0, 1, 2};
  const ColumnBounds b = ColumnBounds::capped(3, 2);
  const auto r = round_and_repair(g, one_hot(start, 3), b);
  ASSERT_TRUE(r.has_value());
  EXPECT_TRUE(meets(*r, b, 5));
  int moved = 0;
  for (std::size_t i = 0; i < start.size(); ++i) moved += (*r)[i] != start[i];
  EXPECT_EQ(moved, 1);
}

TEST(RoundRepair, FailsWhenFloorsCannotBeMet) {
  const BipartiteGraph g = random_graph(3, 2, 1);
  const std::vector<int> a{0, 1, 0};
  EXPECT_FALSE(round_and_repair(g, one_hot(a, 2), ColumnBounds::capped(2, 1)).has_value());
}

TEST(RoundRepair, RandomFractionalPointsRepairToFeasible) {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const int k = 2 + static_cast<int>(rng.below(8));
    const int l = 2 + static_cast<int>(rng.below(6));
    const int k_max = 1 + static_cast<int>(rng.below(k));
    const int m = optimal_m(k, k_max);
    if (m > l) continue;
    const BipartiteGraph g = random_graph(300 + t, k, l);
    Eigen::MatrixXd x(k + l, m);
    for (int i = 0; i < x.rows(); ++i) {
      for (int c = 0; c < m; ++c) x(i, c) = rng.uniform();
      x.row(i) /= x.row(i).sum();
    }
    const ColumnBounds b = ColumnBounds::capped(m, k_max);
    const auto r = round_and_repair(g, x, b);
    ASSERT_TRUE(r.has_value()) << "trial " << t;
    EXPECT_TRUE(meets(*r, b, k));
  }
}

TEST(SolveP4, DisconnectedPairsCostNothing) {
  const BipartiteGraph g(Eigen::MatrixXd::Identity(2, 2));
  const SolveReport r = solve_p4(g, 1, SolverConfig{});
  ASSERT_TRUE(r.decomposition.has_value());
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_EQ(r.decomposition->assignment(), (std::vector<int>{0, 1, 0, 1}));
  EXPECT_EQ(r.status, SolveStatus::kOptimal);
}

TEST(SolveP4, SmallInstanceMatchesOracle) {
  const BipartiteGraph g = random_graph(10, 4, 3);
  const SolveReport r = solve_p4(g, 2, SolverConfig{});
  const oracle::Best truth = oracle::min_sumcut_capped(g.weights(), 2, 2);
  ASSERT_TRUE(truth.found);
  EXPECT_LE(rel(r.objective, truth.value), 1e-9);
}

TEST(SolveP4, TwentyInstancesMatchOracle) {
  for (int t = 0; t < 20; ++t) {
    const BipartiteGraph g = random_graph(500 + t, 6, 5);
    SolverConfig cfg;
    cfg.trace = true;
    const SolveReport r = solve_p4(g, 3, cfg);
    const oracle::Best truth = oracle::min_sumcut_capped(g.weights(), 2, 3);
    ASSERT_TRUE(r.decomposition.has_value());
    EXPECT_LE(rel(r.objective, truth.value), 1e-9) << "instance " << t;
    EXPECT_LE(rel(sumcut(g, *r.decomposition), r.objective), 1e-12);
    EXPECT_TRUE(validate(*r.decomposition, 3).empty());
    EXPECT_EQ(r.decomposition->m(), 2);
    if (r.status == SolveStatus::kOptimal) EXPECT_LE(r.gap, cfg.epsilon);
  }
}

TEST(SolveP4, InfeasibleWithTooFewBs) {
  EXPECT_THROW(solve_p4(random_graph(1, 7, 2), 2, SolverConfig{}), Infeasible);
}

TEST(SolveP4, NodeLimitReturnsIncumbent) {
  SolverConfig cfg;
  cfg.node_limit = 1;
  const BipartiteGraph g = random_graph(11, 9, 6);
  const SolveReport r = solve_p4(g, 3, cfg);
  EXPECT_EQ(r.status, SolveStatus::kLimitHit);
  ASSERT_TRUE(r.decomposition.has_value());
  EXPECT_TRUE(validate(*r.decomposition, 3).empty());
  EXPECT_EQ(r.nodes_explored, 1);
  EXPECT_GT(r.gap, 0.0);
}

TEST(SolveP4, Deterministic) {
  const BipartiteGraph g = random_graph(12, 8, 6);
  SolverConfig cfg;
  cfg.seed = 99;
  const SolveReport a = solve_p4(g, 3, cfg);
  const SolveReport b = solve_p4(g, 3, cfg);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.decomposition, b.decomposition);
  EXPECT_EQ(a.nodes_explored, b.nodes_explored);
  EXPECT_EQ(a.status, b.status);
}

TEST(SolveP4, TraceAudit) {
  for (int t = 0; t < 20; ++t) {
    const int k = 4 + t % 3;
    const int l = 3 + t % 3;
    const int k_max = 2 + t % 2;
    const int m = optimal_m(k, k_max);
    const BipartiteGraph g = random_graph(700 + t, k, l);
    SolverConfig cfg;
    cfg.trace = true;
    const SolveReport r = solve_p4(g, k_max, cfg);
    const ColumnBounds b = ColumnBounds::capped(m, k_max);
    double incumbent = std::numeric_limits<double>::infinity();
    for (const NodeRecord& n : r.trace) {
      EXPECT_LE(n.incumbent, incumbent);
      incumbent = n.incumbent;
      double best = std::numeric_limits<double>::infinity();
      oracle::for_each_labelled(k + l, m, [&](const std::vector<int>& a) {
        for (int i = 0; i < k + l; ++i) {
          if (!(n.mask[i] >> a[i] & 1ULL)) return;
        }
        if (meets(a, b, k)) best = std::min(best, oracle::sumcut(g.weights(), a));
      });
      // A node bound never exceeds the best completion in its subtree.
      if (std::isfinite(n.lb) && std::isfinite(best)) {
        EXPECT_LE(n.lb, best * (1 + cfg.relax_tol) + 1e-9) << "instance " << t << " node " << n.id;
      }
      if (n.outcome != NodeOutcome::kPrunedBound) continue;
      EXPECT_GE(best, n.incumbent * (1 - cfg.epsilon) - 1e-9) << "instance " << t << " node " << n.id;
    }
  }
}

TEST(SolveP5, DisconnectedHalvesRecovered) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
  w.block(0, 0, 2, 2).setOnes();
  w.block(2, 2, 2, 2).setConstant(2.0);
  const SolveReport r = solve_p5(BipartiteGraph(w), 2, 2, 1, 1, SolverConfig{});
  ASSERT_TRUE(r.decomposition.has_value());
  EXPECT_EQ(r.objective, 0.0);
  const auto& a = r.decomposition->assignment();
  EXPECT_EQ(a[0], a[1]);
  EXPECT_EQ(a[0], a[4]);
  EXPECT_EQ(a[0], a[5]);
  EXPECT_EQ(a[2], a[6]);
  EXPECT_NE(a[0], a[2]);
}

TEST(SolveP5, BalancedSplitsMatchEnumeration) {
  for (int t = 0; t < 10; ++t) {
    const BipartiteGraph g = random_graph(900 + t, 6, 4);
    const SolveReport r = solve_p5(g, 3, 3, 1, 1, SolverConfig{});
    const oracle::Best truth = oracle::min_sumcut(g.weights(), 2, {3, 3}, {3, 3}, {1, 1});
    EXPECT_LE(rel(r.objective, truth.value), 1e-9) << "instance " << t;
  }
}

TEST(SolveP5, UnbalancedTargetsAreExact) {
  for (int t = 0; t < 10; ++t) {
    const BipartiteGraph g = random_graph(950 + t, 7, 5);
    const SolveReport r = solve_p5(g, 3, 4, 1, 2, SolverConfig{});
    ASSERT_TRUE(r.decomposition.has_value());
    EXPECT_EQ(r.decomposition->ue_counts(), (std::vector<int>{3, 4}));
    EXPECT_GE(r.decomposition->bs_counts()[1], 2);
    const oracle::Best truth = oracle::min_sumcut(g.weights(), 2, {3, 4}, {3, 4}, {1, 2});
    EXPECT_LE(rel(r.objective, truth.value), 1e-9) << "instance " << t;
  }
}

TEST(SolveP5, Guards) {
  const BipartiteGraph g = random_graph(1, 4, 3);
  EXPECT_THROW(solve_p5(g, 0, 4, 1, 1, SolverConfig{}), InvalidArgument);
  EXPECT_THROW(solve_p5(g, 1, 2, 1, 1, SolverConfig{}), InvalidArgument);
  EXPECT_THROW(solve_p5(g, 2, 2, 2, 2, SolverConfig{}), Infeasible);
}
