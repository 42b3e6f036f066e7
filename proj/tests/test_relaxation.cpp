#include <gtest/gtest.h>

#include <bit>

#include "ccfnet/capacity.hpp"
#include "ccfnet/relaxation.hpp"
#include "ccfnet/rng.hpp"
#include "oracles.hpp"

using namespace ccfnet;

namespace {

BipartiteGraph random_graph(std::uint64_t seed, int k, int l) {
  return build_graph(path_gains(gen_layout(seed, k, l), ChannelModel{}));
}

// Minimum over integral assignments consistent with the mask, by enumeration.
oracle::Best masked_optimum(const BipartiteGraph& g, const ColumnBounds& b, const AllowedMask& mask) {
  const int m = b.columns();
  const int k = g.num_ue();
  const int n = g.num_vertices();
  oracle::Best best;
  oracle::for_each_labelled(n, m, [&](const std::vector<int>& a) {
    std::vector<int> ue(m, 0), bs(m, 0);
    for (int i = 0; i < n; ++i) {
      if (!(mask[i] >> a[i] & 1ULL)) return;
      ++(i < k ? ue : bs)[a[i]];
    }
    for (int c = 0; c < m; ++c) {
      if (ue[c] < b.ue_lo[c] || ue[c] > b.ue_hi[c] || bs[c] < b.bs_lo[c]) return;
    }
    const double v = oracle::sumcut(g.weights(), a);
    if (v < best.value) {
      best.found = true;
      best.value = v;
      best.assignment = a;
    }
  });
  return best;
}

AllowedMask random_mask(Rng& rng, int n, int m) {
  AllowedMask mask = full_mask(n, m);
  for (auto& bits : mask) {
    if (rng.uniform() < 0.3) {
      bits = 1ULL << rng.below(m);
    } else if (rng.uniform() < 0.3 && m > 1) {
      bits &= ~(1ULL << rng.below(m));
    }
  }
  return mask;
}

void expect_feasible_point(const Eigen::MatrixXd& x, const ColumnBounds& b, const AllowedMask& mask,
                           int k) {
  const double tol = 1e-6;
  for (int i = 0; i < x.rows(); ++i) {
    EXPECT_NEAR(x.row(i).sum(), 1.0, tol);
    for (int c = 0; c < x.cols(); ++c) {
      EXPECT_GE(x(i, c), -tol);
      EXPECT_LE(x(i, c), 1.0 + tol);
      if (!(mask[i] >> c & 1ULL)) EXPECT_EQ(x(i, c), 0.0);
    }
  }
  for (int c = 0; c < x.cols(); ++c) {
    const double ue = x.col(c).head(k).sum();
    const double bs = x.col(c).tail(x.rows() - k).sum();
    EXPECT_GE(ue, b.ue_lo[c] - tol);
    EXPECT_LE(ue, b.ue_hi[c] + tol);
    EXPECT_GE(bs, b.bs_lo[c] - tol);
  }
}

}  // namespace

TEST(Bounds, Shapes) {
  const ColumnBounds c = ColumnBounds::capped(3, 4);
  EXPECT_EQ(c.columns(), 3);
  EXPECT_EQ(c.ue_hi, (std::vector<int>{4, 4, 4}));
  EXPECT_EQ(c.bs_lo, (std::vector<int>{1, 1, 1}));
  const ColumnBounds b = ColumnBounds::bisection(5, 9, 1, 2);
  EXPECT_EQ(b.ue_lo, (std::vector<int>{5, 9}));
  EXPECT_EQ(b.ue_hi, (std::vector<int>{5, 9}));
  EXPECT_EQ(b.bs_lo, (std::vector<int>{1, 2}));
}

TEST(Feasibility, MatchesEnumerationUnderRandomMasks) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const int k = 1 + static_cast<int>(rng.below(5));
    const int l = 1 + static_cast<int>(rng.below(4));
    const int m = 1 + static_cast<int>(rng.below(3));
    const int k_max = 1 + static_cast<int>(rng.below(3));
    const BipartiteGraph g = random_graph(100 + t, k, l);
    const ColumnBounds b = ColumnBounds::capped(m, k_max);
    const AllowedMask mask = random_mask(rng, k + l, m);
    const auto got = feasible_assignment(g, b, mask);
    const oracle::Best truth = masked_optimum(g, b, mask);
    ASSERT_EQ(got.has_value(), truth.found) << "trial " << t;
    if (got) {
      std::vector<int> ue(m, 0), bs(m, 0);
      for (int i = 0; i < k + l; ++i) {
        ASSERT_TRUE(mask[i] >> (*got)[i] & 1ULL);
        ++(i < k ? ue : bs)[(*got)[i]];
      }
      for (int c = 0; c < m; ++c) {
        EXPECT_LE(ue[c], k_max);
        EXPECT_GE(bs[c], 1);
      }
    }
  }
}

TEST(Relaxation, ZeroWeightsGiveZeroBound) {
  const BipartiteGraph g(Eigen::MatrixXd::Zero(4, 3));
  const ColumnBounds b = ColumnBounds::capped(2, 2);
  const Relaxation r = relax_lower_bound(g, b, full_mask(7, 2));
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.lb, 0.0, 1e-12);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
}

TEST(Relaxation, FullyFixedPatternIsExact) {
  const BipartiteGraph g = random_graph(5, 4, 3);
  const std::vector<int> a{0, 1, 1, 0, 0, 1, 0};
  AllowedMask mask(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) mask[i] = 1ULL << a[i];
  const Relaxation r = relax_lower_bound(g, ColumnBounds::capped(2, 2), mask);
  ASSERT_TRUE(r.feasible);
  const double q = quadratic_objective(g, to_matrix(Decomposition(4, 3, a)).x);
  EXPECT_NEAR(r.lb, q, 1e-9 * q);
  EXPECT_NEAR(r.value, q, 1e-9 * q);
}

TEST(Relaxation, InfeasibleMaskIsReported) {
  const BipartiteGraph g = random_graph(6, 3, 2);
  AllowedMask mask = full_mask(5, 2);
  mask[3] = mask[4] = 1ULL;  // both BSs forced into column 0
  EXPECT_FALSE(relax_lower_bound(g, ColumnBounds::capped(2, 2), mask).feasible);
}

TEST(Relaxation, BoundIsValidAndPointFeasible) {
  Rng rng(2);
  int checked = 0;
  for (int t = 0; t < 120; ++t) {
    const int k = 2 + static_cast<int>(rng.below(4));
    const int l = 2 + static_cast<int>(rng.below(3));
    const int m = 2 + static_cast<int>(rng.below(2));
    const bool bisect = m == 2 && rng.uniform() < 0.5;
    const int k1 = 1 + static_cast<int>(rng.below(k - 1));
    const ColumnBounds b = bisect ? ColumnBounds::bisection(k1, k - k1, 1, 1)
                                  : ColumnBounds::capped(m, 1 + static_cast<int>(rng.below(k)));
    const BipartiteGraph g = random_graph(200 + t, k, l);
    const AllowedMask mask = random_mask(rng, k + l, b.columns());
    const oracle::Best truth = masked_optimum(g, b, mask);
    const Relaxation r = relax_lower_bound(g, b, mask);
    ASSERT_EQ(r.feasible, truth.found);
    if (!truth.found) continue;
    ++checked;
    EXPECT_LE(r.lb, truth.value * (1.0 + 1e-9) + 1e-9) << "trial " << t;
    EXPECT_LE(r.lb, r.value + 1e-9 * std::abs(r.value));
    EXPECT_GE(fixed_edge_bound(g, mask), 0.0);
    EXPECT_LE(fixed_edge_bound(g, mask), truth.value * (1.0 + 1e-12));
    expect_feasible_point(r.x, b, mask, k);
    EXPECT_NEAR(quadratic_objective(g, r.x), r.value, 1e-8 * (1.0 + r.value));
  }
  EXPECT_GT(checked, 50);
}

TEST(Relaxation, RootBoundIsTightOnDisconnectedBlocks) {
  // Two decoupled UE-BS pairs: the optimum (and the root bound) is 0.
  const BipartiteGraph g(Eigen::MatrixXd::Identity(2, 2));
  const Relaxation r = relax_lower_bound(g, ColumnBounds::capped(2, 1), full_mask(4, 2));
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.lb, 0.0, 1e-9);
}

TEST(Relaxation, WarmStartKeepsValidity) {
  const BipartiteGraph g = random_graph(9, 5, 4);
  const ColumnBounds b = ColumnBounds::capped(2, 3);
  AllowedMask mask = full_mask(9, 2);
  const Relaxation root = relax_lower_bound(g, b, mask);
  mask[0] = 1ULL;
  RelaxOptions opts;
  opts.warm_x = &root.x;
  opts.warm_multipliers = &root.multipliers;
  const Relaxation child = relax_lower_bound(g, b, mask, opts);
  const oracle::Best truth = masked_optimum(g, b, mask);
  ASSERT_TRUE(child.feasible);
  EXPECT_LE(child.lb, truth.value * (1 + 1e-9));
  expect_feasible_point(child.x, b, mask, 5);
}
