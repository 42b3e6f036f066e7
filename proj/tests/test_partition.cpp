#include <gtest/gtest.h>

#include "ccfnet/errors.hpp"
#include "ccfnet/partition.hpp"
#include "ccfnet/rng.hpp"

using namespace ccfnet;

namespace {

// Random decomposition with every label 0..m-1 used at least once by a BS.
Decomposition random_decomposition(Rng& rng, int k, int l, int m) {
  std::vector<int> a(static_cast<std::size_t>(k + l));
  for (int b = 0; b < l; ++b) a[k + b] = b < m ? b : static_cast<int>(rng.below(m));
  for (int u = 0; u < k; ++u) a[u] = static_cast<int>(rng.below(m));
  return Decomposition(k, l, a);
}

}  // namespace

TEST(OptimalM, PaperInstancesAndExactDivision) {
  EXPECT_EQ(optimal_m(24, 5), 5);
  EXPECT_EQ(optimal_m(30, 10), 3);
  EXPECT_EQ(optimal_m(5, 3), 2);
  EXPECT_EQ(optimal_m(1, 1), 1);
  EXPECT_THROW(optimal_m(10, 0), InvalidArgument);
}

TEST(Decomposition, ViewsAndCounts) {
  const Decomposition d(3, 2, {1, 0, 1, 0, 1});
  EXPECT_EQ(d.m(), 2);
  EXPECT_EQ(d.ues(1), (std::vector<int>{0, 2}));
  EXPECT_EQ(d.bss(0), (std::vector<int>{0}));
  EXPECT_EQ(d.ue_counts(), (std::vector<int>{1, 2}));
  EXPECT_EQ(d.bs_counts(), (std::vector<int>{1, 1}));
  EXPECT_EQ(d.of_bs(1), 1);
}

TEST(Decomposition, RejectsGapsAndBadLengths) {
  EXPECT_THROW(Decomposition(2, 1, {0, 2, 0}), InvalidArgument);
  EXPECT_THROW(Decomposition(2, 1, {0, 0}), InvalidArgument);
  EXPECT_THROW(Decomposition(2, 1, {0, -1, 0}), InvalidArgument);
}

TEST(Decomposition, CanonicalRelabelsByFirstVertex) {
  const Decomposition d(3, 2, {2, 0, 2, 1, 0});
  const Decomposition c = d.canonical();
  EXPECT_EQ(c.assignment(), (std::vector<int>{0, 1, 0, 2, 1}));
  EXPECT_TRUE(c.is_canonical());
  EXPECT_FALSE(d.is_canonical());
}

TEST(Validate, ReportsMissingBsAndCapOverflow) {
  const Decomposition no_bs(2, 1, {1, 0, 0});
  const auto v = validate(no_bs, 5);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].constraint, Constraint::kBsNonEmpty);
  EXPECT_EQ(v[0].subnetwork, 1);

  const Decomposition crowded(3, 1, {0, 0, 0, 0});
  const auto w = validate(crowded, 2);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].constraint, Constraint::kUeCap);
  EXPECT_EQ(w[0].count, 3);
  EXPECT_TRUE(validate(crowded, 3).empty());
}

TEST(DecisionMatrix, SinglePair) {
  const DecisionMatrix x = to_matrix(Decomposition::whole(1, 1));
  EXPECT_EQ(x.x, Eigen::MatrixXd::Ones(2, 1));
}

TEST(DecisionMatrix, RoundTripOnRandomDecompositions) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const int l = 1 + static_cast<int>(rng.below(8));
    const int k = 1 + static_cast<int>(rng.below(8));
    const int m = 1 + static_cast<int>(rng.below(l));
    const Decomposition d = random_decomposition(rng, k, l, m);
    EXPECT_EQ(from_matrix(to_matrix(d)), d);
  }
}

TEST(DecisionMatrix, RejectsBadRows) {
  DecisionMatrix x = to_matrix(Decomposition(1, 2, {0, 0, 1}));
  DecisionMatrix zero_row = x;
  zero_row.x.row(1).setZero();
  EXPECT_THROW(from_matrix(zero_row), InvalidArgument);
  DecisionMatrix double_row = x;
  double_row.x.row(1).setOnes();
  EXPECT_THROW(from_matrix(double_row), InvalidArgument);
  DecisionMatrix fractional = x;
  fractional.x(0, 0) = 0.5;
  fractional.x(0, 1) = 0.5;
  EXPECT_THROW(from_matrix(fractional), InvalidArgument);
}

TEST(Describe, ListsMembersOneBased) {
  const Decomposition d(2, 2, {0, 1, 1, 0});
  EXPECT_EQ(describe(d), "C1: U={u1} B={b2}\nC2: U={u2} B={b1}\n");
}
