#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ccfnet {

/// Assignment of every vertex (K UEs, then L BSs) to one of M subnetworks,
/// labelled 0..M-1. Every label in that range is used by at least one vertex.
class Decomposition {
 public:
  Decomposition() = default;
  Decomposition(int num_ue, int num_bs, std::vector<int> assignment);

  /// Everything in subnetwork 0.
  static Decomposition whole(int num_ue, int num_bs);

  int num_ue() const { return num_ue_; }
  int num_bs() const { return num_bs_; }
  int num_vertices() const { return num_ue_ + num_bs_; }
  int m() const { return m_; }
  const std::vector<int>& assignment() const { return assignment_; }

  int of_ue(int k) const { return assignment_[static_cast<std::size_t>(k)]; }
  int of_bs(int l) const { return assignment_[static_cast<std::size_t>(num_ue_ + l)]; }

  /// UE indices (0..K-1) of subnetwork m, ascending.
  std::vector<int> ues(int m) const;
  /// BS indices (0..L-1) of subnetwork m, ascending.
  std::vector<int> bss(int m) const;
  std::vector<int> ue_counts() const;
  std::vector<int> bs_counts() const;

  /// Relabels subnetworks in order of their first vertex.
  Decomposition canonical() const;
  bool is_canonical() const;

  bool operator==(const Decomposition&) const = default;

 private:
  int num_ue_ = 0;
  int num_bs_ = 0;
  int m_ = 0;
  std::vector<int> assignment_;
};

enum class Constraint {
  kUeCap,       // more than k_max UEs in a subnetwork
  kBsNonEmpty,  // subnetwork without a BS
};

struct Violation {
  Constraint constraint;
  int subnetwork;
  int count;  // offending UE or BS count
  bool operator==(const Violation&) const = default;
};

std::string to_string(Constraint c);

/// Smallest subnetwork count meeting the UE cap: ceil(k / k_max).
int optimal_m(int k, int k_max);

/// All cap and BS-presence violations; empty means feasible. Overlap and
/// cover cannot fail for an assignment vector.
std::vector<Violation> validate(const Decomposition& d, int k_max);

/// (K+L) x M binary indicator matrix; rows are vertices.
struct DecisionMatrix {
  int num_ue = 0;
  Eigen::MatrixXd x;
};

DecisionMatrix to_matrix(const Decomposition& d);
/// Rejects rows that are not a single 1 among zeros.
Decomposition from_matrix(const DecisionMatrix& x);

/// One line per subnetwork: "C1: U={u1,u4} B={b2}" (1-based names).
std::string describe(const Decomposition& d);

}  // namespace ccfnet
