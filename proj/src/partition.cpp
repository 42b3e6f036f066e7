#include "ccfnet/partition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "ccfnet/errors.hpp"

namespace ccfnet {

Decomposition::Decomposition(int num_ue, int num_bs, std::vector<int> assignment)
    : num_ue_(num_ue), num_bs_(num_bs), assignment_(std::move(assignment)) {
  if (num_ue < 0 || num_bs < 0) throw InvalidArgument("decomposition: negative size");
  if (assignment_.size() != static_cast<std::size_t>(num_ue + num_bs)) {
    throw InvalidArgument("decomposition: assignment length must be K + L");
  }
  int max_label = -1;
  for (int a : assignment_) {
    if (a < 0) throw InvalidArgument("decomposition: negative subnetwork label");
    max_label = std::max(max_label, a);
  }
  m_ = max_label + 1;
  std::vector<char> used(static_cast<std::size_t>(m_), 0);
  for (int a : assignment_) used[static_cast<std::size_t>(a)] = 1;
  if (std::find(used.begin(), used.end(), 0) != used.end()) {
    throw InvalidArgument("decomposition: empty subnetwork label");
  }
}

Decomposition Decomposition::whole(int num_ue, int num_bs) {
  return Decomposition(num_ue, num_bs, std::vector<int>(static_cast<std::size_t>(num_ue + num_bs), 0));
}

std::vector<int> Decomposition::ues(int m) const {
  std::vector<int> out;
  for (int k = 0; k < num_ue_; ++k) {
    if (of_ue(k) == m) out.push_back(k);
  }
  return out;
}

std::vector<int> Decomposition::bss(int m) const {
  std::vector<int> out;
  for (int l = 0; l < num_bs_; ++l) {
    if (of_bs(l) == m) out.push_back(l);
  }
  return out;
}

std::vector<int> Decomposition::ue_counts() const {
  std::vector<int> c(static_cast<std::size_t>(m_), 0);
  for (int k = 0; k < num_ue_; ++k) ++c[static_cast<std::size_t>(of_ue(k))];
  return c;
}

std::vector<int> Decomposition::bs_counts() const {
  std::vector<int> c(static_cast<std::size_t>(m_), 0);
  for (int l = 0; l < num_bs_; ++l) ++c[static_cast<std::size_t>(of_bs(l))];
  return c;
}

Decomposition Decomposition::canonical() const {
  std::vector<int> relabel(static_cast<std::size_t>(m_), -1);
  int next = 0;
  std::vector<int> out(assignment_.size());
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    int& r = relabel[static_cast<std::size_t>(assignment_[i])];
    if (r < 0) r = next++;
    out[i] = r;
  }
  return Decomposition(num_ue_, num_bs_, std::move(out));
}

bool Decomposition::is_canonical() const {
  int next = 0;
  for (int a : assignment_) {
    if (a > next) return false;
    if (a == next) ++next;
  }
  return true;
}

std::string to_string(Constraint c) {
  switch (c) {
    case Constraint::kUeCap:
      return "ue-cap";
    case Constraint::kBsNonEmpty:
      return "bs-nonempty";
  }
  return "unknown";
}

int optimal_m(int k, int k_max) {
  if (k < 1) throw InvalidArgument("optimal_m: need at least one UE");
  if (k_max < 1) throw InvalidArgument("optimal_m: k_max must be at least 1");
  return (k + k_max - 1) / k_max;
}

std::vector<Violation> validate(const Decomposition& d, int k_max) {
  std::vector<Violation> out;
  const auto ue = d.ue_counts();
  const auto bs = d.bs_counts();
  for (int m = 0; m < d.m(); ++m) {
    const auto i = static_cast<std::size_t>(m);
    if (ue[i] > k_max) out.push_back({Constraint::kUeCap, m, ue[i]});
    if (bs[i] == 0) out.push_back({Constraint::kBsNonEmpty, m, 0});
  }
  return out;
}

DecisionMatrix to_matrix(const Decomposition& d) {
  DecisionMatrix out;
  out.num_ue = d.num_ue();
  out.x = Eigen::MatrixXd::Zero(d.num_vertices(), d.m());
  for (int i = 0; i < d.num_vertices(); ++i) {
    out.x(i, d.assignment()[static_cast<std::size_t>(i)]) = 1.0;
  }
  return out;
}

Decomposition from_matrix(const DecisionMatrix& x) {
  const auto rows = x.x.rows();
  if (x.num_ue < 0 || x.num_ue > rows) throw InvalidArgument("from_matrix: bad UE count");
  std::vector<int> assignment(static_cast<std::size_t>(rows), -1);
  for (Eigen::Index i = 0; i < rows; ++i) {
    int ones = 0;
    for (Eigen::Index m = 0; m < x.x.cols(); ++m) {
      const double v = x.x(i, m);
      if (v == 1.0) {
        ++ones;
        assignment[static_cast<std::size_t>(i)] = static_cast<int>(m);
      } else if (v != 0.0) {
        throw InvalidArgument("from_matrix: non-binary entry in row " + std::to_string(i));
      }
    }
    if (ones != 1) {
      throw InvalidArgument("from_matrix: row " + std::to_string(i) + " has " +
                            std::to_string(ones) + " ones");
    }
  }
  // Redundant with the per-row check; catches a corrupted matrix shape.
  if (std::lround(x.x.sum()) != rows) throw InvalidArgument("from_matrix: total is not K + L");
  return Decomposition(x.num_ue, static_cast<int>(rows) - x.num_ue, std::move(assignment));
}

std::string describe(const Decomposition& d) {
  std::ostringstream os;
  for (int m = 0; m < d.m(); ++m) {
    os << 'C' << m + 1 << ": U={";
    const auto u = d.ues(m);
    for (std::size_t i = 0; i < u.size(); ++i) os << (i ? "," : "") << 'u' << u[i] + 1;
    os << "} B={";
    const auto b = d.bss(m);
    for (std::size_t i = 0; i < b.size(); ++i) os << (i ? "," : "") << 'b' << b[i] + 1;
    os << "}\n";
  }
  return os.str();
}

}  // namespace ccfnet
