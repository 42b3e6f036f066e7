#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ccfnet {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// UE and BS positions in a square [0, area_side]^2 (unitless distances).
struct NetworkLayout {
  std::uint64_t seed = 0;
  double area_side = 1.0;
  std::vector<Point> ue;
  std::vector<Point> bs;

  int num_ue() const { return static_cast<int>(ue.size()); }
  int num_bs() const { return static_cast<int>(bs.size()); }
  bool operator==(const NetworkLayout&) const = default;
};

/// Large-scale channel parameters. Only the ratio power_p / noise_n0 enters the
/// capacity formulas.
struct ChannelModel {
  double alpha = 4.0;
  double power_p = 10.0;
  double noise_n0 = 1.0;
  double d_min = 1e-3;

  /// N0 = 1 and P = 10^(dB/10).
  static ChannelModel from_snr_db(double p_over_n0_db, double alpha = 4.0,
                                  double d_min = 1e-3);
  void check() const;
};

/// q(k, l) = max(d_lk, d_min)^(-alpha/2); rows are UEs, columns are BSs.
struct PathGainMatrix {
  Eigen::MatrixXd q;

  int num_ue() const { return static_cast<int>(q.rows()); }
  int num_bs() const { return static_cast<int>(q.cols()); }
};

/// Weighted UE-BS bipartite graph. Vertex i < K is UE i, vertex K + l is BS l.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;
  /// Takes the K x L edge-weight matrix directly.
  explicit BipartiteGraph(Eigen::MatrixXd weights);

  int num_ue() const { return static_cast<int>(w_.rows()); }
  int num_bs() const { return static_cast<int>(w_.cols()); }
  int num_vertices() const { return num_ue() + num_bs(); }
  bool is_ue(int vertex) const { return vertex < num_ue(); }

  const Eigen::MatrixXd& weights() const { return w_; }
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }
  const Eigen::VectorXd& degree() const { return degree_; }
  const Eigen::MatrixXd& laplacian() const { return laplacian_; }

  /// Edge weight between two vertices (zero inside the UE and BS classes).
  double weight(int i, int j) const { return adjacency_(i, j); }

  /// Subgraph induced by the given UEs and BSs (indices into this graph's UE
  /// and BS lists, in the order given).
  BipartiteGraph induced(std::span<const int> ues, std::span<const int> bss) const;

 private:
  Eigen::MatrixXd w_;
  Eigen::MatrixXd adjacency_;
  Eigen::VectorXd degree_;
  Eigen::MatrixXd laplacian_;
};

/// Draws K UEs then L BSs i.i.d. uniform over the square. Deterministic in seed.
NetworkLayout gen_layout(std::uint64_t seed, int k, int l, double area_side = 1.0);

PathGainMatrix path_gains(const NetworkLayout& layout, const ChannelModel& channel);

/// w = q squared entrywise.
BipartiteGraph build_graph(const PathGainMatrix& gains);

}  // namespace ccfnet
