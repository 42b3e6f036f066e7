#include "ccfnet/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "ccfnet/errors.hpp"
#include "ccfnet/rng.hpp"

namespace ccfnet {

ChannelModel ChannelModel::from_snr_db(double p_over_n0_db, double alpha, double d_min) {
  ChannelModel c;
  c.alpha = alpha;
  c.noise_n0 = 1.0;
  c.power_p = std::pow(10.0, p_over_n0_db / 10.0);
  c.d_min = d_min;
  c.check();
  return c;
}

void ChannelModel::check() const {
  if (!(alpha > 0.0) || !(power_p > 0.0) || !(noise_n0 > 0.0) || !(d_min > 0.0)) {
    throw InvalidArgument("channel model: alpha, P, N0 and d_min must be positive");
  }
}

BipartiteGraph::BipartiteGraph(Eigen::MatrixXd weights) : w_(std::move(weights)) {
  const Eigen::Index k = w_.rows();
  const Eigen::Index n = k + w_.cols();
  adjacency_ = Eigen::MatrixXd::Zero(n, n);
  adjacency_.topRightCorner(k, w_.cols()) = w_;
  adjacency_.bottomLeftCorner(w_.cols(), k) = w_.transpose();
  degree_ = adjacency_.rowwise().sum();
  laplacian_ = -adjacency_;
  laplacian_.diagonal() += degree_;
}

BipartiteGraph BipartiteGraph::induced(std::span<const int> ues,
                                       std::span<const int> bss) const {
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(ues.size()),
                      static_cast<Eigen::Index>(bss.size()));
  for (std::size_t a = 0; a < ues.size(); ++a) {
    for (std::size_t b = 0; b < bss.size(); ++b) {
      sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = w_(ues[a], bss[b]);
    }
  }
  return BipartiteGraph(std::move(sub));
}

NetworkLayout gen_layout(std::uint64_t seed, int k, int l, double area_side) {
  if (k < 1 || l < 1) throw InvalidArgument("gen_layout: need at least one UE and one BS");
  if (!(area_side > 0.0)) throw InvalidArgument("gen_layout: area side must be positive");
  NetworkLayout layout;
  layout.seed = seed;
  layout.area_side = area_side;
  Rng rng(derive_seed(seed, Stream::kLayout));
  auto draw = [&] {
    const double x = rng.uniform() * area_side;
    const double y = rng.uniform() * area_side;
    return Point{x, y};
  };
  layout.ue.reserve(static_cast<std::size_t>(k));
  layout.bs.reserve(static_cast<std::size_t>(l));
  for (int i = 0; i < k; ++i) layout.ue.push_back(draw());
  for (int i = 0; i < l; ++i) layout.bs.push_back(draw());
  return layout;
}

PathGainMatrix path_gains(const NetworkLayout& layout, const ChannelModel& channel) {
  channel.check();
  if (layout.ue.empty() || layout.bs.empty()) {
    throw InvalidArgument("path_gains: empty layout");
  }
  PathGainMatrix gains;
  gains.q.resize(layout.num_ue(), layout.num_bs());
  for (int k = 0; k < layout.num_ue(); ++k) {
    for (int l = 0; l < layout.num_bs(); ++l) {
      const double d = std::hypot(layout.ue[k].x - layout.bs[l].x,
                                  layout.ue[k].y - layout.bs[l].y);
      gains.q(k, l) = std::pow(std::max(d, channel.d_min), -channel.alpha / 2.0);
    }
  }
  return gains;
}

BipartiteGraph build_graph(const PathGainMatrix& gains) {
  return BipartiteGraph(gains.q.array().square().matrix());
}

}  // namespace ccfnet
