#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ccfnet/netmodel.hpp"
#include "ccfnet/partition.hpp"

namespace ccfnet {

/// One small-scale fading realization: g(k, l) ~ CN(0, 1), rows are UEs.
struct ChannelSample {
  std::uint64_t seed = 0;
  Eigen::MatrixXcd g;
};

/// Draw `index` of the fading sequence identified by `seed`. Each index has
/// its own derived stream, so samples can be generated in any order.
ChannelSample draw_channel(int num_ue, int num_bs, std::uint64_t seed, std::uint64_t index);

struct McEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  int samples = 0;
};

struct CapacityReport {
  std::optional<double> sum_mc;
  std::optional<double> mc_std_err;
  int mc_samples = 0;
  double sum_approx = 0.0;
  double sum_lb = 0.0;
  std::vector<double> per_subnetwork_approx;
};

/// a_l = N0 + P * sum_k q_lk^2 for every BS.
Eigen::VectorXd bs_constants(const PathGainMatrix& gains, const ChannelModel& channel);

/// Diagonal (large-system) approximation of one subnetwork's ergodic capacity:
/// sum over its BSs of log2(1 + P * lambda_l) with lambda_l the ratio of
/// in-subnetwork path gain to noise plus out-of-subnetwork interference.
double subnetwork_capacity_approx(const PathGainMatrix& gains, const ChannelModel& channel,
                                  const Decomposition& d, int m);

double sum_capacity_approx(const PathGainMatrix& gains, const ChannelModel& channel,
                           const Decomposition& d);

/// Same quantity written as sum_l log2 a_l minus the per-BS log interference
/// terms. Kept as an independent cross-check of the solver objective algebra.
double sum_capacity_approx_split(const PathGainMatrix& gains, const ChannelModel& channel,
                                 const Decomposition& d);

/// Jensen lower bound: the interference terms are averaged over all L BSs
/// inside a single logarithm.
double sum_capacity_lower_bound(const PathGainMatrix& gains, const ChannelModel& channel,
                                const Decomposition& d);

/// Monte-Carlo estimate of E[log2 det(I + P R^-1 H H^H)] for subnetwork m,
/// with R the noise-plus-interference covariance at its BSs.
McEstimate subnetwork_capacity_mc(const PathGainMatrix& gains, const ChannelModel& channel,
                                  const Decomposition& d, int m, int n_samples,
                                  std::uint64_t seed);

/// Sum over subnetworks, sharing each fading draw across them. The standard
/// error is that of the per-draw sum.
McEstimate sum_capacity_mc(const PathGainMatrix& gains, const ChannelModel& channel,
                           const Decomposition& d, int n_samples, std::uint64_t seed);

/// Capacity of one subnetwork for one fading draw.
double subnetwork_capacity_sample(const PathGainMatrix& gains, const ChannelModel& channel,
                                  const Decomposition& d, int m, const ChannelSample& sample);

/// Weight of edges leaving subnetwork m: its BSs to outside UEs plus its UEs
/// to outside BSs.
double cut_value(const BipartiteGraph& graph, const Decomposition& d, int m);
double sumcut(const BipartiteGraph& graph, const Decomposition& d);

/// sum_m sum_{l in B_m} sum_{k not in U_m} w_kl; equals sumcut / 2.
double interference_sum(const BipartiteGraph& graph, const Decomposition& d);

/// sum_m x_m^T Lap x_m for a row-stochastic x (rows sum to 1, entries in [0,1]).
double quadratic_objective(const BipartiteGraph& graph, const Eigen::MatrixXd& x);

/// mc_samples == 0 skips the Monte-Carlo estimate.
CapacityReport evaluate_capacity(const PathGainMatrix& gains, const ChannelModel& channel,
                                 const Decomposition& d, int mc_samples, std::uint64_t seed);

}  // namespace ccfnet
