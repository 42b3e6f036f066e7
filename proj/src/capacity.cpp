#include "ccfnet/capacity.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "ccfnet/errors.hpp"
#include "ccfnet/rng.hpp"

namespace ccfnet {

namespace {

void check_shapes(const PathGainMatrix& gains, const Decomposition& d) {
  if (gains.num_ue() != d.num_ue() || gains.num_bs() != d.num_bs()) {
    throw InvalidArgument("capacity: decomposition does not match the gain matrix");
  }
}

void check_has_bs(const Decomposition& d, int m) {
  if (m < 0 || m >= d.m()) throw InvalidArgument("capacity: subnetwork index out of range");
  for (int l = 0; l < d.num_bs(); ++l) {
    if (d.of_bs(l) == m) return;
  }
  throw InvalidDecomposition("subnetwork " + std::to_string(m) + " has no BS");
}

void check_all_have_bs(const Decomposition& d) {
  const auto bs = d.bs_counts();
  for (int m = 0; m < d.m(); ++m) {
    if (bs[static_cast<std::size_t>(m)] == 0) {
      throw InvalidDecomposition("subnetwork " + std::to_string(m) + " has no BS");
    }
  }
}

// Path gain received at BS l from the UEs inside / outside subnetwork m.
struct SplitGain {
  double inside = 0.0;
  double outside = 0.0;
};

SplitGain split_gain(const PathGainMatrix& gains, const Decomposition& d, int m, int l) {
  SplitGain s;
  for (int k = 0; k < d.num_ue(); ++k) {
    const double q2 = gains.q(k, l) * gains.q(k, l);
    (d.of_ue(k) == m ? s.inside : s.outside) += q2;
  }
  return s;
}

// log det of a Hermitian positive-definite matrix, with an LU fallback when the
// Cholesky factorization breaks down numerically.
double log_det_hpd(const Eigen::MatrixXcd& a) {
  Eigen::LLT<Eigen::MatrixXcd> llt(a);
  if (llt.info() == Eigen::Success) {
    const Eigen::VectorXcd diag = llt.matrixLLT().diagonal();
    double s = 0.0;
    for (Eigen::Index i = 0; i < diag.size(); ++i) s += std::log(diag(i).real());
    return 2.0 * s;
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  const Eigen::VectorXcd u = lu.matrixLU().diagonal();
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) s += std::log(std::abs(u(i)));
  return s;
}

McEstimate summarize(double sum, double sum_sq, int n) {
  McEstimate e;
  e.samples = n;
  e.mean = sum / n;
  if (n > 1) {
    const double var = std::max(0.0, (sum_sq - n * e.mean * e.mean) / (n - 1));
    e.std_err = std::sqrt(var / n);
  }
  return e;
}

}  // namespace

ChannelSample draw_channel(int num_ue, int num_bs, std::uint64_t seed, std::uint64_t index) {
  ChannelSample s;
  s.seed = seed;
  s.g.resize(num_ue, num_bs);
  Rng rng(derive_seed(seed, Stream::kFading, {index}));
  for (int k = 0; k < num_ue; ++k) {
    for (int l = 0; l < num_bs; ++l) s.g(k, l) = rng.complex_normal();
  }
  return s;
}

Eigen::VectorXd bs_constants(const PathGainMatrix& gains, const ChannelModel& channel) {
  return (channel.noise_n0 +
          channel.power_p * gains.q.array().square().colwise().sum())
      .transpose()
      .matrix();
}

double subnetwork_capacity_approx(const PathGainMatrix& gains, const ChannelModel& channel,
                                  const Decomposition& d, int m) {
  check_shapes(gains, d);
  check_has_bs(d, m);
  double c = 0.0;
  for (int l = 0; l < d.num_bs(); ++l) {
    if (d.of_bs(l) != m) continue;
    const SplitGain s = split_gain(gains, d, m, l);
    const double lambda = s.inside / (channel.noise_n0 + channel.power_p * s.outside);
    c += std::log2(1.0 + channel.power_p * lambda);
  }
  return c;
}

double sum_capacity_approx(const PathGainMatrix& gains, const ChannelModel& channel,
                           const Decomposition& d) {
  check_shapes(gains, d);
  check_all_have_bs(d);
  double c = 0.0;
  for (int m = 0; m < d.m(); ++m) c += subnetwork_capacity_approx(gains, channel, d, m);
  return c;
}

double sum_capacity_approx_split(const PathGainMatrix& gains, const ChannelModel& channel,
                                 const Decomposition& d) {
  check_shapes(gains, d);
  check_all_have_bs(d);
  const Eigen::VectorXd a = bs_constants(gains, channel);
  double c = 0.0;
  for (int l = 0; l < d.num_bs(); ++l) c += std::log2(a(l));
  for (int l = 0; l < d.num_bs(); ++l) {
    const SplitGain s = split_gain(gains, d, d.of_bs(l), l);
    c -= std::log2(channel.noise_n0 + channel.power_p * s.outside);
  }
  return c;
}

double sum_capacity_lower_bound(const PathGainMatrix& gains, const ChannelModel& channel,
                                const Decomposition& d) {
  check_shapes(gains, d);
  check_all_have_bs(d);
  const Eigen::VectorXd a = bs_constants(gains, channel);
  const double num_bs = d.num_bs();
  double interference = 0.0;
  for (int l = 0; l < d.num_bs(); ++l) {
    interference += split_gain(gains, d, d.of_bs(l), l).outside;
  }
  double c = 0.0;
  for (int l = 0; l < d.num_bs(); ++l) c += std::log2(a(l));
  return c - num_bs * std::log2(channel.noise_n0 + channel.power_p / num_bs * interference);
}

double subnetwork_capacity_sample(const PathGainMatrix& gains, const ChannelModel& channel,
                                  const Decomposition& d, int m, const ChannelSample& sample) {
  const std::vector<int> bs = d.bss(m);
  const auto nb = static_cast<Eigen::Index>(bs.size());
  Eigen::MatrixXcd inside(nb, 0);
  Eigen::MatrixXcd outside(nb, 0);
  std::vector<int> in_ue;
  std::vector<int> out_ue;
  for (int k = 0; k < d.num_ue(); ++k) (d.of_ue(k) == m ? in_ue : out_ue).push_back(k);
  if (in_ue.empty()) return 0.0;

  auto fill = [&](const std::vector<int>& ues, Eigen::MatrixXcd& h) {
    h.resize(nb, static_cast<Eigen::Index>(ues.size()));
    for (Eigen::Index c = 0; c < h.cols(); ++c) {
      const int k = ues[static_cast<std::size_t>(c)];
      for (Eigen::Index r = 0; r < nb; ++r) {
        const int l = bs[static_cast<std::size_t>(r)];
        h(r, c) = gains.q(k, l) * sample.g(k, l);
      }
    }
  };
  fill(in_ue, inside);
  fill(out_ue, outside);

  Eigen::MatrixXcd cov = Eigen::MatrixXcd::Identity(nb, nb) * channel.noise_n0;
  if (outside.cols() > 0) cov += channel.power_p * outside * outside.adjoint();
  const Eigen::MatrixXcd total = cov + channel.power_p * inside * inside.adjoint();
  // log det(I + P R^-1 S) = log det(R + P S) - log det(R).
  return (log_det_hpd(total) - log_det_hpd(cov)) / std::log(2.0);
}

McEstimate subnetwork_capacity_mc(const PathGainMatrix& gains, const ChannelModel& channel,
                                  const Decomposition& d, int m, int n_samples,
                                  std::uint64_t seed) {
  check_shapes(gains, d);
  check_has_bs(d, m);
  if (n_samples < 1) throw InvalidArgument("subnetwork_capacity_mc: need at least one sample");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const ChannelSample sample =
        draw_channel(d.num_ue(), d.num_bs(), seed, static_cast<std::uint64_t>(s));
    const double c = subnetwork_capacity_sample(gains, channel, d, m, sample);
    sum += c;
    sum_sq += c * c;
  }
  return summarize(sum, sum_sq, n_samples);
}

McEstimate sum_capacity_mc(const PathGainMatrix& gains, const ChannelModel& channel,
                           const Decomposition& d, int n_samples, std::uint64_t seed) {
  check_shapes(gains, d);
  check_all_have_bs(d);
  if (n_samples < 1) throw InvalidArgument("sum_capacity_mc: need at least one sample");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const ChannelSample sample =
        draw_channel(d.num_ue(), d.num_bs(), seed, static_cast<std::uint64_t>(s));
    double c = 0.0;
    for (int m = 0; m < d.m(); ++m) c += subnetwork_capacity_sample(gains, channel, d, m, sample);
    sum += c;
    sum_sq += c * c;
  }
  return summarize(sum, sum_sq, n_samples);
}

double cut_value(const BipartiteGraph& graph, const Decomposition& d, int m) {
  const Eigen::MatrixXd& w = graph.weights();
  double c = 0.0;
  for (int k = 0; k < d.num_ue(); ++k) {
    for (int l = 0; l < d.num_bs(); ++l) {
      const bool ue_in = d.of_ue(k) == m;
      const bool bs_in = d.of_bs(l) == m;
      if (ue_in != bs_in) c += w(k, l);
    }
  }
  return c;
}

double sumcut(const BipartiteGraph& graph, const Decomposition& d) {
  double c = 0.0;
  for (int m = 0; m < d.m(); ++m) c += cut_value(graph, d, m);
  return c;
}

double interference_sum(const BipartiteGraph& graph, const Decomposition& d) {
  const Eigen::MatrixXd& w = graph.weights();
  double s = 0.0;
  for (int l = 0; l < d.num_bs(); ++l) {
    for (int k = 0; k < d.num_ue(); ++k) {
      if (d.of_ue(k) != d.of_bs(l)) s += w(k, l);
    }
  }
  return s;
}

double quadratic_objective(const BipartiteGraph& graph, const Eigen::MatrixXd& x) {
  if (x.rows() != graph.num_vertices() || x.cols() < 1) {
    throw InvalidArgument("quadratic_objective: x must have K + L rows");
  }
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (std::abs(x.row(i).sum() - 1.0) > 1e-9 || x.row(i).minCoeff() < -1e-12 ||
        x.row(i).maxCoeff() > 1.0 + 1e-12) {
      throw InvalidArgument("quadratic_objective: row " + std::to_string(i) +
                            " is not a point of the simplex");
    }
  }
  // D - A with the degrees summed in extended precision: the stored diagonal
  // loses the small cut values that remain after cancellation.
  const Eigen::MatrixXd& a = graph.adjacency();
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    long double deg = 0.0L;
    for (Eigen::Index j = 0; j < a.cols(); ++j) deg += a(i, j);
    for (Eigen::Index m = 0; m < x.cols(); ++m) {
      long double off = 0.0L;
      for (Eigen::Index j = 0; j < a.cols(); ++j) off += static_cast<long double>(a(i, j)) * x(j, m);
      total += static_cast<long double>(x(i, m)) * (deg * x(i, m) - off);
    }
  }
  return static_cast<double>(total);
}

CapacityReport evaluate_capacity(const PathGainMatrix& gains, const ChannelModel& channel,
                                 const Decomposition& d, int mc_samples, std::uint64_t seed) {
  CapacityReport r;
  r.per_subnetwork_approx.reserve(static_cast<std::size_t>(d.m()));
  for (int m = 0; m < d.m(); ++m) {
    r.per_subnetwork_approx.push_back(subnetwork_capacity_approx(gains, channel, d, m));
  }
  r.sum_approx = std::accumulate(r.per_subnetwork_approx.begin(),
                                 r.per_subnetwork_approx.end(), 0.0);
  r.sum_lb = sum_capacity_lower_bound(gains, channel, d);
  if (mc_samples > 0) {
    const McEstimate e = sum_capacity_mc(gains, channel, d, mc_samples, seed);
    r.sum_mc = e.mean;
    r.mc_std_err = e.std_err;
    r.mc_samples = e.samples;
  }
  return r;
}

}  // namespace ccfnet
