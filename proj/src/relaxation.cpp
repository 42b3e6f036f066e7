#include "ccfnet/relaxation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "ccfnet/errors.hpp"
#include "flow.hpp"

namespace ccfnet {

ColumnBounds ColumnBounds::capped(int columns, int k_max) {
  ColumnBounds b;
  b.ue_lo.assign(static_cast<std::size_t>(columns), 0);
  b.ue_hi.assign(static_cast<std::size_t>(columns), k_max);
  b.bs_lo.assign(static_cast<std::size_t>(columns), 1);
  return b;
}

ColumnBounds ColumnBounds::bisection(int k1, int k2, int floor1, int floor2) {
  return ColumnBounds{{k1, k2}, {k1, k2}, {floor1, floor2}};
}

AllowedMask full_mask(int vertices, int columns) {
  if (columns < 1 || columns > 64) throw InvalidArgument("mask: 1..64 columns supported");
  const std::uint64_t all = columns == 64 ? ~0ULL : ((1ULL << columns) - 1);
  return AllowedMask(static_cast<std::size_t>(vertices), all);
}

namespace {

// Assign one group of rows (UEs or BSs) to columns with per-column count
// bounds, via max-flow with lower bounds. Writes into `out`.
bool assign_group(const AllowedMask& mask, int first, int count, const std::vector<int>& lo,
                  const std::vector<int>& hi, std::vector<int>& out) {
  const int cols = static_cast<int>(lo.size());
  // Nodes: source, sink, rows, columns, super source, super sink.
  const int s = 0, t = 1, row0 = 2, col0 = row0 + count, ss = col0 + cols, tt = ss + 1;
  detail::MaxFlow flow(tt + 1);
  std::vector<int> excess(static_cast<std::size_t>(tt + 1), 0);
  auto add = [&](int u, int v, int low, int cap) {
    excess[static_cast<std::size_t>(v)] += low;
    excess[static_cast<std::size_t>(u)] -= low;
    return flow.add_edge(u, v, cap - low);
  };
  std::vector<std::vector<std::pair<int, int>>> row_edges(static_cast<std::size_t>(count));
  for (int r = 0; r < count; ++r) {
    add(s, row0 + r, 1, 1);
    const std::uint64_t bits = mask[static_cast<std::size_t>(first + r)];
    for (int m = 0; m < cols; ++m) {
      if (bits >> m & 1ULL) {
        row_edges[static_cast<std::size_t>(r)].push_back({m, add(row0 + r, col0 + m, 0, 1)});
      }
    }
  }
  for (int m = 0; m < cols; ++m) {
    const int low = std::max(0, lo[static_cast<std::size_t>(m)]);
    const int cap = std::min(count, hi[static_cast<std::size_t>(m)]);
    if (low > cap) return false;
    add(col0 + m, t, low, cap);
  }
  add(t, s, 0, count);
  int demand = 0;
  for (int v = 0; v < ss; ++v) {
    const int e = excess[static_cast<std::size_t>(v)];
    if (e > 0) {
      flow.add_edge(ss, v, e);
      demand += e;
    } else if (e < 0) {
      flow.add_edge(v, tt, -e);
    }
  }
  if (flow.run(ss, tt) != demand) return false;
  for (int r = 0; r < count; ++r) {
    for (const auto& [m, id] : row_edges[static_cast<std::size_t>(r)]) {
      if (flow.flow_on(id) > 0) out[static_cast<std::size_t>(first + r)] = m;
    }
  }
  return true;
}

// Euclidean projection of v onto the probability simplex (sort-based).
void project_simplex(std::vector<double>& v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double cand = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - cand > 0.0) theta = cand;
  }
  for (double& x : v) x = std::max(0.0, x - theta);
}

// One linear coupling constraint: sign * (sum of column `column` over the
// group rows) - rhs <= 0.
struct Coupling {
  int column;
  bool ue_group;
  double sign;
  double rhs;
  double rho = 0.0;
  bool active = false;
};

class Relaxer {
 public:
  Relaxer(const BipartiteGraph& graph, const ColumnBounds& bounds, const AllowedMask& mask)
      : graph_(graph), bounds_(bounds), mask_(mask), n_(graph.num_vertices()),
        k_(graph.num_ue()), cols_(bounds.columns()) {
    for (int m = 0; m < cols_; ++m) {
      const auto i = static_cast<std::size_t>(m);
      couplings_.push_back({m, true, 1.0, static_cast<double>(bounds.ue_hi[i])});
      couplings_.back().active = bounds.ue_hi[i] < k_;
      couplings_.push_back({m, true, -1.0, -static_cast<double>(bounds.ue_lo[i])});
      couplings_.back().active = bounds.ue_lo[i] > 0;
      couplings_.push_back({m, false, -1.0, -static_cast<double>(bounds.bs_lo[i])});
      couplings_.back().active = bounds.bs_lo[i] > 0;
    }
    const Eigen::VectorXd& deg = graph.degree();
    const double max_deg = n_ > 0 ? deg.maxCoeff() : 0.0;
    dinv_.resize(n_);
    for (int i = 0; i < n_; ++i) dinv_(i) = 1.0 / std::max(deg(i), 1e-9 * max_deg);
    for (int i = 0; i < n_; ++i) {
      (is_fixed(mask_[static_cast<std::size_t>(i)]) ? fixed_ : free_).push_back(i);
    }
    // Penalty weights normalised so every coupling block has curvature at
    // most 1 in the degree-scaled metric.
    for (auto& c : couplings_) {
      double g = 0.0;
      for (int i : free_) {
        if (graph_.is_ue(i) == c.ue_group) g += dinv_(i);
      }
      if (g <= 0.0) c.active = false;
      c.rho = c.active ? 1.0 / g : 0.0;
    }
  }

  Eigen::MatrixXd clamp_to_mask(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, cols_);
    std::vector<double> row;
    for (int i = 0; i < n_; ++i) {
      const std::uint64_t bits = mask_[static_cast<std::size_t>(i)];
      double s = 0.0;
      for (int m = 0; m < cols_; ++m) {
        if (bits >> m & 1ULL) s += std::max(0.0, x(i, m));
      }
      const int allowed = std::popcount(bits);
      for (int m = 0; m < cols_; ++m) {
        if (!(bits >> m & 1ULL)) continue;
        out(i, m) = s > 0.0 ? std::max(0.0, x(i, m)) / s : 1.0 / allowed;
      }
    }
    return out;
  }

  Eigen::MatrixXd uniform() const {
    return clamp_to_mask(Eigen::MatrixXd::Zero(n_, cols_));
  }

  double group_sum(const Eigen::MatrixXd& x, const Coupling& c) const {
    return c.ue_group ? x.col(c.column).head(k_).sum() : x.col(c.column).tail(n_ - k_).sum();
  }

  double violation(const Eigen::MatrixXd& x, const Coupling& c) const {
    return c.sign * group_sum(x, c) - c.rhs;
  }

  // Gradient of f + sum_j mu_j g_j; lx = Lap * x is passed in.
  Eigen::MatrixXd lagrangian_grad(const Eigen::MatrixXd& lx, const Eigen::VectorXd& mu) const {
    Eigen::MatrixXd g = 2.0 * lx;
    for (std::size_t j = 0; j < couplings_.size(); ++j) {
      const Coupling& c = couplings_[j];
      if (mu(static_cast<Eigen::Index>(j)) == 0.0) continue;
      const double v = mu(static_cast<Eigen::Index>(j)) * c.sign;
      if (c.ue_group) {
        g.col(c.column).head(k_).array() += v;
      } else {
        g.col(c.column).tail(n_ - k_).array() += v;
      }
    }
    return g;
  }

  Eigen::VectorXd shifted_multipliers(const Eigen::MatrixXd& x, const Eigen::VectorXd& lambda,
                                      double rho_scale) const {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(lambda.size());
    for (std::size_t j = 0; j < couplings_.size(); ++j) {
      const Coupling& c = couplings_[j];
      if (!c.active) continue;
      const auto jj = static_cast<Eigen::Index>(j);
      mu(jj) = std::max(0.0, lambda(jj) + rho_scale * c.rho * violation(x, c));
    }
    return mu;
  }

  // Valid for any x in the product of simplices and any mu >= 0.
  double certified_bound(const Eigen::MatrixXd& x, const Eigen::VectorXd& mu) const {
    const Eigen::MatrixXd lx = graph_.laplacian() * x;
    double value = (x.array() * lx.array()).sum();
    for (std::size_t j = 0; j < couplings_.size(); ++j) {
      const double m = mu(static_cast<Eigen::Index>(j));
      if (m != 0.0) value += m * violation(x, couplings_[j]);
    }
    const Eigen::MatrixXd g = lagrangian_grad(lx, mu);
    for (int i : free_) {
      const std::uint64_t bits = mask_[static_cast<std::size_t>(i)];
      double best = std::numeric_limits<double>::infinity();
      for (int m = 0; m < cols_; ++m) {
        if (bits >> m & 1ULL) best = std::min(best, g(i, m));
      }
      value += best - g.row(i).dot(x.row(i));
    }
    return value;
  }

  void project_rows(Eigen::MatrixXd& x) const {
    for (int i : fixed_) {
      x.row(i).setZero();
      x(i, std::countr_zero(mask_[static_cast<std::size_t>(i)])) = 1.0;
    }
    std::vector<double> v;
    std::vector<int> idx;
    for (int i : free_) {
      const std::uint64_t bits = mask_[static_cast<std::size_t>(i)];
      v.clear();
      idx.clear();
      for (int m = 0; m < cols_; ++m) {
        if (bits >> m & 1ULL) {
          v.push_back(x(i, m));
          idx.push_back(m);
        } else {
          x(i, m) = 0.0;
        }
      }
      project_simplex(v);
      for (std::size_t a = 0; a < idx.size(); ++a) x(i, idx[a]) = v[a];
    }
  }

  // Smallest convex combination with the integral point `anchor` meeting
  // every coupling constraint.
  Eigen::MatrixXd make_feasible(const Eigen::MatrixXd& x, const Eigen::MatrixXd& anchor) const {
    double theta = 0.0;
    for (const Coupling& c : couplings_) {
      const double gx = violation(x, c);
      if (gx <= 0.0) continue;
      const double ga = violation(anchor, c);
      theta = std::max(theta, gx / (gx - ga));
    }
    theta = std::min(1.0, theta);
    if (theta == 0.0) return x;
    return (1.0 - theta) * x + theta * anchor;
  }

  Relaxation solve(const RelaxOptions& opts, const std::vector<int>& assignment) {
    Relaxation out;
    out.feasible = true;
    Eigen::MatrixXd anchor = Eigen::MatrixXd::Zero(n_, cols_);
    for (int i = 0; i < n_; ++i) anchor(i, assignment[static_cast<std::size_t>(i)]) = 1.0;

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(couplings_.size()));
    if (opts.warm_multipliers && opts.warm_multipliers->size() == lambda.size()) {
      lambda = opts.warm_multipliers->cwiseMax(0.0);
    }
    for (std::size_t j = 0; j < couplings_.size(); ++j) {
      if (!couplings_[j].active) lambda(static_cast<Eigen::Index>(j)) = 0.0;
    }

    Eigen::MatrixXd x = (opts.warm_x && opts.warm_x->rows() == n_ && opts.warm_x->cols() == cols_)
                            ? clamp_to_mask(*opts.warm_x)
                            : uniform();

    if (free_.empty()) {
      out.x = x;
      out.value = (x.transpose() * graph_.laplacian() * x).trace();
      out.lb = out.value;
      out.multipliers = lambda;
      return out;
    }

    double best_lb = -std::numeric_limits<double>::infinity();
    Eigen::MatrixXd best_x = make_feasible(x, anchor);
    double best_value = (best_x.transpose() * graph_.laplacian() * best_x).trace();
    double rho_scale = 1.0;
    double prev_violation = std::numeric_limits<double>::infinity();
    int iterations = 0;
    const int inner = 40;

    while (true) {
      const double lip = 4.0 + 2.0 * rho_scale;
      const double step = 1.0 / lip;
      Eigen::MatrixXd y = x;
      Eigen::MatrixXd x_prev = x;
      double t = 1.0;
      for (int it = 0; it < inner && iterations < opts.max_iterations; ++it, ++iterations) {
        const Eigen::MatrixXd ly = graph_.laplacian() * y;
        const Eigen::VectorXd mu = shifted_multipliers(y, lambda, rho_scale);
        const Eigen::MatrixXd g = lagrangian_grad(ly, mu);
        Eigen::MatrixXd xn = y - step * (dinv_.asDiagonal() * g);
        project_rows(xn);
        // Gradient-based adaptive restart.
        if ((g.array() * (xn - x_prev).array()).sum() > 0.0) {
          t = 1.0;
          y = xn;
        } else {
          const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
          y = xn + ((t - 1.0) / tn) * (xn - x_prev);
          t = tn;
          project_rows(y);
        }
        x_prev = xn;
      }
      x = x_prev;

      // Multiplier update, then certify with the updated multipliers.
      double max_violation = 0.0;
      for (std::size_t j = 0; j < couplings_.size(); ++j) {
        if (couplings_[j].active) {
          max_violation = std::max(max_violation, violation(x, couplings_[j]));
        }
      }
      lambda = shifted_multipliers(x, lambda, rho_scale);
      best_lb = std::max(best_lb, certified_bound(x, lambda));
      // Multipliers at zero give a second certificate that is sometimes tighter
      // early on.
      best_lb = std::max(best_lb, certified_bound(x, Eigen::VectorXd::Zero(lambda.size())));

      const Eigen::MatrixXd feasible = make_feasible(x, anchor);
      const double value = (feasible.transpose() * graph_.laplacian() * feasible).trace();
      if (value < best_value || max_violation <= 1e-9) {
        best_value = value;
        best_x = feasible;
      }
      const double scale = std::max(std::abs(best_value), 1e-12 * graph_.degree().sum());
      if (best_lb >= opts.cutoff) break;
      if (best_value - best_lb <= opts.tol * scale) break;
      if (iterations >= opts.max_iterations) break;
      if (max_violation > 0.25 * prev_violation && rho_scale < 1e4) rho_scale *= 4.0;
      prev_violation = max_violation;
    }

    out.x = best_x;
    out.value = best_value;
    out.lb = std::min(best_lb, best_value);
    out.multipliers = lambda;
    out.iterations = iterations;
    return out;
  }

 private:
  const BipartiteGraph& graph_;
  const ColumnBounds& bounds_;
  const AllowedMask& mask_;
  int n_;
  int k_;
  int cols_;
  std::vector<Coupling> couplings_;
  Eigen::VectorXd dinv_;
  std::vector<int> free_;
  std::vector<int> fixed_;
};

}  // namespace

std::optional<std::vector<int>> feasible_assignment(const BipartiteGraph& graph,
                                                    const ColumnBounds& bounds,
                                                    const AllowedMask& mask) {
  const int n = graph.num_vertices();
  if (static_cast<int>(mask.size()) != n) throw InvalidArgument("mask size must be K + L");
  for (std::uint64_t bits : mask) {
    if (bits == 0) return std::nullopt;
  }
  const int cols = bounds.columns();
  std::vector<int> out(static_cast<std::size_t>(n), -1);
  const std::vector<int> no_cap(static_cast<std::size_t>(cols), graph.num_bs());
  if (!assign_group(mask, 0, graph.num_ue(), bounds.ue_lo, bounds.ue_hi, out)) {
    return std::nullopt;
  }
  if (!assign_group(mask, graph.num_ue(), graph.num_bs(), bounds.bs_lo, no_cap, out)) {
    return std::nullopt;
  }
  return out;
}

Relaxation relax_lower_bound(const BipartiteGraph& graph, const ColumnBounds& bounds,
                             const AllowedMask& mask, const RelaxOptions& opts) {
  const auto assignment = feasible_assignment(graph, bounds, mask);
  if (!assignment) return Relaxation{};
  Relaxer relaxer(graph, bounds, mask);
  return relaxer.solve(opts, *assignment);
}

double fixed_edge_bound(const BipartiteGraph& graph, const AllowedMask& mask) {
  const int n = graph.num_vertices();
  const int k = graph.num_ue();
  const Eigen::MatrixXd& w = graph.weights();
  auto fixed_column = [&](int i) -> int {
    const std::uint64_t bits = mask[static_cast<std::size_t>(i)];
    return is_fixed(bits) ? std::countr_zero(bits) : -1;
  };
  double bound = 0.0;
  // Fixed UE to fixed BS edges across columns; each crossing edge adds its
  // weight to the cut of both sides.
  for (int u = 0; u < k; ++u) {
    const int cu = fixed_column(u);
    if (cu < 0) continue;
    for (int b = 0; b < graph.num_bs(); ++b) {
      const int cb = fixed_column(k + b);
      if (cb >= 0 && cb != cu) bound += 2.0 * w(u, b);
    }
  }
  std::vector<double> per_column;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t bits = mask[static_cast<std::size_t>(i)];
    if (is_fixed(bits)) continue;
    per_column.assign(64, 0.0);
    double total = 0.0;
    const bool ue = i < k;
    const int others = ue ? graph.num_bs() : k;
    for (int j = 0; j < others; ++j) {
      const int v = ue ? k + j : j;
      const int cv = fixed_column(v);
      if (cv < 0) continue;
      const double wij = ue ? w(i, j) : w(j, i - k);
      per_column[static_cast<std::size_t>(cv)] += wij;
      total += wij;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t b = bits; b != 0; b &= b - 1) {
      const int m = std::countr_zero(b);
      best = std::min(best, 2.0 * (total - per_column[static_cast<std::size_t>(m)]));
    }
    bound += best;
  }
  return bound;
}

}  // namespace ccfnet
