#include "ccfnet/bisect.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "ccfnet/capacity.hpp"
#include "ccfnet/errors.hpp"
#include "ccfnet/partition.hpp"

namespace ccfnet {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

int severity(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return 0;
    case SolveStatus::kGapReached:
      return 1;
    case SolveStatus::kLimitHit:
      return 2;
  }
  return 2;
}

void profile(int k, int k_max, std::vector<int>& out) {
  if (k <= k_max) {
    out.push_back(k);
    return;
  }
  const BisectPlan p = bisect_targets(k, k_max);
  profile(p.k1, k_max, out);
  profile(p.k2, k_max, out);
}

}  // namespace

BisectPlan bisect_targets(int k_n, int k_max) {
  if (k_max < 1) throw InvalidArgument("bisect_targets: k_max must be at least 1");
  if (k_n <= k_max) {
    throw InvalidArgument("bisect_targets: " + std::to_string(k_n) +
                          " UEs already fit the cap " + std::to_string(k_max));
  }
  BisectPlan p;
  p.k_n = k_n;
  p.k1 = k_max * (ceil_div(k_n, k_max) / 2);
  p.k2 = k_n - p.k1;
  p.bs_floor_1 = ceil_div(p.k1, k_max);
  p.bs_floor_2 = ceil_div(p.k2, k_max);
  return p;
}

std::vector<int> bisect_size_profile(int k, int k_max) {
  if (k < 1 || k_max < 1) throw InvalidArgument("bisect_size_profile: counts must be positive");
  std::vector<int> out;
  profile(k, k_max, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::string to_json_line(const BisectIteration& it) {
  nlohmann::ordered_json j;
  j["iteration"] = it.iteration;
  j["selected"] = it.selected;
  j["ue_count"] = it.ue_count;
  j["bs_count"] = it.bs_count;
  j["k1"] = it.plan.k1;
  j["k2"] = it.plan.k2;
  j["bs_floor_1"] = it.plan.bs_floor_1;
  j["bs_floor_2"] = it.plan.bs_floor_2;
  j["objective"] = it.objective;
  j["nodes"] = it.nodes;
  j["status"] = to_string(it.status);
  return j.dump();
}

BisectResult bc2f_net(const BipartiteGraph& graph, int k_max, const SolverConfig& cfg) {
  cfg.check();
  const int k = graph.num_ue();
  const int l = graph.num_bs();
  const int target = optimal_m(k, k_max);
  if (l < target) {
    throw Infeasible("bc2f: " + std::to_string(l) + " BSs cannot host " +
                     std::to_string(target) + " subnetworks");
  }
  BisectResult result;
  SolveReport& report = result.report;
  report.status = SolveStatus::kOptimal;
  Decomposition current = Decomposition::whole(k, l);

  for (int iteration = 1; iteration < target; ++iteration) {
    // Labels are canonical, so the lowest label among the largest wins ties.
    const std::vector<int> ue_counts = current.ue_counts();
    const int selected = static_cast<int>(
        std::max_element(ue_counts.begin(), ue_counts.end()) - ue_counts.begin());
    const std::vector<int> ues = current.ues(selected);
    const std::vector<int> bss = current.bss(selected);
    const BisectPlan plan = bisect_targets(static_cast<int>(ues.size()), k_max);

    SolveReport split;
    try {
      split = solve_p5(graph.induced(ues, bss), plan.k1, plan.k2, plan.bs_floor_1,
                       plan.bs_floor_2, cfg);
    } catch (const Infeasible& e) {
      throw Infeasible("bc2f iteration " + std::to_string(iteration) + ": " + e.what());
    }
    if (!split.decomposition) {
      throw Infeasible("bc2f iteration " + std::to_string(iteration) +
                       ": split hit its limits without a feasible incumbent");
    }

    std::vector<int> assignment = current.assignment();
    const Decomposition& halves = *split.decomposition;
    const int fresh = current.m();
    for (std::size_t u = 0; u < ues.size(); ++u) {
      if (halves.of_ue(static_cast<int>(u)) == 1) assignment[static_cast<std::size_t>(ues[u])] = fresh;
    }
    for (std::size_t b = 0; b < bss.size(); ++b) {
      if (halves.of_bs(static_cast<int>(b)) == 1) {
        assignment[static_cast<std::size_t>(k + bss[b])] = fresh;
      }
    }
    current = Decomposition(k, l, std::move(assignment)).canonical();

    const std::vector<int> uc = current.ue_counts();
    const std::vector<int> bc = current.bs_counts();
    for (int m = 0; m < current.m(); ++m) {
      const auto i = static_cast<std::size_t>(m);
      if (bc[i] < std::max(1, ceil_div(uc[i], k_max))) {
        throw std::logic_error("bc2f: subnetwork left with too few BSs after iteration " +
                               std::to_string(iteration));
      }
    }

    BisectIteration it;
    it.iteration = iteration;
    it.selected = selected;
    it.ue_count = static_cast<int>(ues.size());
    it.bs_count = static_cast<int>(bss.size());
    it.plan = plan;
    it.objective = split.objective;
    it.nodes = split.nodes_explored;
    it.status = split.status;
    result.iterations.push_back(it);

    report.nodes_explored += split.nodes_explored;
    report.wall_time += split.wall_time;
    report.gap = std::max(report.gap, split.gap);
    if (severity(split.status) > severity(report.status)) report.status = split.status;
  }
  report.objective = sumcut(graph, current);
  report.decomposition = current;
  return result;
}

}  // namespace ccfnet
