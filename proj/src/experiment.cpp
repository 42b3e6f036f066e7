#include "ccfnet/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <thread>
#include <tuple>

#include "ccfnet/errors.hpp"
#include "ccfnet/rng.hpp"

namespace ccfnet {

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

ojson number_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson number_or_null(const std::optional<double>& v) {
  return v ? number_or_null(*v) : ojson(nullptr);
}

Stat summarize(const std::vector<double>& v) {
  Stat s;
  s.n = static_cast<int>(v.size());
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std_err = std::sqrt(ss / (s.n - 1) / s.n);
  }
  return s;
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kBnb:
      return "bnb";
    case Algorithm::kBc2f:
      return "bc2f";
    case Algorithm::kBrute:
      return "brute";
    case Algorithm::kKmeansUe:
      return "kmeans-ue";
    case Algorithm::kKmeansBs:
      return "kmeans-bs";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::kBnb, Algorithm::kBc2f, Algorithm::kBrute, Algorithm::kKmeansUe,
                      Algorithm::kKmeansBs}) {
    if (to_string(a) == name) return a;
  }
  throw InvalidArgument("unknown algorithm '" + name + "'");
}

ChannelModel ExperimentConfig::channel() const {
  return ChannelModel::from_snr_db(p_over_n0_db, alpha, d_min);
}

void ExperimentConfig::check() const {
  if (k_list.empty() || l_list.empty() || k_max_list.empty()) {
    throw InvalidArgument("config: sweep axes must be non-empty");
  }
  for (int v : k_list) {
    if (v < 1) throw InvalidArgument("config: K values must be positive");
  }
  for (int v : l_list) {
    if (v < 1) throw InvalidArgument("config: L values must be positive");
  }
  for (int v : k_max_list) {
    if (v < 1) throw InvalidArgument("config: Kmax values must be positive");
  }
  if (realizations < 1) throw InvalidArgument("config: realizations must be at least 1");
  if (algorithms.empty()) throw InvalidArgument("config: no algorithms selected");
  if (mc_samples < 0) throw InvalidArgument("config: mc_samples must be non-negative");
  if (!(area_side > 0.0)) throw InvalidArgument("config: area_side must be positive");
  if (brute_budget == 0) throw InvalidArgument("config: brute_budget must be positive");
  channel().check();
  solver.check();
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{
      "k_list",     "l_list",      "k_max_list",  "realizations",    "alpha",
      "p_over_n0_db", "area_side", "d_min",       "algorithms",      "mc_samples",
      "base_seed",  "output_path", "solver",      "brute_objective", "brute_budget",
      "timing"};
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw InvalidArgument("config: unknown key '" + key + "'");
  }
  ExperimentConfig c;
  read(j, "k_list", c.k_list);
  read(j, "l_list", c.l_list);
  read(j, "k_max_list", c.k_max_list);
  read(j, "realizations", c.realizations);
  read(j, "alpha", c.alpha);
  read(j, "p_over_n0_db", c.p_over_n0_db);
  read(j, "area_side", c.area_side);
  read(j, "d_min", c.d_min);
  read(j, "mc_samples", c.mc_samples);
  read(j, "base_seed", c.base_seed);
  read(j, "output_path", c.output_path);
  read(j, "brute_budget", c.brute_budget);
  read(j, "timing", c.timing);
  if (j.contains("algorithms")) {
    c.algorithms.clear();
    for (const auto& a : j.at("algorithms")) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
  }
  if (j.contains("brute_objective")) {
    const std::string o = j.at("brute_objective").get<std::string>();
    if (o == "capacity") {
      c.brute_objective = BruteObjective::kApproxCapacity;
    } else if (o == "sumcut") {
      c.brute_objective = BruteObjective::kSumcut;
    } else {
      throw InvalidArgument("config: brute_objective must be 'capacity' or 'sumcut'");
    }
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    read(s, "epsilon", c.solver.epsilon);
    read(s, "relax_tol", c.solver.relax_tol);
    read(s, "relax_max_iterations", c.solver.relax_max_iterations);
    read(s, "node_limit", c.solver.node_limit);
    read(s, "time_limit", c.solver.time_limit);
  }
  c.check();
  return c;
}

ojson to_json(const ExperimentConfig& c) {
  ojson j;
  j["k_list"] = c.k_list;
  j["l_list"] = c.l_list;
  j["k_max_list"] = c.k_max_list;
  j["realizations"] = c.realizations;
  j["alpha"] = c.alpha;
  j["p_over_n0_db"] = c.p_over_n0_db;
  j["area_side"] = c.area_side;
  j["d_min"] = c.d_min;
  ojson algos = ojson::array();
  for (Algorithm a : c.algorithms) algos.push_back(to_string(a));
  j["algorithms"] = algos;
  j["mc_samples"] = c.mc_samples;
  j["base_seed"] = c.base_seed;
  j["output_path"] = c.output_path;
  j["solver"] = {{"epsilon", c.solver.epsilon},
                 {"relax_tol", c.solver.relax_tol},
                 {"relax_max_iterations", c.solver.relax_max_iterations},
                 {"node_limit", c.solver.node_limit},
                 {"time_limit", c.solver.time_limit}};
  j["brute_objective"] = c.brute_objective == BruteObjective::kSumcut ? "sumcut" : "capacity";
  j["brute_budget"] = c.brute_budget;
  j["timing"] = c.timing;
  return j;
}

std::uint64_t layout_seed(std::uint64_t base_seed, int k, int l, int realization) {
  return derive_seed(base_seed, Stream::kLayout,
                     {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(l),
                      static_cast<std::uint64_t>(realization)});
}

std::vector<Instance> expand_instances(const ExperimentConfig& cfg) {
  std::vector<Instance> out;
  for (int k : cfg.k_list) {
    for (int l : cfg.l_list) {
      for (int k_max : cfg.k_max_list) {
        for (int r = 0; r < cfg.realizations; ++r) {
          Instance in;
          in.index = static_cast<int>(out.size());
          in.realization = r;
          in.k = k;
          in.l = l;
          in.k_max = k_max;
          in.seed = layout_seed(cfg.base_seed, k, l, r);
          out.push_back(in);
        }
      }
    }
  }
  return out;
}

bool is_error_status(const std::string& status) { return status == "error"; }

DecomposeOutcome run_decompose(const ExperimentConfig& cfg, Algorithm algo,
                               const NetworkLayout& layout, int k_max, int instance_index) {
  DecomposeOutcome out;
  ResultRow& row = out.row;
  row.seed = layout.seed;
  row.instance = instance_index;
  row.algo = algo;
  row.k = layout.num_ue();
  row.l = layout.num_bs();
  row.k_max = k_max;

  const ChannelModel channel = cfg.channel();
  const PathGainMatrix gains = path_gains(layout, channel);
  const BipartiteGraph graph = build_graph(gains);
  SolverConfig solver = cfg.solver;
  solver.seed = layout.seed;

  const auto start = std::chrono::steady_clock::now();
  try {
    switch (algo) {
      case Algorithm::kBnb: {
        SolveReport rep = solve_p4(graph, k_max, solver);
        row.status = to_string(rep.status);
        row.nodes = rep.nodes_explored;
        out.decomposition = rep.decomposition;
        out.report = std::move(rep);
        break;
      }
      case Algorithm::kBc2f: {
        BisectResult res = bc2f_net(graph, k_max, solver);
        row.status = to_string(res.report.status);
        row.nodes = res.report.nodes_explored;
        out.decomposition = res.report.decomposition;
        out.report = std::move(res.report);
        out.iterations = std::move(res.iterations);
        break;
      }
      case Algorithm::kBrute: {
        BruteResult res = brute_force(graph, k_max, optimal_m(row.k, k_max), cfg.brute_objective,
                                      channel, EnumerationBudget{cfg.brute_budget});
        row.status = "optimal";
        row.nodes = static_cast<long>(res.enumerated);
        out.decomposition = res.decomposition;
        break;
      }
      case Algorithm::kKmeansUe:
        out.decomposition = kmeans_ue_centric(layout, k_max, layout.seed);
        row.status = "heuristic";
        break;
      case Algorithm::kKmeansBs:
        out.decomposition = kmeans_bs_centric(layout, gains, k_max, layout.seed);
        row.status = "heuristic";
        break;
    }
  } catch (const Infeasible& e) {
    row.status = "infeasible";
    row.message = e.what();
  } catch (const std::exception& e) {
    row.status = "error";
    row.message = e.what();
  }
  const double elapsed =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  row.runtime_ms = cfg.timing ? elapsed : 0.0;

  if (out.decomposition) {
    const Decomposition& d = *out.decomposition;
    row.m = d.m();
    const std::vector<Violation> violations = validate(d, k_max);
    if (!violations.empty()) {
      row.status = "error";
      row.message = "decomposition violates " + to_string(violations.front().constraint) +
                    " in subnetwork " + std::to_string(violations.front().subnetwork);
      out.decomposition.reset();
      return out;
    }
    CapacityReport cap = evaluate_capacity(gains, channel, d, cfg.mc_samples,
                                           derive_seed(layout.seed, Stream::kFading));
    row.objective_sumcut = sumcut(graph, d);
    row.cap_approx = cap.sum_approx;
    row.cap_lb = cap.sum_lb;
    row.cap_mc = cap.sum_mc;
    row.cap_mc_se = cap.mc_std_err;
    out.capacity = std::move(cap);
  }
  return out;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, int workers) {
  cfg.check();
  const std::vector<Instance> instances = expand_instances(cfg);
  const std::size_t per = cfg.algorithms.size();
  const std::size_t tasks = instances.size() * per;
  std::vector<ResultRow> rows(tasks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const Instance& in = instances[t / per];
      const NetworkLayout layout = gen_layout(in.seed, in.k, in.l, cfg.area_side);
      rows[t] = run_decompose(cfg, cfg.algorithms[t % per], layout, in.k_max, in.index).row;
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(tasks)));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<int, int, int, int>;
  std::map<Key, std::size_t> index;
  std::vector<AggregateRow> out;
  struct Samples {
    std::vector<double> cap_approx, cap_lb, cap_mc, sumcut, nodes, runtime;
  };
  std::vector<Samples> samples;
  for (const ResultRow& r : rows) {
    const Key key{r.k, r.l, r.k_max, static_cast<int>(r.algo)};
    auto [it, fresh] = index.emplace(key, out.size());
    if (fresh) {
      AggregateRow a;
      a.k = r.k;
      a.l = r.l;
      a.k_max = r.k_max;
      a.algo = r.algo;
      out.push_back(a);
      samples.emplace_back();
    }
    AggregateRow& a = out[it->second];
    Samples& s = samples[it->second];
    ++a.rows;
    if (!r.cap_approx) {
      ++a.failed;
      continue;
    }
    s.cap_approx.push_back(*r.cap_approx);
    s.cap_lb.push_back(*r.cap_lb);
    if (r.cap_mc) s.cap_mc.push_back(*r.cap_mc);
    s.sumcut.push_back(*r.objective_sumcut);
    s.nodes.push_back(static_cast<double>(r.nodes));
    s.runtime.push_back(r.runtime_ms);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].cap_approx = summarize(samples[i].cap_approx);
    out[i].cap_lb = summarize(samples[i].cap_lb);
    out[i].cap_mc = summarize(samples[i].cap_mc);
    out[i].objective_sumcut = summarize(samples[i].sumcut);
    out[i].nodes = summarize(samples[i].nodes);
    out[i].runtime_ms = summarize(samples[i].runtime);
  }
  return out;
}

const char* const kCsvHeader =
    "seed,instance,algo,K,L,Kmax,M,status,objective_sumcut,cap_approx,cap_lb,cap_mc,cap_mc_se,"
    "nodes,runtime_ms";

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string s = std::string(kCsvHeader) + "\n";
  for (const ResultRow& r : rows) {
    s += std::to_string(r.seed) + "," + std::to_string(r.instance) + "," + to_string(r.algo) +
         "," + std::to_string(r.k) + "," + std::to_string(r.l) + "," + std::to_string(r.k_max) +
         "," + (r.m > 0 ? std::to_string(r.m) : std::string()) + "," + r.status + "," +
         fmt(r.objective_sumcut) + "," + fmt(r.cap_approx) + "," + fmt(r.cap_lb) + "," +
         fmt(r.cap_mc) + "," + fmt(r.cap_mc_se) + "," + std::to_string(r.nodes) + "," +
         fmt(r.runtime_ms, "%.3f") + "\n";
  }
  return s;
}

std::string to_summary_csv(const std::vector<AggregateRow>& rows) {
  std::string s =
      "K,L,Kmax,algo,rows,failed,cap_approx_mean,cap_approx_se,cap_lb_mean,cap_lb_se,"
      "cap_mc_mean,cap_mc_se,sumcut_mean,sumcut_se,nodes_mean,nodes_se,runtime_ms_mean,"
      "runtime_ms_se\n";
  auto stat = [](const Stat& st) {
    if (st.n == 0) return std::string(",");
    return fmt(st.mean) + "," + fmt(st.std_err);
  };
  for (const AggregateRow& a : rows) {
    s += std::to_string(a.k) + "," + std::to_string(a.l) + "," + std::to_string(a.k_max) + "," +
         to_string(a.algo) + "," + std::to_string(a.rows) + "," + std::to_string(a.failed) + "," +
         stat(a.cap_approx) + "," + stat(a.cap_lb) + "," + stat(a.cap_mc) + "," +
         stat(a.objective_sumcut) + "," + stat(a.nodes) + "," + stat(a.runtime_ms) + "\n";
  }
  return s;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << contents;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string summary_path(const std::string& csv_path) {
  const std::filesystem::path p(csv_path);
  if (p.extension() == ".csv") {
    return (p.parent_path() / (p.stem().string() + ".summary.csv")).string();
  }
  return csv_path + ".summary.csv";
}

ojson to_json(const NetworkLayout& layout) {
  ojson j;
  j["seed"] = layout.seed;
  j["k"] = layout.num_ue();
  j["l"] = layout.num_bs();
  j["area_side"] = layout.area_side;
  ojson ue = ojson::array();
  for (const Point& p : layout.ue) ue.push_back({p.x, p.y});
  ojson bs = ojson::array();
  for (const Point& p : layout.bs) bs.push_back({p.x, p.y});
  j["ue"] = ue;
  j["bs"] = bs;
  return j;
}

NetworkLayout layout_from_json(const nlohmann::json& j) {
  NetworkLayout layout;
  layout.seed = j.value("seed", std::uint64_t{0});
  layout.area_side = j.value("area_side", 1.0);
  for (const auto& p : j.at("ue")) layout.ue.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  for (const auto& p : j.at("bs")) layout.bs.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  if (j.contains("k") && j.at("k").get<int>() != layout.num_ue()) {
    throw InvalidArgument("layout: k does not match the UE list");
  }
  if (j.contains("l") && j.at("l").get<int>() != layout.num_bs()) {
    throw InvalidArgument("layout: l does not match the BS list");
  }
  if (layout.ue.empty() || layout.bs.empty()) throw InvalidArgument("layout: need UEs and BSs");
  return layout;
}

ojson to_json(const Decomposition& d) {
  ojson j;
  j["m"] = d.m();
  j["k"] = d.num_ue();
  j["l"] = d.num_bs();
  j["assignment"] = d.assignment();
  return j;
}

Decomposition decomposition_from_json(const nlohmann::json& j, int num_ue, int num_bs) {
  std::vector<int> assignment = j.at("assignment").get<std::vector<int>>();
  if (static_cast<int>(assignment.size()) != num_ue + num_bs) {
    throw InvalidArgument("decomposition: assignment length " + std::to_string(assignment.size()) +
                          " does not match K + L = " + std::to_string(num_ue + num_bs));
  }
  Decomposition d(num_ue, num_bs, std::move(assignment));
  if (j.contains("m") && j.at("m").get<int>() != d.m()) {
    throw InvalidArgument("decomposition: m does not match the assignment");
  }
  return d;
}

ojson to_json(const CapacityReport& r) {
  ojson j;
  j["sum_mc"] = number_or_null(r.sum_mc);
  j["mc_std_err"] = number_or_null(r.mc_std_err);
  j["mc_samples"] = r.mc_samples;
  j["sum_approx"] = r.sum_approx;
  j["sum_lb"] = r.sum_lb;
  j["per_subnetwork_approx"] = r.per_subnetwork_approx;
  return j;
}

ojson to_json(const SolveReport& r) {
  ojson j;
  j["objective"] = number_or_null(r.objective);
  j["status"] = to_string(r.status);
  j["nodes_explored"] = r.nodes_explored;
  j["gap"] = number_or_null(r.gap);
  j["wall_time"] = r.wall_time;
  j["decomposition"] = r.decomposition ? to_json(*r.decomposition) : ojson(nullptr);
  return j;
}

ojson to_json(const ResultRow& r) {
  ojson j;
  j["seed"] = r.seed;
  j["instance"] = r.instance;
  j["algo"] = to_string(r.algo);
  j["K"] = r.k;
  j["L"] = r.l;
  j["Kmax"] = r.k_max;
  j["M"] = r.m;
  j["status"] = r.status;
  j["objective_sumcut"] = number_or_null(r.objective_sumcut);
  j["cap_approx"] = number_or_null(r.cap_approx);
  j["cap_lb"] = number_or_null(r.cap_lb);
  j["cap_mc"] = number_or_null(r.cap_mc);
  j["cap_mc_se"] = number_or_null(r.cap_mc_se);
  j["nodes"] = r.nodes;
  j["runtime_ms"] = r.runtime_ms;
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

ojson snapshot_json(const Decomposition& d) {
  ojson j;
  j["m"] = d.m();
  ojson subs = ojson::array();
  for (int m = 0; m < d.m(); ++m) {
    subs.push_back({{"index", m}, {"ues", d.ues(m)}, {"bss", d.bss(m)}});
  }
  j["subnetworks"] = subs;
  j["listing"] = describe(d);
  return j;
}

}  // namespace ccfnet
