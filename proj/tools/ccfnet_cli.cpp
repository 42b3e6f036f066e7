// ccfnet: layouts, decompositions, capacity evaluation and sweeps.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccfnet/errors.hpp"
#include "ccfnet/experiment.hpp"

using namespace ccfnet;
using ojson = nlohmann::ordered_json;

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open " + path);
  return nlohmann::json::parse(f);
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

const char* outcome_name(NodeOutcome o) {
  switch (o) {
    case NodeOutcome::kBranched:
      return "branched";
    case NodeOutcome::kPrunedBound:
      return "pruned";
    case NodeOutcome::kInfeasible:
      return "infeasible";
    case NodeOutcome::kSolved:
      return "solved";
    case NodeOutcome::kOpen:
      return "open";
  }
  return "unknown";
}

int worker_count() {
  const char* env = std::getenv("CCFNET_WORKERS");
  if (!env || !*env) return 1;
  const int n = std::atoi(env);
  if (n < 1) throw InvalidArgument("CCFNET_WORKERS must be a positive integer");
  return n;
}

// Layout from --layout or generated from --seed/--k/--l.
struct LayoutSource {
  std::string file;
  std::uint64_t seed = 1;
  int k = 0;
  int l = 0;
  double side = 1.0;

  void add(CLI::App* app) {
    app->add_option("--layout", file, "Layout JSON file");
    app->add_option("--seed", seed, "Layout seed when generating");
    app->add_option("--k", k, "UE count when generating");
    app->add_option("--l", l, "BS count when generating");
    app->add_option("--side", side, "Square side when generating");
  }

  NetworkLayout get() const {
    if (!file.empty()) return layout_from_json(read_json(file));
    if (k < 1 || l < 1) throw InvalidArgument("give --layout or positive --k and --l");
    return gen_layout(seed, k, l, side);
  }
};

ExperimentConfig load_config(const std::string& path) {
  return path.empty() ? ExperimentConfig{} : config_from_json(read_json(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustered cell-free network decomposition"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-layout", "Draw a random layout");
  std::uint64_t gen_seed = 1;
  int gen_k = 0, gen_l = 0;
  double gen_side = 1.0;
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "Layout seed")->required();
  gen->add_option("--k", gen_k, "UE count")->required();
  gen->add_option("--l", gen_l, "BS count")->required();
  gen->add_option("--side", gen_side, "Square side");
  gen->add_option("-o,--output", gen_out, "Output file (stdout if omitted)");

  auto* dec = app.add_subcommand("decompose", "Decompose one network");
  LayoutSource dec_src;
  dec_src.add(dec);
  std::string dec_config, dec_algo = "bc2f", dec_out, dec_trace;
  int dec_kmax = 0;
  std::optional<int> dec_mc;
  std::optional<long> dec_nodes;
  std::optional<double> dec_time;
  dec->add_option("--kmax", dec_kmax, "UE cap per subnetwork")->required();
  dec->add_option("--algo", dec_algo, "bnb, bc2f, brute, kmeans-ue or kmeans-bs");
  dec->add_option("--config", dec_config, "Experiment config JSON (channel, solver, mc)");
  dec->add_option("--mc-samples", dec_mc, "Monte-Carlo samples (0 skips)");
  dec->add_option("--node-limit", dec_nodes, "Branch-and-bound node limit");
  dec->add_option("--time-limit", dec_time, "Branch-and-bound time limit in seconds");
  dec->add_option("--trace", dec_trace,
                  "bnb: node trace CSV; bc2f: per-iteration JSON lines");
  dec->add_option("-o,--output", dec_out, "Output file (stdout if omitted)");

  auto* eva = app.add_subcommand("evaluate", "Capacity of a given decomposition");
  LayoutSource eva_src;
  eva_src.add(eva);
  std::string eva_decomp, eva_config, eva_out;
  std::optional<int> eva_mc, eva_kmax;
  std::uint64_t eva_seed = 1;
  eva->add_option("--decomposition", eva_decomp, "Decomposition JSON")->required();
  eva->add_option("--config", eva_config, "Experiment config JSON (channel, mc)");
  eva->add_option("--mc-samples", eva_mc, "Monte-Carlo samples (0 skips)");
  eva->add_option("--mc-seed", eva_seed, "Fading seed");
  eva->add_option("--kmax", eva_kmax, "Also validate against this cap");
  eva->add_option("-o,--output", eva_out, "Output file (stdout if omitted)");

  auto* swp = app.add_subcommand("sweep", "Run a configured experiment sweep");
  std::string swp_config, swp_out, swp_algos;
  std::optional<int> swp_real, swp_mc;
  std::optional<std::uint64_t> swp_seed;
  bool swp_no_timing = false, swp_allow_errors = false;
  swp->add_option("--config", swp_config, "Experiment config JSON")->required();
  swp->add_option("--output", swp_out, "CSV path (overrides output_path)");
  swp->add_option("--realizations", swp_real, "Override realizations");
  swp->add_option("--mc-samples", swp_mc, "Override mc_samples");
  swp->add_option("--base-seed", swp_seed, "Override base_seed");
  swp->add_option("--algorithms", swp_algos, "Comma-separated algorithm list");
  swp->add_flag("--no-timing", swp_no_timing, "Write runtime_ms as 0");
  swp->add_flag("--allow-errors", swp_allow_errors, "Exit 0 even if rows have errors");

  auto* snap = app.add_subcommand("snapshot", "Per-subnetwork membership for several algorithms");
  LayoutSource snap_src;
  snap_src.add(snap);
  std::string snap_config, snap_algos = "bnb,bc2f,kmeans-ue,kmeans-bs", snap_out;
  int snap_kmax = 0;
  snap->add_option("--kmax", snap_kmax, "UE cap per subnetwork")->required();
  snap->add_option("--algorithms", snap_algos, "Comma-separated algorithm list");
  snap->add_option("--config", snap_config, "Experiment config JSON");
  snap->add_option("-o,--output", snap_out, "Output file (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      emit(to_json(gen_layout(gen_seed, gen_k, gen_l, gen_side)).dump(2) + "\n", gen_out);
      return 0;
    }

    if (*dec) {
      ExperimentConfig cfg = load_config(dec_config);
      if (dec_mc) cfg.mc_samples = *dec_mc;
      if (dec_nodes) cfg.solver.node_limit = *dec_nodes;
      if (dec_time) cfg.solver.time_limit = *dec_time;
      cfg.solver.trace = !dec_trace.empty();
      cfg.check();
      const NetworkLayout layout = dec_src.get();
      const Algorithm algo = parse_algorithm(dec_algo);
      DecomposeOutcome r = run_decompose(cfg, algo, layout, dec_kmax);
      ojson j;
      j["row"] = to_json(r.row);
      if (r.report) j["report"] = to_json(*r.report);
      if (r.capacity) j["capacity"] = to_json(*r.capacity);
      if (r.decomposition) {
        j["decomposition"] = to_json(*r.decomposition);
        j["snapshot"] = snapshot_json(*r.decomposition);
      }
      emit(j.dump(2) + "\n", dec_out);
      if (!dec_trace.empty()) {
        std::ostringstream t;
        if (algo == Algorithm::kBc2f) {
          for (const auto& it : r.iterations) t << to_json_line(it) << "\n";
        } else if (r.report) {
          t << "id,parent,depth,lb,incumbent,outcome\n";
          for (const NodeRecord& n : r.report->trace) {
            t << n.id << "," << n.parent << "," << n.depth << "," << n.lb << "," << n.incumbent
              << "," << outcome_name(n.outcome) << "\n";
          }
        }
        write_file_atomic(dec_trace, t.str());
      }
      if (!r.row.message.empty()) std::cerr << r.row.status << ": " << r.row.message << "\n";
      return r.decomposition ? 0 : 1;
    }

    if (*eva) {
      ExperimentConfig cfg = load_config(eva_config);
      if (eva_mc) cfg.mc_samples = *eva_mc;
      cfg.check();
      const NetworkLayout layout = eva_src.get();
      // Accept a bare decomposition or the output of `decompose`.
      ojson dj = read_json(eva_decomp);
      if (dj.contains("decomposition")) dj = dj.at("decomposition");
      const Decomposition d = decomposition_from_json(dj, layout.num_ue(), layout.num_bs());
      const PathGainMatrix gains = path_gains(layout, cfg.channel());
      const CapacityReport cap = evaluate_capacity(gains, cfg.channel(), d, cfg.mc_samples, eva_seed);
      ojson j = to_json(cap);
      j["sumcut"] = sumcut(build_graph(gains), d);
      if (eva_kmax) {
        ojson v = ojson::array();
        for (const Violation& x : validate(d, *eva_kmax)) {
          v.push_back({{"constraint", to_string(x.constraint)},
                       {"subnetwork", x.subnetwork},
                       {"count", x.count}});
        }
        j["violations"] = v;
      }
      emit(j.dump(2) + "\n", eva_out);
      return 0;
    }

    if (*swp) {
      ExperimentConfig cfg = load_config(swp_config);
      if (!swp_out.empty()) cfg.output_path = swp_out;
      if (swp_real) cfg.realizations = *swp_real;
      if (swp_mc) cfg.mc_samples = *swp_mc;
      if (swp_seed) cfg.base_seed = *swp_seed;
      if (swp_no_timing) cfg.timing = false;
      if (!swp_algos.empty()) {
        cfg.algorithms.clear();
        std::stringstream ss(swp_algos);
        for (std::string a; std::getline(ss, a, ',');) cfg.algorithms.push_back(parse_algorithm(a));
      }
      cfg.check();
      const std::vector<ResultRow> rows = run_sweep(cfg, worker_count());
      write_file_atomic(cfg.output_path, to_csv(rows));
      const std::string summary = to_summary_csv(aggregate(rows));
      write_file_atomic(summary_path(cfg.output_path), summary);
      std::cout << summary;
      int errors = 0;
      for (const ResultRow& r : rows) {
        if (is_error_status(r.status)) {
          ++errors;
          std::cerr << "instance " << r.instance << " " << to_string(r.algo) << ": " << r.message
                    << "\n";
        }
      }
      if (errors > 0) std::cerr << errors << " row(s) with error status\n";
      return errors > 0 && !swp_allow_errors ? 1 : 0;
    }

    if (*snap) {
      ExperimentConfig cfg = load_config(snap_config);
      cfg.mc_samples = 0;
      cfg.check();
      const NetworkLayout layout = snap_src.get();
      ojson j;
      j["layout"] = to_json(layout);
      j["k_max"] = snap_kmax;
      ojson results = ojson::array();
      std::stringstream ss(snap_algos);
      for (std::string a; std::getline(ss, a, ',');) {
        DecomposeOutcome r = run_decompose(cfg, parse_algorithm(a), layout, snap_kmax);
        ojson e;
        e["algo"] = a;
        e["status"] = r.row.status;
        if (r.decomposition) {
          e["cap_approx"] = *r.row.cap_approx;
          e["sumcut"] = *r.row.objective_sumcut;
          e["snapshot"] = snapshot_json(*r.decomposition);
        } else {
          e["message"] = r.row.message;
        }
        results.push_back(e);
      }
      j["results"] = results;
      emit(j.dump(2) + "\n", snap_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "ccfnet: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
