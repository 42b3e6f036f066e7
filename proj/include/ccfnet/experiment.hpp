#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccfnet/baselines.hpp"
#include "ccfnet/bisect.hpp"
#include "ccfnet/bnb.hpp"
#include "ccfnet/capacity.hpp"
#include "ccfnet/netmodel.hpp"
#include "ccfnet/partition.hpp"

namespace ccfnet {

enum class Algorithm { kBnb, kBc2f, kBrute, kKmeansUe, kKmeansBs };

std::string to_string(Algorithm a);
/// "bnb", "bc2f", "brute", "kmeans-ue" or "kmeans-bs".
Algorithm parse_algorithm(const std::string& name);

struct ExperimentConfig {
  std::vector<int> k_list{20, 30, 40};
  std::vector<int> l_list{30};
  std::vector<int> k_max_list{5};
  int realizations = 200;
  double alpha = 4.0;
  double p_over_n0_db = 10.0;
  double area_side = 1.0;
  double d_min = 1e-3;
  std::vector<Algorithm> algorithms{Algorithm::kBnb, Algorithm::kBc2f};
  int mc_samples = 2000;  // 0 skips the Monte-Carlo column
  std::uint64_t base_seed = 1;
  std::string output_path = "results.csv";
  SolverConfig solver;
  BruteObjective brute_objective = BruteObjective::kApproxCapacity;
  std::uint64_t brute_budget = EnumerationBudget{}.max_assignments;
  /// When false the runtime column is written as 0 so reruns are
  /// byte-identical.
  bool timing = true;

  ChannelModel channel() const;
  void check() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

/// One network drawn for the sweep. The layout seed depends on (K, L,
/// realization) only, so every cap sees the same layouts.
struct Instance {
  int index = 0;
  int realization = 0;
  int k = 0;
  int l = 0;
  int k_max = 0;
  std::uint64_t seed = 0;
};

std::uint64_t layout_seed(std::uint64_t base_seed, int k, int l, int realization);
std::vector<Instance> expand_instances(const ExperimentConfig& cfg);

struct ResultRow {
  std::uint64_t seed = 0;
  int instance = 0;
  Algorithm algo = Algorithm::kBnb;
  int k = 0;
  int l = 0;
  int k_max = 0;
  int m = 0;
  /// optimal, gap-reached, limit-hit, heuristic, infeasible or error.
  std::string status;
  std::optional<double> objective_sumcut;
  std::optional<double> cap_approx;
  std::optional<double> cap_lb;
  std::optional<double> cap_mc;
  std::optional<double> cap_mc_se;
  long nodes = 0;
  double runtime_ms = 0.0;
  std::string message;  // reason for infeasible / error rows
};

bool is_error_status(const std::string& status);

struct DecomposeOutcome {
  ResultRow row;
  std::optional<Decomposition> decomposition;
  std::optional<SolveReport> report;
  std::optional<CapacityReport> capacity;
  std::vector<BisectIteration> iterations;  // bc2f only
};

/// Runs one algorithm on one layout and evaluates the result. Solver failures
/// become the row status instead of exceptions.
DecomposeOutcome run_decompose(const ExperimentConfig& cfg, Algorithm algo,
                               const NetworkLayout& layout, int k_max, int instance_index = 0);

/// All instances times all algorithms, ordered by (instance, algorithm
/// position in the config) regardless of `workers`.
std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, int workers = 1);

struct Stat {
  int n = 0;
  double mean = 0.0;
  double std_err = 0.0;  // 0 when n < 2
};

struct AggregateRow {
  int k = 0;
  int l = 0;
  int k_max = 0;
  Algorithm algo = Algorithm::kBnb;
  int rows = 0;
  int failed = 0;
  Stat cap_approx;
  Stat cap_lb;
  Stat cap_mc;
  Stat objective_sumcut;
  Stat nodes;
  Stat runtime_ms;
};

/// Mean and standard error per (K, L, Kmax, algorithm) cell over rows with a
/// decomposition, in first-appearance order.
std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows);

extern const char* const kCsvHeader;

std::string to_csv(const std::vector<ResultRow>& rows);
std::string to_summary_csv(const std::vector<AggregateRow>& rows);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

/// Summary path used next to a sweep CSV: results.csv -> results.summary.csv.
std::string summary_path(const std::string& csv_path);

nlohmann::ordered_json to_json(const NetworkLayout& layout);
NetworkLayout layout_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Decomposition& d);
Decomposition decomposition_from_json(const nlohmann::json& j, int num_ue, int num_bs);
nlohmann::ordered_json to_json(const CapacityReport& r);
nlohmann::ordered_json to_json(const SolveReport& r);
nlohmann::ordered_json to_json(const ResultRow& r);

/// Membership listing for figure-style inspection.
nlohmann::ordered_json snapshot_json(const Decomposition& d);

}  // namespace ccfnet
