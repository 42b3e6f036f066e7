#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccfnet/errors.hpp"
#include "ccfnet/experiment.hpp"

using namespace ccfnet;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("ccfnet_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

ExperimentConfig small_sweep() {
  ExperimentConfig c;
  c.k_list = {6, 8};
  c.l_list = {5};
  c.k_max_list = {3};
  c.realizations = 3;
  c.algorithms = {Algorithm::kBnb, Algorithm::kBc2f, Algorithm::kKmeansUe, Algorithm::kKmeansBs};
  c.mc_samples = 50;
  c.timing = false;
  return c;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Algorithms, NamesRoundTrip) {
  for (Algorithm a : {Algorithm::kBnb, Algorithm::kBc2f, Algorithm::kBrute, Algorithm::kKmeansUe,
                      Algorithm::kKmeansBs}) {
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  }
  EXPECT_THROW(parse_algorithm("bssr"), InvalidArgument);
}

TEST(Config, ParsesAndValidates) {
  const auto j = nlohmann::json::parse(R"({
    "k_list": [5, 8], "l_list": [6], "k_max_list": [3], "realizations": 30,
    "algorithms": ["bc2f", "brute"], "mc_samples": 0, "base_seed": 42,
    "brute_objective": "sumcut", "solver": {"node_limit": 10}, "timing": false})");
  const ExperimentConfig c = config_from_json(j);
  EXPECT_EQ(c.k_list, (std::vector<int>{5, 8}));
  EXPECT_EQ(c.realizations, 30);
  EXPECT_EQ(c.algorithms, (std::vector<Algorithm>{Algorithm::kBc2f, Algorithm::kBrute}));
  EXPECT_EQ(c.brute_objective, BruteObjective::kSumcut);
  EXPECT_EQ(c.solver.node_limit, 10);
  EXPECT_FALSE(c.timing);
  EXPECT_EQ(config_from_json(to_json(c)).base_seed, 42u);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"k_lsit": [5]})")), InvalidArgument);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"realizations": 0})")), InvalidArgument);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"k_list": []})")), InvalidArgument);
}

TEST(Instances, LayoutsSharedAcrossCaps) {
  ExperimentConfig c = small_sweep();
  c.k_max_list = {2, 3};
  const auto in = expand_instances(c);
  ASSERT_EQ(in.size(), 2u * 2u * 3u);
  EXPECT_EQ(in[0].seed, in[3].seed);  // same K, L, realization; different cap
  EXPECT_NE(in[0].seed, in[1].seed);
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_EQ(in[i].index, static_cast<int>(i));
}

TEST(Decompose, Bc2fPaperProfile) {
  ExperimentConfig c;
  c.mc_samples = 0;
  const DecomposeOutcome r = run_decompose(c, Algorithm::kBc2f, gen_layout(1, 24, 30), 5);
  ASSERT_TRUE(r.decomposition.has_value());
  std::vector<int> sizes = r.decomposition->ue_counts();
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<int>{4, 5, 5, 5, 5}));
  EXPECT_EQ(r.row.m, 5);
  EXPECT_FALSE(r.row.cap_mc.has_value());
  EXPECT_LE(*r.row.cap_lb, *r.row.cap_approx + 1e-9);
}

TEST(Decompose, BruteIsOptimal) {
  ExperimentConfig c;
  c.mc_samples = 100;
  const DecomposeOutcome r = run_decompose(c, Algorithm::kBrute, gen_layout(2, 5, 6), 3);
  EXPECT_EQ(r.row.status, "optimal");
  ASSERT_TRUE(r.row.cap_mc.has_value());
  EXPECT_GT(*r.row.cap_mc_se, 0.0);
}

TEST(Decompose, NodeLimitOne) {
  ExperimentConfig c;
  c.mc_samples = 0;
  c.solver.node_limit = 1;
  const DecomposeOutcome r = run_decompose(c, Algorithm::kBnb, gen_layout(3, 10, 6), 3);
  EXPECT_EQ(r.row.status, "limit-hit");
  ASSERT_TRUE(r.decomposition.has_value());
  EXPECT_TRUE(validate(*r.decomposition, 3).empty());
}

TEST(Decompose, InfeasibilityBecomesStatus) {
  ExperimentConfig c;
  c.mc_samples = 0;
  for (Algorithm a : {Algorithm::kBnb, Algorithm::kBc2f, Algorithm::kBrute, Algorithm::kKmeansUe,
                      Algorithm::kKmeansBs}) {
    const DecomposeOutcome r = run_decompose(c, a, gen_layout(4, 10, 2), 2);
    EXPECT_EQ(r.row.status, "infeasible") << to_string(a);
    EXPECT_FALSE(r.row.cap_approx.has_value());
    EXPECT_FALSE(is_error_status(r.row.status));
  }
}

TEST(Decompose, BudgetOverflowIsAnError) {
  ExperimentConfig c;
  c.mc_samples = 0;
  c.brute_budget = 10;
  const DecomposeOutcome r = run_decompose(c, Algorithm::kBrute, gen_layout(5, 6, 5), 3);
  EXPECT_EQ(r.row.status, "error");
  EXPECT_TRUE(is_error_status(r.row.status));
}

TEST(Sweep, CsvHeaderAndRowOrder) {
  const ExperimentConfig c = small_sweep();
  const auto rows = run_sweep(c);
  ASSERT_EQ(rows.size(), 2u * 3u * 4u);
  const auto ls = lines(to_csv(rows));
  EXPECT_EQ(ls.front(),
            "seed,instance,algo,K,L,Kmax,M,status,objective_sumcut,cap_approx,cap_lb,cap_mc,"
            "cap_mc_se,nodes,runtime_ms");
  EXPECT_EQ(ls.size(), rows.size() + 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].instance, static_cast<int>(i / 4));
    EXPECT_EQ(rows[i].algo, c.algorithms[i % 4]);
    EXPECT_EQ(rows[i].runtime_ms, 0.0);
  }
}

TEST(Sweep, ParallelMatchesSequential) {
  const ExperimentConfig c = small_sweep();
  EXPECT_EQ(to_csv(run_sweep(c, 1)), to_csv(run_sweep(c, 3)));
}

TEST(Sweep, SingleRealizationHasZeroStandardError) {
  ExperimentConfig c = small_sweep();
  c.realizations = 1;
  for (const AggregateRow& a : aggregate(run_sweep(c))) {
    EXPECT_EQ(a.rows, 1);
    EXPECT_EQ(a.cap_approx.std_err, 0.0);
  }
}

TEST(Sweep, AggregatesMeans) {
  const ExperimentConfig c = small_sweep();
  const auto rows = run_sweep(c);
  const auto agg = aggregate(rows);
  ASSERT_EQ(agg.size(), 2u * 4u);
  double sum = 0.0;
  for (const auto& r : rows) {
    if (r.k == 6 && r.algo == Algorithm::kBnb) sum += *r.cap_approx;
  }
  EXPECT_NEAR(agg[0].cap_approx.mean, sum / 3.0, 1e-9);
  EXPECT_GT(agg[0].cap_approx.std_err, 0.0);
  const auto summary = lines(to_summary_csv(agg));
  EXPECT_EQ(summary.size(), agg.size() + 1);
}

TEST(Files, AtomicWriteAndSummaryPath) {
  const fs::path d = scratch_dir("atomic");
  const std::string p = (d / "sub" / "out.csv").string();
  write_file_atomic(p, "a,b\n");
  write_file_atomic(p, "c,d\n");
  EXPECT_EQ(slurp(p), "c,d\n");
  EXPECT_FALSE(fs::exists(p + ".tmp"));
  EXPECT_EQ(summary_path("x/results.csv"), "x/results.summary.csv");
  EXPECT_EQ(summary_path("results"), "results.summary.csv");
}

TEST(Json, LayoutAndDecompositionRoundTrip) {
  const NetworkLayout l = gen_layout(6, 4, 3, 2.0);
  EXPECT_EQ(layout_from_json(nlohmann::json::parse(to_json(l).dump())), l);
  const Decomposition d(4, 3, {0, 1, 1, 0, 1, 0, 1});
  EXPECT_EQ(decomposition_from_json(nlohmann::json::parse(to_json(d).dump()), 4, 3), d);
  EXPECT_THROW(decomposition_from_json(to_json(d), 3, 3), InvalidArgument);
  const auto snap = snapshot_json(d);
  EXPECT_EQ(snap.at("m"), 2);
  EXPECT_EQ(snap.at("subnetworks").at(1).at("ues"), (std::vector<int>{1, 2}));
}

class Cli : public ::testing::Test {
 protected:
  static int run(const std::string& args) {
    const std::string cmd = std::string(CCFNET_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }
};

TEST_F(Cli, GenLayoutDecomposeEvaluate) {
  const fs::path d = scratch_dir("cli");
  ASSERT_EQ(run("gen-layout --seed 3 --k 9 --l 6 -o " + (d / "layout.json").string()), 0);
  const auto layout = nlohmann::json::parse(slurp(d / "layout.json"));
  EXPECT_EQ(layout.at("ue").size(), 9u);
  ASSERT_EQ(run("decompose --layout " + (d / "layout.json").string() +
                " --kmax 3 --algo bc2f --mc-samples 20 --trace " + (d / "trace.jsonl").string() +
                " -o " + (d / "dec.json").string()),
            0);
  const auto dec = nlohmann::json::parse(slurp(d / "dec.json"));
  EXPECT_EQ(dec.at("decomposition").at("m"), 3);
  EXPECT_EQ(lines(slurp(d / "trace.jsonl")).size(), 2u);
  std::ofstream(d / "decomp.json") << dec.at("decomposition").dump();
  ASSERT_EQ(run("evaluate --layout " + (d / "layout.json").string() + " --decomposition " +
                (d / "decomp.json").string() + " --mc-samples 0 --kmax 3 -o " +
                (d / "eval.json").string()),
            0);
  const auto ev = nlohmann::json::parse(slurp(d / "eval.json"));
  EXPECT_NEAR(ev.at("sum_approx").get<double>(),
              dec.at("capacity").at("sum_approx").get<double>(), 1e-12);
  EXPECT_TRUE(ev.at("violations").empty());
  EXPECT_EQ(run("decompose --k 10 --l 2 --kmax 2 --algo bnb"), 1);
  EXPECT_EQ(run("decompose --k 4 --l 2 --kmax 2 --algo nope"), 2);
}

TEST_F(Cli, SweepIsReproducible) {
  const fs::path d = scratch_dir("sweep");
  std::ofstream(d / "cfg.json") << R"({"k_list": [5], "l_list": [4], "k_max_list": [3],
    "realizations": 2, "algorithms": ["bnb", "bc2f", "kmeans-bs"], "mc_samples": 20})";
  const std::string base = "sweep --config " + (d / "cfg.json").string() + " --no-timing --output ";
  ASSERT_EQ(run(base + (d / "a.csv").string()), 0);
  ASSERT_EQ(run(base + (d / "b.csv").string()), 0);
  EXPECT_EQ(slurp(d / "a.csv"), slurp(d / "b.csv"));
  EXPECT_TRUE(fs::exists(d / "a.summary.csv"));
  ASSERT_EQ(run("snapshot --k 6 --l 4 --kmax 3 -o " + (d / "snap.json").string()), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(d / "snap.json")).at("results").size(), 4u);
}

TEST_F(Cli, ErrorRowsSetExitCode) {
  const fs::path d = scratch_dir("errors");
  std::ofstream(d / "cfg.json") << R"({"k_list": [6], "l_list": [5], "k_max_list": [3],
    "realizations": 1, "algorithms": ["brute"], "mc_samples": 0, "brute_budget": 5})";
  const std::string base = "sweep --config " + (d / "cfg.json").string() + " --output " +
                           (d / "r.csv").string();
  EXPECT_EQ(run(base), 1);
  EXPECT_EQ(run(base + " --allow-errors"), 0);
}
