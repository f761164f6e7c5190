#pragma once

#include "ltn/diffusion.hpp"
#include "ltn/learning.hpp"
#include "ltn/synthetic.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace ltn {

struct GraphSource {
  std::string kind = "synthetic";  // synthetic | edge_list | fixture
  RandomGraphSpec random;
  std::uint64_t seed = 7;
  std::string path;
  std::string edge_features;
  std::string autonomy_pos, autonomy_neg;
  std::string params;
  std::string fixture;  // two_node | star
  bool generate_features = false;
};

struct ExperimentConfig {
  GraphSource graph;
  FeatureSpec features;
  std::uint64_t feature_seed = 11;
  Model model = Model::Lt;
  std::vector<std::string> policies = {"bgg_dgr",        "rdm",           "grd_kw",
                                       "grd_explr_q=1", "grd_explr_q=2", "grd_explr_q=3",
                                       "grd_splt"};
  std::size_t K = 5;
  int epochs = 30;
  int horizon_q = 1;
  std::int64_t horizon = 0;  // 0: end of `epochs` epochs at q = horizon_q
  std::size_t repetitions = 5;
  std::size_t oracle_samples = 1000;
  EvaluatorSettings evaluation;
  bool use_exploitation_feedback = true;
  std::size_t exploration_coseed = 4;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: hardware concurrency

  // simulate / greedy
  std::vector<NodeId> seeds;
  std::size_t runs = 1;
  bool dump_traces = true;
  Model simulate_model = Model::Ltn;
  std::size_t greedy_samples = 10000;
  bool dump_observations = false;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
  std::int64_t resolved_horizon(int d_prime) const;
};

// Reads the JSON file (empty path gives the defaults) and applies the
// LTN_THREADS environment override.
ExperimentConfig load_experiment_config(const std::string& path);

Instance build_instance(const ExperimentConfig& config);

// Policy names: bgg_dgr, rdm, grd_kw, grd_splt, grd_explr_q=<q>.
bool is_known_policy(const std::string& name);

struct PolicyRun {
  std::string policy;
  std::size_t repetition = 0;
  LearningRun run;
};

struct ExperimentResult {
  std::vector<PolicyRun> runs;  // policy-major, then repetition
  double f_star = 0.0;
  FStarMethod f_star_method = FStarMethod::Greedy;
  ExplorationSets exploration;
  std::int64_t horizon = 0;
};

using ObservationSink =
    std::function<void(const std::string& policy, std::size_t rep, std::int64_t round,
                       const std::vector<RoundObservation>& observations)>;

// The sink, when set, is called from worker threads.
ExperimentResult run_experiment(const ExperimentConfig& config, const Instance& instance,
                                const ObservationSink& sink = {});

// Per (policy, rep) CSVs, aggregate.csv, plot_cumulative_reward.csv,
// plot_theta_error.csv and summary.json.
void write_experiment_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                              const std::filesystem::path& out_dir);

void write_records_csv(std::ostream& out, const std::vector<RegretRecord>& records);

// Runs `config.runs` cascades from `config.seeds`; writes traces.jsonl (if
// enabled) and summary.json. Returns the summary.
nlohmann::json simulate(const ExperimentConfig& config, const Instance& instance,
                        const std::filesystem::path& out_dir);

nlohmann::json greedy_report(const ExperimentConfig& config, const Instance& instance);

// Formats a double so that parsing it back gives the same value.
std::string format_double(double x);

}  // namespace ltn
