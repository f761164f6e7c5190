#pragma once

#include "ltn/diffusion.hpp"
#include "ltn/feedback.hpp"
#include "ltn/graph.hpp"
#include "ltn/influence.hpp"
#include "ltn/rng.hpp"
#include "ltn/weights.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace ltn {

enum class Phase { ExploreEdge, ExploreNode, Exploit };
const char* phase_name(Phase phase);

struct RoundSlot {
  int epoch = 1;
  Phase phase = Phase::ExploreEdge;
  std::int64_t index = 0;  // 0-based position inside the phase
};

// Epoch k: d edge-exploration rounds, d' node-exploration rounds, then k^q
// exploitation rounds. Rounds are 1-based.
class EpochSchedule {
 public:
  EpochSchedule(int d, int d_prime, int q);

  int d() const { return d_; }
  int d_prime() const { return d_prime_; }
  int q() const { return q_; }

  std::int64_t exploitation_length(int k) const;
  std::int64_t epoch_length(int k) const { return d_ + d_prime_ + exploitation_length(k); }
  std::int64_t epoch_start(int k) const;  // t_k
  std::int64_t epoch_end(int k) const { return epoch_start(k + 1) - 1; }
  RoundSlot slot(std::int64_t t) const;

 private:
  int d_, d_prime_, q_;
};

// Ridge accumulator with identity prior: G = I + sum x x^T, b = sum y x.
class RidgeAccumulator {
 public:
  RidgeAccumulator() = default;
  explicit RidgeAccumulator(int dim);

  int dim() const { return static_cast<int>(b_.size()); }
  void add(const Eigen::VectorXd& x, double y);
  Eigen::VectorXd solve() const;
  double min_eigenvalue() const;
  // ||G est - b||
  double residual(const Eigen::VectorXd& estimate) const;
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& target() const { return b_; }
  std::size_t observations() const { return count_; }

 private:
  Eigen::MatrixXd gram_;
  Eigen::VectorXd b_;
  std::size_t count_ = 0;
};

struct RidgeState {
  RidgeAccumulator edge;      // M, r
  RidgeAccumulator autonomy;  // V, s
  Eigen::VectorXd theta_hat, beta_hat;
};

struct EpochSnapshot {
  int epoch = 0;
  std::int64_t round = 0;
  Eigen::VectorXd theta, beta;
  double lambda_min_M = 0.0, lambda_min_V = 0.0;
  double residual_M = 0.0, residual_V = 0.0;  // absolute
  double norm_r = 0.0, norm_s = 0.0;
  double c_k = 0.0, kappa_k = 0.0;
  std::size_t observations_M = 0, observations_V = 0;
};

struct ExplorationSets {
  std::vector<EdgeId> edges;
  std::vector<NodeId> nodes;
  double lambda_edge = 0.0;
  double lambda_node = 0.0;
};

// Greedy choice of d edges (and d' nodes with at least one parent) whose
// feature Gram matrices are positive definite. Throws when none is.
ExplorationSets select_exploration_sets(const DirectedGraph& graph, int d, int d_prime);
double exploration_lambda_edges(const DirectedGraph& graph, const std::vector<EdgeId>& edges);
double exploration_lambda_nodes(const DirectedGraph& graph, const std::vector<NodeId>& nodes);

// Confidence radius diagnostics; never consumed by the learners.
double confidence_radius(int dim, int k, int q, double bound);

// N(v): the min(|N_in(v)|, K) parents with the smallest ids.
std::vector<NodeId> autonomy_exploration_seeds(const DirectedGraph& graph, NodeId v, std::size_t K);

struct LearnerConfig {
  std::size_t K = 5;
  std::vector<EdgeId> exploration_edges;
  std::vector<NodeId> exploration_nodes;
  double D = 0.0;
  double D_prime = 0.0;
  int q = 1;
  bool use_exploitation_feedback = false;
  std::size_t exploration_coseed = 0;  // m of max_degree(m); 0 means none
  std::size_t oracle_samples = 1000;
  double alpha = kNominalAlpha;
  double gamma = 1.0;
  // Called with every round's observations when set.
  std::function<void(std::int64_t, const std::vector<RoundObservation>&)> observer;

  void validate(const DirectedGraph& graph, bool needs_nodes) const;
};

struct Instance {
  DirectedGraph graph;
  ModelParams truth;
  DerivedWeights weights;
  Model model = Model::Lt;
};

// Derives ground truth weights (unsanitized; throws if invalid). The
// classical model drops autonomy factors.
Instance make_instance(DirectedGraph graph, ModelParams truth, Model model);

enum class FStarMethod { BruteForce, Greedy };
const char* fstar_method_name(FStarMethod method);

struct EvaluatorSettings {
  std::size_t K = 5;
  std::size_t eval_worlds = 10000;
  std::size_t fstar_worlds = 10000;
  std::size_t fstar_samples = 100000;
  std::uint64_t brute_force_budget = 20000;
  // Instances whose triggering realizations fit this budget are evaluated
  // exactly.
  std::uint64_t exact_budget = 200000;
};

// Ground-truth evaluation of seed sets and the benchmark f*.
class RegretEvaluator {
 public:
  RegretEvaluator(const Instance& instance, const EvaluatorSettings& settings, Rng& rng);

  double f_star() const { return f_star_; }
  FStarMethod method() const { return method_; }
  const std::vector<NodeId>& benchmark_set() const { return benchmark_; }
  bool exact() const { return exact_; }
  // Thread safe; cached by seed set.
  double value(std::vector<NodeId> seeds) const;

 private:
  double compute(const std::vector<NodeId>& seeds) const;
  const Instance& instance_;
  bool exact_ = false;
  std::unique_ptr<LiveEdgeBank> bank_;
  double f_star_ = 0.0;
  FStarMethod method_ = FStarMethod::Greedy;
  std::vector<NodeId> benchmark_;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<NodeId>, double> cache_;
};

double compute_scaled_regret(double f_star, double policy_value, double alpha, double gamma);

struct RegretRecord {
  std::int64_t round = 0;
  int epoch = 0;
  Phase phase = Phase::Exploit;
  std::string policy;
  std::vector<NodeId> seed_set;
  double reward = 0.0;
  double cumulative_reward = 0.0;
  double policy_value = 0.0;
  double scaled_regret = 0.0;
  double alpha = kNominalAlpha;
  double gamma = 1.0;
  double f_star = 0.0;
  FStarMethod f_star_method = FStarMethod::Greedy;
  double theta_error = 0.0;  // NaN when the policy keeps no estimate
  double beta_error = 0.0;
};

struct LearningRun {
  std::vector<RegretRecord> records;
  std::vector<EpochSnapshot> history;
  RidgeState state;
};

LearningRun run_algorithm1(const Instance& instance, const LearnerConfig& config, std::int64_t T,
                           const RegretEvaluator& evaluator, Rng& rng);
LearningRun run_algorithm2(const Instance& instance, const LearnerConfig& config, std::int64_t T,
                           const RegretEvaluator& evaluator, Rng& rng);

enum class Baseline { Random, MaxDegree, KnownWeights, SplitAttribution };
Baseline parse_baseline(const std::string& name);
const char* baseline_name(Baseline policy);

LearningRun run_baseline(const Instance& instance, Baseline policy, const LearnerConfig& config,
                         std::int64_t T, const RegretEvaluator& evaluator, Rng& rng);

// Estimated weights as handed to the oracle: sanitized copies of w_theta and
// q_beta (beta may be empty).
DerivedWeights estimated_weights(const DirectedGraph& graph, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& beta);

// The `m` largest out-degree nodes (ties to lower ids) excluding `excluded`
// and every in-neighbour of `tail`.
std::vector<NodeId> coseed_nodes(const DirectedGraph& graph, NodeId head, NodeId tail, std::size_t m);

std::vector<NodeId> top_out_degree(const DirectedGraph& graph, std::size_t K);

}  // namespace ltn
