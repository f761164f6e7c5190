#include "ltn/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ltn {

const char* phase_name(Phase phase) {
  switch (phase) {
    case Phase::ExploreEdge: return "explore_edge";
    case Phase::ExploreNode: return "explore_node";
    case Phase::Exploit: return "exploit";
  }
  return "?";
}

EpochSchedule::EpochSchedule(int d, int d_prime, int q) : d_(d), d_prime_(d_prime), q_(q) {
  if (d < 0 || d_prime < 0) throw std::invalid_argument("exploration round counts must be >= 0");
  if (q < 1) throw std::invalid_argument("q must be a positive integer");
}

std::int64_t EpochSchedule::exploitation_length(int k) const {
  std::int64_t len = 1;
  for (int i = 0; i < q_; ++i) {
    len *= k;
    if (len > (std::int64_t{1} << 50)) throw std::overflow_error("epoch length overflow");
  }
  return len;
}

std::int64_t EpochSchedule::epoch_start(int k) const {
  if (k < 1) throw std::invalid_argument("epochs are numbered from 1");
  std::int64_t t = 1;
  for (int m = 1; m < k; ++m) t += epoch_length(m);
  return t;
}

RoundSlot EpochSchedule::slot(std::int64_t t) const {
  if (t < 1) throw std::invalid_argument("rounds are numbered from 1");
  std::int64_t start = 1;
  for (int k = 1;; ++k) {
    const std::int64_t len = epoch_length(k);
    if (t < start + len) {
      std::int64_t offset = t - start;
      if (offset < d_) return {k, Phase::ExploreEdge, offset};
      offset -= d_;
      if (offset < d_prime_) return {k, Phase::ExploreNode, offset};
      return {k, Phase::Exploit, offset - d_prime_};
    }
    start += len;
  }
}

RidgeAccumulator::RidgeAccumulator(int dim)
    : gram_(Eigen::MatrixXd::Identity(dim, dim)), b_(Eigen::VectorXd::Zero(dim)) {}

void RidgeAccumulator::add(const Eigen::VectorXd& x, double y) {
  if (x.size() != b_.size()) throw std::invalid_argument("ridge feature dimension mismatch");
  gram_.noalias() += x * x.transpose();
  b_ += y * x;
  ++count_;
}

Eigen::VectorXd RidgeAccumulator::solve() const {
  if (b_.size() == 0) return {};
  return gram_.ldlt().solve(b_);
}

double RidgeAccumulator::min_eigenvalue() const {
  if (b_.size() == 0) return std::numeric_limits<double>::infinity();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram_, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

double RidgeAccumulator::residual(const Eigen::VectorXd& estimate) const {
  if (b_.size() == 0) return 0.0;
  return (gram_ * estimate - b_).norm();
}

namespace {

double min_eig(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

// Picks `count` columns greedily by (lambda_min, log det) of the running Gram.
std::vector<std::size_t> greedy_gram(const Eigen::MatrixXd& features, const std::vector<std::size_t>& candidates,
                                     int count, double& lambda) {
  const Eigen::Index dim = features.rows();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  std::vector<std::size_t> chosen;
  std::vector<std::uint8_t> used(static_cast<std::size_t>(features.cols()), 0);
  for (int round = 0; round < count; ++round) {
    std::size_t best = 0;
    double best_lambda = -1.0, best_logdet = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t c : candidates) {
      if (used[c]) continue;
      const Eigen::VectorXd x = features.col(static_cast<Eigen::Index>(c));
      const Eigen::MatrixXd g = gram + x * x.transpose();
      const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g, Eigen::EigenvaluesOnly).eigenvalues();
      const double lam = eig(0);
      double logdet = 0.0;
      for (Eigen::Index i = 0; i < eig.size(); ++i) logdet += std::log(std::max(eig(i), 0.0) + 1e-9);
      const double tol = 1e-12 * std::max(1.0, std::abs(best_lambda));
      if (!found || lam > best_lambda + tol || (std::abs(lam - best_lambda) <= tol && logdet > best_logdet + 1e-12)) {
        best = c;
        best_lambda = lam;
        best_logdet = logdet;
        found = true;
      }
    }
    if (!found) break;
    used[best] = 1;
    chosen.push_back(best);
    const Eigen::VectorXd x = features.col(static_cast<Eigen::Index>(best));
    gram += x * x.transpose();
  }
  lambda = min_eig(gram);
  return chosen;
}

}  // namespace

double exploration_lambda_edges(const DirectedGraph& graph, const std::vector<EdgeId>& edges) {
  const int d = graph.edge_feature_dim();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
  for (EdgeId e : edges) g += graph.edge_features().col(e) * graph.edge_features().col(e).transpose();
  return min_eig(g);
}

double exploration_lambda_nodes(const DirectedGraph& graph, const std::vector<NodeId>& nodes) {
  const int d = graph.autonomy_dim();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
  for (NodeId v : nodes) g += graph.autonomy_neg().col(v) * graph.autonomy_neg().col(v).transpose();
  return min_eig(g);
}

ExplorationSets select_exploration_sets(const DirectedGraph& graph, int d, int d_prime) {
  if (!graph.has_edge_features()) throw std::invalid_argument("graph has no edge features");
  if (d != graph.edge_feature_dim()) throw std::invalid_argument("d does not match the edge feature dimension");
  ExplorationSets out;
  std::vector<std::size_t> edges(graph.edge_count());
  std::iota(edges.begin(), edges.end(), 0);
  for (std::size_t c : greedy_gram(graph.edge_features(), edges, d, out.lambda_edge))
    out.edges.push_back(static_cast<EdgeId>(c));
  if (out.edges.size() < static_cast<std::size_t>(d) || !(out.lambda_edge > 1e-12))
    throw std::domain_error("edge features admit no positive definite exploration set");
  if (d_prime > 0) {
    if (!graph.has_autonomy_features() || graph.autonomy_dim() != d_prime)
      throw std::invalid_argument("d' does not match the autonomy feature dimension");
    std::vector<std::size_t> nodes;
    for (NodeId v = 0; v < graph.node_count(); ++v)
      if (graph.in_degree(v) > 0) nodes.push_back(v);
    for (std::size_t c : greedy_gram(graph.autonomy_neg(), nodes, d_prime, out.lambda_node))
      out.nodes.push_back(static_cast<NodeId>(c));
    if (out.nodes.size() < static_cast<std::size_t>(d_prime) || !(out.lambda_node > 1e-12))
      throw std::domain_error("autonomy features admit no positive definite exploration set");
  }
  return out;
}

double confidence_radius(int dim, int k, int q, double bound) {
  const double dd = dim;
  return std::sqrt(dd * std::log(1.0 + k * dd) + dd * q * std::log(static_cast<double>(k))) + bound;
}

std::vector<NodeId> autonomy_exploration_seeds(const DirectedGraph& graph, NodeId v, std::size_t K) {
  std::vector<NodeId> parents = graph.in_neighbors(v);
  std::sort(parents.begin(), parents.end());
  parents.resize(std::min(parents.size(), K));
  return parents;
}

void LearnerConfig::validate(const DirectedGraph& graph, bool needs_nodes) const {
  if (K < 1 || K > graph.node_count()) throw std::invalid_argument("K must lie in [1, |V|]");
  if (q < 1) throw std::invalid_argument("q must be a positive integer");
  if (oracle_samples < 1) throw std::invalid_argument("oracle_samples must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0) || !(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("alpha and gamma must lie in (0,1]");
  if (exploration_edges.empty()) throw std::invalid_argument("no exploration edges");
  for (EdgeId e : exploration_edges)
    if (e >= graph.edge_count()) throw std::invalid_argument("exploration edge id out of range");
  if (!(exploration_lambda_edges(graph, exploration_edges) > 1e-12))
    throw std::domain_error("exploration edge Gram matrix is not positive definite");
  if (!needs_nodes) return;
  if (exploration_nodes.empty()) throw std::invalid_argument("no exploration nodes");
  for (NodeId v : exploration_nodes) {
    graph.check_node(v);
    if (graph.in_degree(v) == 0)
      throw std::invalid_argument("exploration node " + std::to_string(v) + " has no parents");
  }
  if (!(exploration_lambda_nodes(graph, exploration_nodes) > 1e-12))
    throw std::domain_error("exploration node Gram matrix is not positive definite");
}

Instance make_instance(DirectedGraph graph, ModelParams truth, Model model) {
  if (model == Model::Tsn) throw std::invalid_argument("instances use the lt or ltn model");
  if (model == Model::Ltn && !truth.has_autonomy()) throw std::invalid_argument("ltn instance needs beta");
  truth.validate();
  Instance inst;
  inst.graph = std::move(graph);
  inst.truth = std::move(truth);
  inst.model = model;
  ModelParams p = inst.truth;
  if (model == Model::Lt) p.beta.resize(0);
  inst.weights = derive_weights(inst.graph, p, false);
  return inst;
}

const char* fstar_method_name(FStarMethod method) {
  return method == FStarMethod::BruteForce ? "brute_force" : "greedy_mc";
}

RegretEvaluator::RegretEvaluator(const Instance& instance, const EvaluatorSettings& settings, Rng& rng)
    : instance_(instance) {
  const auto& g = instance.graph;
  if (settings.K > g.node_count()) throw std::invalid_argument("K exceeds node count");
  exact_ = full_realization_count(g, instance.weights) <= static_cast<double>(settings.exact_budget);
  Rng bank_rng = rng.child(1);
  if (!exact_) bank_ = std::make_unique<LiveEdgeBank>(g, instance.weights, settings.eval_worlds, bank_rng);
  if (binomial(g.node_count(), settings.K) <= static_cast<double>(settings.brute_force_budget)) {
    const OracleResult best = brute_force_opt(
        g.node_count(), settings.K, [&](std::span<const NodeId> s) { return value({s.begin(), s.end()}); },
        settings.brute_force_budget);
    benchmark_ = best.seed_set;
    f_star_ = best.value_estimate.mean;
    method_ = FStarMethod::BruteForce;
  } else {
    Rng greedy_rng = rng.child(2);
    GreedyOptions opt;
    opt.n_samples = settings.fstar_worlds;
    benchmark_ = greedy_oracle(g, instance.weights, settings.K, opt, greedy_rng).seed_set;
    Rng mc_rng = rng.child(3);
    f_star_ = estimate_influence(g, instance.weights, benchmark_, settings.fstar_samples, mc_rng).mean;
    method_ = FStarMethod::Greedy;
  }
}

double RegretEvaluator::compute(const std::vector<NodeId>& seeds) const {
  if (exact_) return exact_positive_influence(instance_.graph, instance_.weights, seeds,
                                              std::numeric_limits<std::uint64_t>::max());
  return bank_->evaluate(seeds).mean;
}

double RegretEvaluator::value(std::vector<NodeId> seeds) const {
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(seeds);
    if (it != cache_.end()) return it->second;
  }
  const double v = compute(seeds);
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.emplace(seeds, v);
  return v;
}

double compute_scaled_regret(double f_star, double policy_value, double alpha, double gamma) {
  if (!(alpha * gamma > 0.0)) throw std::invalid_argument("alpha * gamma must be positive");
  if (alpha > 1.0 || gamma > 1.0) throw std::invalid_argument("alpha and gamma must not exceed 1");
  if (f_star < 0.0) throw std::invalid_argument("f_star must be >= 0");
  return f_star - policy_value / (alpha * gamma);
}

DerivedWeights estimated_weights(const DirectedGraph& graph, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& beta) {
  ModelParams p;
  p.theta = theta;
  p.beta = beta;
  return derive_weights(graph, p, true);
}

namespace {
std::vector<NodeId> by_out_degree(const DirectedGraph& graph) {
  std::vector<NodeId> order(graph.node_count());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return graph.out_degree(a) > graph.out_degree(b); });
  return order;
}
}  // namespace

std::vector<NodeId> coseed_nodes(const DirectedGraph& graph, NodeId head, NodeId tail, std::size_t m) {
  std::vector<NodeId> out;
  for (NodeId v : by_out_degree(graph)) {
    if (out.size() == m) break;
    if (v == head || v == tail || graph.find_edge(v, tail)) continue;
    out.push_back(v);
  }
  return out;
}

std::vector<NodeId> top_out_degree(const DirectedGraph& graph, std::size_t K) {
  std::vector<NodeId> order = by_out_degree(graph);
  order.resize(std::min(K, order.size()));
  return order;
}

Baseline parse_baseline(const std::string& name) {
  if (name == "random" || name == "rdm") return Baseline::Random;
  if (name == "max_degree" || name == "bgg_dgr") return Baseline::MaxDegree;
  if (name == "known_weights_greedy" || name == "grd_kw") return Baseline::KnownWeights;
  if (name == "split_attribution" || name == "grd_splt") return Baseline::SplitAttribution;
  throw std::invalid_argument("unknown policy '" + name + "'");
}

const char* baseline_name(Baseline policy) {
  switch (policy) {
    case Baseline::Random: return "rdm";
    case Baseline::MaxDegree: return "bgg_dgr";
    case Baseline::KnownWeights: return "grd_kw";
    case Baseline::SplitAttribution: return "grd_splt";
  }
  return "?";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Shared per-round bookkeeping for learners and baselines.
class RoundLog {
 public:
  RoundLog(const Instance& inst, const RegretEvaluator& eval, const LearnerConfig& cfg, std::string policy)
      : inst_(inst), eval_(eval), cfg_(cfg), policy_(std::move(policy)) {}

  RegretRecord& add(std::int64_t t, const RoundSlot& slot, const std::vector<NodeId>& seeds, double reward) {
    RegretRecord r;
    r.round = t;
    r.epoch = slot.epoch;
    r.phase = slot.phase;
    r.policy = policy_;
    r.seed_set = seeds;
    r.reward = reward;
    cumulative_ += reward;
    r.cumulative_reward = cumulative_;
    r.policy_value = eval_.value(seeds);
    r.alpha = cfg_.alpha;
    r.gamma = cfg_.gamma;
    r.f_star = eval_.f_star();
    r.f_star_method = eval_.method();
    r.scaled_regret = compute_scaled_regret(r.f_star, r.policy_value, r.alpha, r.gamma);
    r.theta_error = kNaN;
    r.beta_error = kNaN;
    records.push_back(std::move(r));
    return records.back();
  }

  std::vector<RegretRecord> records;

 private:
  const Instance& inst_;
  const RegretEvaluator& eval_;
  const LearnerConfig& cfg_;
  std::string policy_;
  double cumulative_ = 0.0;
};

std::vector<NodeId> oracle_seeds(const DirectedGraph& graph, const DerivedWeights& w, const LearnerConfig& cfg,
                                 Rng rng) {
  GreedyOptions opt;
  opt.n_samples = cfg.oracle_samples;
  return greedy_oracle(graph, w, cfg.K, opt, rng).seed_set;
}

std::uint64_t cascade_stream(std::int64_t t) { return static_cast<std::uint64_t>(t) * 2; }
std::uint64_t oracle_stream(std::int64_t t) { return static_cast<std::uint64_t>(t) * 2 + 1; }

LearningRun run_learner(const Instance& inst, const LearnerConfig& cfg, std::int64_t T,
                        const RegretEvaluator& eval, Rng& rng, bool autonomy) {
  const DirectedGraph& g = inst.graph;
  if (autonomy) {
    if (inst.model != Model::Ltn) throw std::invalid_argument("run_algorithm2 needs an ltn instance");
  } else if (inst.model != Model::Lt) {
    throw std::invalid_argument("run_algorithm1 needs a classical lt instance");
  }
  if (!autonomy && !cfg.exploration_nodes.empty())
    throw std::invalid_argument("run_algorithm1 takes no exploration nodes");
  cfg.validate(g, autonomy);
  const int d_e = static_cast<int>(cfg.exploration_edges.size());
  const int d_n = autonomy ? static_cast<int>(cfg.exploration_nodes.size()) : 0;
  const EpochSchedule schedule(d_e, d_n, cfg.q);
  const int d = g.edge_feature_dim();
  const int dp = autonomy ? g.autonomy_dim() : 0;

  LearningRun run;
  RidgeState& st = run.state;
  st.edge = RidgeAccumulator(d);
  st.autonomy = RidgeAccumulator(dp);
  st.theta_hat = Eigen::VectorXd::Zero(d);
  st.beta_hat = Eigen::VectorXd::Zero(dp);

  std::vector<std::vector<NodeId>> edge_seeds;
  for (EdgeId e : cfg.exploration_edges) {
    std::vector<NodeId> s{g.edge(e).head};
    for (NodeId c : coseed_nodes(g, g.edge(e).head, g.edge(e).tail, cfg.exploration_coseed)) s.push_back(c);
    edge_seeds.push_back(std::move(s));
  }
  std::vector<std::vector<NodeId>> node_seeds;
  if (autonomy)
    for (NodeId v : cfg.exploration_nodes) node_seeds.push_back(autonomy_exploration_seeds(g, v, cfg.K));

  const std::string name = "grd_explr_q=" + std::to_string(cfg.q);
  RoundLog log(inst, eval, cfg, name);
  CascadeSimulator sim(g, inst.weights);
  std::vector<NodeId> exploit_set;
  bool exploit_valid = false;

  auto refresh = [&](int epoch, std::int64_t t) {
    st.theta_hat = st.edge.solve();
    if (autonomy) st.beta_hat = st.autonomy.solve();
    exploit_valid = false;
    EpochSnapshot s;
    s.epoch = epoch;
    s.round = t;
    s.theta = st.theta_hat;
    s.beta = st.beta_hat;
    s.lambda_min_M = st.edge.min_eigenvalue();
    s.lambda_min_V = autonomy ? st.autonomy.min_eigenvalue() : kNaN;
    s.residual_M = st.edge.residual(st.theta_hat);
    s.residual_V = autonomy ? st.autonomy.residual(st.beta_hat) : 0.0;
    s.norm_r = st.edge.target().norm();
    s.norm_s = autonomy ? st.autonomy.target().norm() : 0.0;
    s.c_k = confidence_radius(d, epoch, cfg.q, cfg.D);
    s.kappa_k = autonomy ? confidence_radius(dp, epoch, cfg.q, cfg.D_prime) : kNaN;
    s.observations_M = st.edge.observations();
    s.observations_V = st.autonomy.observations();
    run.history.push_back(std::move(s));
  };

  for (std::int64_t t = 1; t <= T; ++t) {
    const RoundSlot slot = schedule.slot(t);
    std::vector<NodeId> seeds;
    if (slot.phase == Phase::ExploreEdge) {
      seeds = edge_seeds[static_cast<std::size_t>(slot.index)];
    } else if (slot.phase == Phase::ExploreNode) {
      seeds = node_seeds[static_cast<std::size_t>(slot.index)];
    } else {
      if (!exploit_valid) {
        exploit_set = oracle_seeds(g, estimated_weights(g, st.theta_hat, st.beta_hat), cfg, rng.child(oracle_stream(t)));
        exploit_valid = true;
      }
      seeds = exploit_set;
    }
    Rng cascade_rng = rng.child(cascade_stream(t));
    sim.run(inst.model, seeds, cascade_rng);
    const DiffusionTrace trace = sim.trace();
    std::vector<RoundObservation> obs;
    if (slot.phase == Phase::ExploreEdge) {
      const EdgeId e = cfg.exploration_edges[static_cast<std::size_t>(slot.index)];
      obs = extract_feedback(g, trace);
      RoundObservation tail = extract_exploration_edge_feedback(g, trace, e);
      auto it = std::find_if(obs.begin(), obs.end(), [&](const RoundObservation& o) { return o.node == tail.node; });
      if (it != obs.end()) *it = std::move(tail);
      else obs.push_back(std::move(tail));
      for (const auto& o : obs) st.edge.add(o.aggregated_feature, o.activation_label);
    } else if (slot.phase == Phase::ExploreNode) {
      const NodeId v = cfg.exploration_nodes[static_cast<std::size_t>(slot.index)];
      if (trace.activation_step[v] == 2) {
        const double y_plus = trace.sign[v] > 0 ? 1.0 : 0.0;
        st.autonomy.add(g.autonomy_neg().col(v), 1.0 - y_plus);
      }
      if (cfg.observer) obs = extract_feedback(g, trace);
    } else {
      if (cfg.use_exploitation_feedback || cfg.observer) obs = extract_feedback(g, trace);
      if (cfg.use_exploitation_feedback)
        for (const auto& o : obs) st.edge.add(o.aggregated_feature, o.activation_label);
    }
    if (cfg.observer) cfg.observer(t, obs);

    const bool last_edge = slot.phase == Phase::ExploreEdge && slot.index == d_e - 1;
    const bool last_node = slot.phase == Phase::ExploreNode && slot.index == d_n - 1;
    if ((last_edge && d_n == 0) || last_node) refresh(slot.epoch, t);
    else if (last_edge) st.theta_hat = st.edge.solve();  // beta follows after the node rounds

    RegretRecord& rec = log.add(t, slot, seeds, static_cast<double>(sim.positive_count()));
    rec.theta_error = (st.theta_hat - inst.truth.theta).norm();
    if (autonomy) rec.beta_error = (st.beta_hat - inst.truth.beta).norm();
  }
  run.records = std::move(log.records);
  return run;
}

}  // namespace

LearningRun run_algorithm1(const Instance& instance, const LearnerConfig& config, std::int64_t T,
                           const RegretEvaluator& evaluator, Rng& rng) {
  return run_learner(instance, config, T, evaluator, rng, false);
}

LearningRun run_algorithm2(const Instance& instance, const LearnerConfig& config, std::int64_t T,
                           const RegretEvaluator& evaluator, Rng& rng) {
  return run_learner(instance, config, T, evaluator, rng, true);
}

LearningRun run_baseline(const Instance& inst, Baseline policy, const LearnerConfig& cfg, std::int64_t T,
                         const RegretEvaluator& eval, Rng& rng) {
  const DirectedGraph& g = inst.graph;
  if (cfg.K < 1 || cfg.K > g.node_count()) throw std::invalid_argument("K must lie in [1, |V|]");
  LearningRun run;
  RoundLog log(inst, eval, cfg, baseline_name(policy));
  CascadeSimulator sim(g, inst.weights);
  const RoundSlot slot{0, Phase::Exploit, 0};
  std::vector<NodeId> fixed;
  if (policy == Baseline::MaxDegree) fixed = top_out_degree(g, cfg.K);
  if (policy == Baseline::KnownWeights) fixed = oracle_seeds(g, inst.weights, cfg, rng.child(oracle_stream(0)));
  RidgeAccumulator split;
  Eigen::VectorXd theta;
  if (policy == Baseline::SplitAttribution) {
    if (!g.has_edge_features()) throw std::invalid_argument("split attribution needs edge features");
    split = RidgeAccumulator(g.edge_feature_dim());
    theta = Eigen::VectorXd::Zero(g.edge_feature_dim());
  }
  std::vector<NodeId> pool(g.node_count());
  for (std::int64_t t = 1; t <= T; ++t) {
    std::vector<NodeId> seeds;
    switch (policy) {
      case Baseline::Random: {
        Rng pick = rng.child(oracle_stream(t));
        std::iota(pool.begin(), pool.end(), 0);
        for (std::size_t i = 0; i < cfg.K; ++i) {
          const std::size_t j = i + static_cast<std::size_t>(pick.below(pool.size() - i));
          std::swap(pool[i], pool[j]);
          seeds.push_back(pool[i]);
        }
        break;
      }
      case Baseline::MaxDegree:
      case Baseline::KnownWeights: seeds = fixed; break;
      case Baseline::SplitAttribution:
        seeds = oracle_seeds(g, estimated_weights(g, theta, {}), cfg, rng.child(oracle_stream(t)));
        break;
    }
    Rng cascade_rng = rng.child(cascade_stream(t));
    sim.run(inst.model, seeds, cascade_rng);
    std::vector<RoundObservation> obs;
    if (policy == Baseline::SplitAttribution || cfg.observer) obs = extract_feedback(g, sim.trace());
    if (policy == Baseline::SplitAttribution) {
      for (const auto& o : obs) {
        const double share = static_cast<double>(o.activation_label) / static_cast<double>(o.relevant_edges.size());
        for (EdgeId e : o.relevant_edges) split.add(g.edge_features().col(e), share);
      }
      theta = split.solve();
    }
    if (cfg.observer) cfg.observer(t, obs);
    RegretRecord& rec = log.add(t, slot, seeds, static_cast<double>(sim.positive_count()));
    if (policy == Baseline::SplitAttribution) rec.theta_error = (theta - inst.truth.theta).norm();
  }
  run.records = std::move(log.records);
  if (policy == Baseline::SplitAttribution) {
    run.state.edge = split;
    run.state.theta_hat = theta;
  }
  return run;
}

}  // namespace ltn
