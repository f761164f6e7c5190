#include "ltn/experiment.hpp"

#include "ltn/influence.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ltn {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw std::invalid_argument("unknown key '" + k + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int policy_q(const std::string& name) {
  const std::string prefix = "grd_explr_q=";
  if (name.rfind(prefix, 0) != 0) return 0;
  const std::string rest = name.substr(prefix.size());
  int q = 0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), q);
  if (ec != std::errc() || ptr != rest.data() + rest.size() || q < 1) return 0;
  return q;
}

std::string file_stem(const std::string& policy) {
  std::string s;
  for (char c : policy)
    if (c != '=') s += c;
  return s;
}

}  // namespace

bool is_known_policy(const std::string& name) {
  if (policy_q(name) > 0) return true;
  return name == "bgg_dgr" || name == "rdm" || name == "grd_kw" || name == "grd_splt";
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  check_keys(j, {"graph", "features", "model", "policies", "K", "epochs", "horizon_q", "horizon", "repetitions",
                 "oracle_samples", "evaluation", "use_exploitation_feedback", "exploration_coseed", "seed",
                 "threads", "simulate", "greedy_samples", "dump_observations"},
             "config");
  ExperimentConfig c;
  if (j.contains("graph")) {
    const json& g = j.at("graph");
    check_keys(g, {"source", "nodes", "edges", "exponent", "seed", "path", "edge_features", "autonomy_pos",
                   "autonomy_neg", "params", "fixture", "generate_features"},
               "graph");
    read(g, "source", c.graph.kind);
    read(g, "nodes", c.graph.random.nodes);
    read(g, "edges", c.graph.random.edges);
    read(g, "exponent", c.graph.random.exponent);
    read(g, "seed", c.graph.seed);
    read(g, "path", c.graph.path);
    read(g, "edge_features", c.graph.edge_features);
    read(g, "autonomy_pos", c.graph.autonomy_pos);
    read(g, "autonomy_neg", c.graph.autonomy_neg);
    read(g, "params", c.graph.params);
    read(g, "fixture", c.graph.fixture);
    read(g, "generate_features", c.graph.generate_features);
  }
  if (j.contains("features")) {
    const json& f = j.at("features");
    check_keys(f, {"d", "d_prime", "seed", "target_in_sum", "perturbation", "high_degree_count",
                   "high_degree_scale", "max_belief"},
               "features");
    read(f, "d", c.features.d);
    read(f, "d_prime", c.features.d_prime);
    read(f, "seed", c.feature_seed);
    read(f, "target_in_sum", c.features.target_in_sum);
    read(f, "perturbation", c.features.perturbation);
    read(f, "high_degree_count", c.features.high_degree_count);
    read(f, "high_degree_scale", c.features.high_degree_scale);
    read(f, "max_belief", c.features.max_belief);
  }
  if (j.contains("model")) c.model = parse_model(j.at("model").get<std::string>());
  read(j, "policies", c.policies);
  read(j, "K", c.K);
  read(j, "epochs", c.epochs);
  read(j, "horizon_q", c.horizon_q);
  read(j, "horizon", c.horizon);
  read(j, "repetitions", c.repetitions);
  read(j, "oracle_samples", c.oracle_samples);
  if (j.contains("evaluation")) {
    const json& e = j.at("evaluation");
    check_keys(e, {"eval_worlds", "fstar_worlds", "fstar_samples", "brute_force_budget", "exact_budget"},
               "evaluation");
    read(e, "eval_worlds", c.evaluation.eval_worlds);
    read(e, "fstar_worlds", c.evaluation.fstar_worlds);
    read(e, "fstar_samples", c.evaluation.fstar_samples);
    read(e, "brute_force_budget", c.evaluation.brute_force_budget);
    read(e, "exact_budget", c.evaluation.exact_budget);
  }
  read(j, "use_exploitation_feedback", c.use_exploitation_feedback);
  if (j.contains("exploration_coseed")) {
    const json& cs = j.at("exploration_coseed");
    if (cs.is_string() && cs.get<std::string>() == "none") c.exploration_coseed = 0;
    else if (cs.is_object() && cs.size() == 1 && cs.contains("max_degree"))
      c.exploration_coseed = cs.at("max_degree").get<std::size_t>();
    else throw std::invalid_argument("exploration_coseed must be \"none\" or {\"max_degree\": m}");
  }
  read(j, "seed", c.seed);
  read(j, "threads", c.threads);
  if (j.contains("simulate")) {
    const json& s = j.at("simulate");
    check_keys(s, {"seeds", "runs", "dump_traces", "model"}, "simulate");
    read(s, "seeds", c.seeds);
    read(s, "runs", c.runs);
    read(s, "dump_traces", c.dump_traces);
    if (s.contains("model")) c.simulate_model = parse_model(s.at("model").get<std::string>());
  }
  read(j, "greedy_samples", c.greedy_samples);
  read(j, "dump_observations", c.dump_observations);
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  json g = {{"source", graph.kind}, {"seed", graph.seed}};
  if (graph.kind == "synthetic") {
    g["nodes"] = graph.random.nodes;
    g["edges"] = graph.random.edges;
    g["exponent"] = graph.random.exponent;
  } else if (graph.kind == "fixture") {
    g["fixture"] = graph.fixture;
  } else {
    g["path"] = graph.path;
    g["edge_features"] = graph.edge_features;
    g["autonomy_pos"] = graph.autonomy_pos;
    g["autonomy_neg"] = graph.autonomy_neg;
    g["params"] = graph.params;
    g["generate_features"] = graph.generate_features;
  }
  return {{"graph", g},
          {"features",
           {{"d", features.d},
            {"d_prime", features.d_prime},
            {"seed", feature_seed},
            {"target_in_sum", features.target_in_sum},
            {"perturbation", features.perturbation},
            {"high_degree_count", features.high_degree_count},
            {"high_degree_scale", features.high_degree_scale},
            {"max_belief", features.max_belief}}},
          {"model", model_name(model)},
          {"policies", policies},
          {"K", K},
          {"epochs", epochs},
          {"horizon_q", horizon_q},
          {"horizon", horizon},
          {"repetitions", repetitions},
          {"oracle_samples", oracle_samples},
          {"evaluation",
           {{"eval_worlds", evaluation.eval_worlds},
            {"fstar_worlds", evaluation.fstar_worlds},
            {"fstar_samples", evaluation.fstar_samples},
            {"brute_force_budget", evaluation.brute_force_budget},
            {"exact_budget", evaluation.exact_budget}}},
          {"use_exploitation_feedback", use_exploitation_feedback},
          {"exploration_coseed", exploration_coseed == 0 ? json("none") : json{{"max_degree", exploration_coseed}}},
          {"seed", seed},
          {"simulate",
           {{"seeds", seeds}, {"runs", runs}, {"dump_traces", dump_traces}, {"model", model_name(simulate_model)}}},
          {"greedy_samples", greedy_samples},
          {"dump_observations", dump_observations}};
}

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (policies.empty()) throw std::invalid_argument("at least one policy is required");
  for (const auto& p : policies)
    if (!is_known_policy(p)) throw std::invalid_argument("unknown policy '" + p + "'");
  if (graph.kind != "synthetic" && graph.kind != "edge_list" && graph.kind != "fixture")
    throw std::invalid_argument("graph.source must be synthetic, edge_list or fixture");
  if (model == Model::Tsn) throw std::invalid_argument("model must be lt or ltn");
  if (features.d < 1) throw std::invalid_argument("features.d must be >= 1");
  if (model == Model::Ltn && graph.kind == "synthetic" && features.d_prime < 1)
    throw std::invalid_argument("ltn model needs features.d_prime >= 1");
  if (epochs < 1 && horizon <= 0) throw std::invalid_argument("epochs must be >= 1");
  if (horizon_q < 1) throw std::invalid_argument("horizon_q must be >= 1");
  if (oracle_samples < 1) throw std::invalid_argument("oracle_samples must be >= 1");
  if (runs < 1) throw std::invalid_argument("simulate.runs must be >= 1");
}

std::int64_t ExperimentConfig::resolved_horizon(int d_prime) const {
  if (horizon > 0) return horizon;
  return EpochSchedule(features.d, d_prime, horizon_q).epoch_end(epochs);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  ExperimentConfig c;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config " + path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(path + ": " + e.what());
    }
    c = ExperimentConfig::from_json(j);
  }
  if (const char* env = std::getenv("LTN_THREADS")) {
    std::size_t t = 0;
    const std::string s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), t);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw std::invalid_argument("LTN_THREADS must be an integer");
    c.threads = t;
  }
  return c;
}

namespace {

Instance fixture_instance(const std::string& name, Model model) {
  if (name == "two_node") {
    DirectedGraph g(2, {{0, 1}});
    Eigen::MatrixXd x(1, 1);
    x << 0.5;
    g.set_edge_features(x);
    Eigen::MatrixXd pos = Eigen::MatrixXd::Zero(2, 2), neg = Eigen::MatrixXd::Zero(2, 2);
    pos(0, 1) = 0.2;
    neg(1, 1) = 0.3;
    g.set_autonomy_features(pos, neg);
    ModelParams p;
    p.theta = Eigen::VectorXd::Ones(1);
    p.beta = Eigen::VectorXd::Ones(2);
    p.norm_bound_theta = 1.0;
    p.norm_bound_beta = std::sqrt(2.0);
    p.ground_truth = true;
    return make_instance(std::move(g), std::move(p), model);
  }
  if (name == "star") {
    std::vector<Edge> edges;
    for (NodeId leaf = 1; leaf <= 6; ++leaf) edges.push_back({0, leaf});
    DirectedGraph g(7, edges);
    g.set_edge_features(Eigen::MatrixXd::Constant(1, 6, 0.9));
    Eigen::MatrixXd pos = Eigen::MatrixXd::Ones(1, 7);
    pos(0, 0) = 0.0;
    g.set_autonomy_features(pos, Eigen::MatrixXd::Zero(1, 7));
    ModelParams p;
    p.theta = Eigen::VectorXd::Ones(1);
    p.beta = Eigen::VectorXd::Ones(1);
    p.norm_bound_theta = 1.0;
    p.norm_bound_beta = 1.0;
    p.ground_truth = true;
    return make_instance(std::move(g), std::move(p), model);
  }
  throw std::invalid_argument("unknown fixture '" + name + "'");
}

}  // namespace

Instance build_instance(const ExperimentConfig& config) {
  const GraphSource& src = config.graph;
  if (src.kind == "fixture") return fixture_instance(src.fixture, config.model);
  DirectedGraph graph;
  if (src.kind == "synthetic") {
    Rng rng(src.seed);
    graph = generate_random_graph(src.random, rng);
  } else {
    if (src.path.empty()) throw std::invalid_argument("graph.path is required for edge_list sources");
    graph = load_graph(src.path);
  }
  if (src.kind == "synthetic" || src.generate_features) {
    FeatureSpec spec = config.features;
    const SyntheticFeatures f = generate_synthetic_features(graph, spec, config.feature_seed);
    attach_features(graph, f);
    return make_instance(std::move(graph), f.truth, config.model);
  }
  if (src.edge_features.empty() || src.params.empty())
    throw std::invalid_argument("edge_list source needs edge_features and params (or generate_features)");
  graph.set_edge_features(load_feature_matrix(src.edge_features, graph.edge_count()));
  if (!src.autonomy_pos.empty() || !src.autonomy_neg.empty()) {
    if (src.autonomy_pos.empty() || src.autonomy_neg.empty())
      throw std::invalid_argument("autonomy_pos and autonomy_neg must be given together");
    graph.set_autonomy_features(load_feature_matrix(src.autonomy_pos, graph.node_count()),
                                load_feature_matrix(src.autonomy_neg, graph.node_count()));
  }
  ModelParams truth = load_params(src.params);
  truth.ground_truth = true;
  return make_instance(std::move(graph), std::move(truth), config.model);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Instance& instance,
                                const ObservationSink& sink) {
  config.validate();
  const bool autonomy = instance.model == Model::Ltn;
  const DirectedGraph& g = instance.graph;
  ExperimentResult result;
  result.exploration = select_exploration_sets(g, g.edge_feature_dim(), autonomy ? g.autonomy_dim() : 0);
  result.horizon = config.horizon > 0
                       ? config.horizon
                       : EpochSchedule(static_cast<int>(result.exploration.edges.size()),
                                       static_cast<int>(result.exploration.nodes.size()), config.horizon_q)
                             .epoch_end(config.epochs);

  EvaluatorSettings es = config.evaluation;
  es.K = config.K;
  Rng eval_rng(derive_seed(config.seed, fnv1a("evaluator")));
  const RegretEvaluator evaluator(instance, es, eval_rng);
  result.f_star = evaluator.f_star();
  result.f_star_method = evaluator.method();

  for (const auto& p : config.policies)
    for (std::size_t r = 0; r < config.repetitions; ++r) result.runs.push_back({p, r, {}});

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(result.runs.size());
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= result.runs.size()) return;
      PolicyRun& job = result.runs[i];
      try {
        Rng rng(derive_seed(derive_seed(config.seed, fnv1a(job.policy)), job.repetition));
        LearnerConfig lc;
        lc.K = config.K;
        lc.exploration_edges = result.exploration.edges;
        lc.exploration_nodes = result.exploration.nodes;
        lc.D = instance.truth.norm_bound_theta;
        lc.D_prime = instance.truth.norm_bound_beta;
        lc.use_exploitation_feedback = config.use_exploitation_feedback;
        lc.exploration_coseed = config.exploration_coseed;
        lc.oracle_samples = config.oracle_samples;
        if (sink)
          lc.observer = [&sink, &job](std::int64_t t, const std::vector<RoundObservation>& obs) {
            sink(job.policy, job.repetition, t, obs);
          };
        if (const int q = policy_q(job.policy); q > 0) {
          lc.q = q;
          job.run = autonomy ? run_algorithm2(instance, lc, result.horizon, evaluator, rng)
                             : run_algorithm1(instance, lc, result.horizon, evaluator, rng);
        } else {
          job.run = run_baseline(instance, parse_baseline(job.policy), lc, result.horizon, evaluator, rng);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, result.runs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return result;
}

void write_records_csv(std::ostream& out, const std::vector<RegretRecord>& records) {
  out << "round,epoch,phase,policy,reward,cumulative_reward,scaled_regret,theta_error,beta_error\n";
  for (const auto& r : records)
    out << r.round << ',' << r.epoch << ',' << phase_name(r.phase) << ',' << r.policy << ','
        << format_double(r.reward) << ',' << format_double(r.cumulative_reward) << ','
        << format_double(r.scaled_regret) << ',' << format_double(r.theta_error) << ','
        << format_double(r.beta_error) << '\n';
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

// Mean over repetitions, NaN when every value is NaN.
double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double x : xs)
    if (!std::isnan(x)) {
      sum += x;
      ++count;
    }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void write_experiment_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> policies;
  for (const auto& run : result.runs) {
    if (std::find(policies.begin(), policies.end(), run.policy) == policies.end()) policies.push_back(run.policy);
    auto out = open_out(out_dir / (file_stem(run.policy) + "_rep" + std::to_string(run.repetition) + ".csv"));
    write_records_csv(out, run.run.records);
  }

  auto runs_of = [&](const std::string& p) {
    std::vector<const LearningRun*> rs;
    for (const auto& run : result.runs)
      if (run.policy == p) rs.push_back(&run.run);
    return rs;
  };
  const auto T = static_cast<std::size_t>(result.horizon);
  std::vector<std::vector<double>> cum(policies.size()), theta(policies.size());
  {
    auto out = open_out(out_dir / "aggregate.csv");
    out << "round,epoch,phase,policy,reward,cumulative_reward,scaled_regret,theta_error,beta_error\n";
    for (std::size_t pi = 0; pi < policies.size(); ++pi) {
      const auto rs = runs_of(policies[pi]);
      for (std::size_t t = 0; t < T; ++t) {
        std::vector<double> reward, c, regret, te, be;
        for (const LearningRun* r : rs) {
          const RegretRecord& rec = r->records[t];
          reward.push_back(rec.reward);
          c.push_back(rec.cumulative_reward);
          regret.push_back(rec.scaled_regret);
          te.push_back(rec.theta_error);
          be.push_back(rec.beta_error);
        }
        const RegretRecord& first = rs.front()->records[t];
        const double cm = mean_of(c), tm = mean_of(te);
        cum[pi].push_back(cm);
        theta[pi].push_back(tm);
        out << first.round << ',' << first.epoch << ',' << phase_name(first.phase) << ',' << policies[pi] << ','
            << format_double(mean_of(reward)) << ',' << format_double(cm) << ','
            << format_double(mean_of(regret)) << ',' << format_double(tm) << ',' << format_double(mean_of(be))
            << '\n';
      }
    }
  }
  {
    auto out = open_out(out_dir / "plot_cumulative_reward.csv");
    out << "round";
    for (const auto& p : policies) out << ',' << p;
    out << '\n';
    for (std::size_t t = 0; t < T; ++t) {
      out << t + 1;
      for (std::size_t pi = 0; pi < policies.size(); ++pi) out << ',' << format_double(cum[pi][t]);
      out << '\n';
    }
  }
  {
    std::vector<std::size_t> with_theta;
    for (std::size_t pi = 0; pi < policies.size(); ++pi)
      if (!theta[pi].empty() && !std::isnan(theta[pi].front())) with_theta.push_back(pi);
    auto out = open_out(out_dir / "plot_theta_error.csv");
    out << "round";
    for (std::size_t pi : with_theta) out << ',' << policies[pi];
    out << '\n';
    for (std::size_t t = 0; t < T; ++t) {
      out << t + 1;
      for (std::size_t pi : with_theta) out << ',' << format_double(theta[pi][t]);
      out << '\n';
    }
  }
  json summary;
  summary["config"] = config.to_json();
  summary["horizon"] = result.horizon;
  summary["f_star"] = result.f_star;
  summary["f_star_method"] = fstar_method_name(result.f_star_method);
  summary["exploration_edges"] = result.exploration.edges;
  summary["exploration_nodes"] = result.exploration.nodes;
  summary["lambda_min_edge"] = result.exploration.lambda_edge;
  summary["lambda_min_node"] = result.exploration.lambda_node;
  json pol = json::object();
  for (const auto& p : policies) {
    json entry;
    std::vector<double> final_reward, avg_regret, final_theta;
    for (const LearningRun* r : runs_of(p)) {
      final_reward.push_back(r->records.back().cumulative_reward);
      double s = 0.0;
      for (const auto& rec : r->records) s += rec.scaled_regret;
      avg_regret.push_back(s / static_cast<double>(r->records.size()));
      final_theta.push_back(r->records.back().theta_error);
    }
    entry["cumulative_reward"] = final_reward;
    entry["mean_cumulative_reward"] = mean_of(final_reward);
    entry["average_scaled_regret"] = avg_regret;
    entry["mean_average_scaled_regret"] = mean_of(avg_regret);
    const double ft = mean_of(final_theta);
    entry["mean_final_theta_error"] = std::isnan(ft) ? json(nullptr) : json(ft);
    pol[p] = entry;
  }
  summary["policies"] = pol;
  auto out = open_out(out_dir / "summary.json");
  out << summary.dump(2) << '\n';
}

json simulate(const ExperimentConfig& config, const Instance& instance, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  CascadeSimulator sim(instance.graph, instance.weights);
  Rng root(derive_seed(config.seed, fnv1a("simulate")));
  std::ofstream traces;
  if (config.dump_traces) traces = open_out(out_dir / "traces.jsonl");
  double pos = 0.0, pos_sq = 0.0, act = 0.0, steps = 0.0;
  for (std::size_t i = 0; i < config.runs; ++i) {
    Rng rng = root.child(i);
    sim.run(config.simulate_model, config.seeds, rng);
    const double p = static_cast<double>(sim.positive_count());
    pos += p;
    pos_sq += p * p;
    act += static_cast<double>(sim.active_count());
    steps += sim.last_step();
    if (config.dump_traces) write_trace_jsonl(traces, sim.trace(), i);
  }
  const double N = static_cast<double>(config.runs);
  const double mean = pos / N;
  const double se = config.runs > 1 ? std::sqrt(std::max(0.0, (pos_sq - N * mean * mean) / (N - 1.0)) / N) : 0.0;
  json summary = {{"runs", config.runs},
                  {"model", model_name(config.simulate_model)},
                  {"seeds", config.seeds},
                  {"mean_positive", mean},
                  {"std_error_positive", se},
                  {"mean_active", act / N},
                  {"mean_last_step", steps / N}};
  auto out = open_out(out_dir / "summary.json");
  out << summary.dump(2) << '\n';
  return summary;
}

json greedy_report(const ExperimentConfig& config, const Instance& instance) {
  Rng rng(derive_seed(config.seed, fnv1a("greedy")));
  GreedyOptions opt;
  opt.n_samples = config.greedy_samples;
  const OracleResult res = greedy_oracle(instance.graph, instance.weights, config.K, opt, rng);
  return {{"seed_set", res.seed_set},
          {"value", res.value_estimate.mean},
          {"std_error", res.value_estimate.std_error},
          {"n_samples", res.value_estimate.n_samples},
          {"alpha", res.alpha},
          {"gamma", res.gamma}};
}

}  // namespace ltn
