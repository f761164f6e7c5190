#include "ltn/verification.hpp"

#include "ltn/diffusion.hpp"
#include "ltn/influence.hpp"
#include "ltn/learning.hpp"
#include "ltn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ltn {

using nlohmann::json;

WeightedGraph random_weighted_graph(std::size_t n, double mean_in_degree, bool autonomy, Rng& rng) {
  std::vector<Edge> edges;
  const double p = n > 1 ? std::min(1.0, mean_in_degree / static_cast<double>(n - 1)) : 0.0;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = 0; v < n; ++v)
      if (u != v && rng.uniform() < p) edges.push_back({u, v});
  WeightedGraph out{DirectedGraph(n, edges), {}};
  std::vector<double> w(edges.size(), 0.0);
  for (NodeId v = 0; v < n; ++v) {
    const auto in = out.graph.in_edges(v);
    if (in.empty()) continue;
    double raw_sum = 0.0;
    for (EdgeId e : in) raw_sum += (w[e] = 0.05 + rng.uniform());
    const double total = 0.3 + 0.7 * rng.uniform();
    for (EdgeId e : in) w[e] *= total / raw_sum;
  }
  std::vector<double> qp, qn;
  if (autonomy)
    for (NodeId v = 0; v < n; ++v) {
      qp.push_back(0.5 * rng.uniform());
      qn.push_back(0.5 * rng.uniform());
    }
  out.weights = make_weights(std::move(w), std::move(qp), std::move(qn));
  validate_weights(out.graph, out.weights);
  return out;
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

json VerifyReport::to_json() const {
  json arr = json::array();
  for (const auto& c : checks) arr.push_back({{"name", c.name}, {"passed", c.passed}, {"seed", c.seed}, {"stats", c.stats}});
  return {{"suite", suite}, {"passed", passed()}, {"checks", arr}};
}

SubmodularityCount count_submodularity_violations(const DirectedGraph& graph, const DerivedWeights& weights,
                                                  double tolerance) {
  const std::size_t n = graph.node_count();
  if (n > 20) throw std::invalid_argument("exhaustive check needs a small graph");
  const std::uint32_t full = (1u << n) - 1;
  std::vector<double> f(full + 1);
  std::vector<NodeId> set;
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    set.clear();
    for (NodeId v = 0; v < n; ++v)
      if (mask >> v & 1u) set.push_back(v);
    f[mask] = exact_positive_influence(graph, weights, set);
  }
  SubmodularityCount c;
  for (std::uint32_t T = 0; T <= full; ++T) {
    // Every submask S of T, including T itself.
    for (std::uint32_t S = T;; S = (S - 1) & T) {
      if (f[S] > f[T] + tolerance) {
        ++c.monotonicity_violations;
        c.worst_gap = std::max(c.worst_gap, f[S] - f[T]);
      }
      for (NodeId v = 0; v < n; ++v) {
        if (T >> v & 1u) continue;
        ++c.triples;
        const double gs = f[S | (1u << v)] - f[S];
        const double gt = f[T | (1u << v)] - f[T];
        if (gt > gs + tolerance) {
          ++c.submodularity_violations;
          c.worst_gap = std::max(c.worst_gap, gt - gs);
        }
      }
      if (S == 0) break;
    }
  }
  return c;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double sp = 0.0, sq = 0.0;
  for (double x : p) sp += x;
  for (double x : q) sq += x;
  if (sp <= 0.0 || sq <= 0.0) throw std::invalid_argument("empty histogram");
  const std::size_t len = std::max(p.size(), q.size());
  double tv = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double a = i < p.size() ? p[i] / sp : 0.0;
    const double b = i < q.size() ? q[i] / sq : 0.0;
    tv += std::abs(a - b);
  }
  return 0.5 * tv;
}

VerifyReport verify_submodularity(std::size_t instances, std::size_t max_nodes, std::uint64_t seed) {
  VerifyReport report{"submodularity", {}};
  for (std::size_t i = 0; i < instances; ++i) {
    const std::uint64_t s = derive_seed(seed, i);
    Rng rng(s);
    const std::size_t n = std::max<std::size_t>(2, max_nodes - i % 3);
    const double degree = 1.0 + rng.uniform();
    const WeightedGraph wg = random_weighted_graph(n, degree, true, rng);
    const SubmodularityCount c = count_submodularity_violations(wg.graph, wg.weights);
    CheckResult r;
    r.name = "instance_" + std::to_string(i);
    r.seed = s;
    r.passed = c.monotonicity_violations == 0 && c.submodularity_violations == 0;
    r.stats = {{"nodes", n},
               {"edges", wg.graph.edge_count()},
               {"triples", c.triples},
               {"monotonicity_violations", c.monotonicity_violations},
               {"submodularity_violations", c.submodularity_violations},
               {"worst_gap", c.worst_gap}};
    report.checks.push_back(std::move(r));
  }
  return report;
}

namespace {

WeightedGraph two_node_fixture() {
  WeightedGraph wg{DirectedGraph(2, {{0, 1}}), {}};
  wg.weights = make_weights({0.5}, {0.0, 0.2}, {0.0, 0.3});
  return wg;
}

// Histograms of |A+| and of the pair (|A|, |A+|).
struct Histograms {
  std::vector<double> positive, joint;
  std::vector<double> active;
};

Histograms sample_histograms(const WeightedGraph& wg, Model model, const std::vector<NodeId>& seeds,
                             std::size_t samples, Rng& rng) {
  const std::size_t n = wg.graph.node_count();
  Histograms h;
  h.positive.assign(n + 1, 0.0);
  h.active.assign(n + 1, 0.0);
  h.joint.assign((n + 1) * (n + 1), 0.0);
  CascadeSimulator sim(wg.graph, wg.weights);
  for (std::size_t i = 0; i < samples; ++i) {
    sim.run(model, seeds, rng);
    h.positive[sim.positive_count()] += 1.0;
    h.active[sim.active_count()] += 1.0;
    h.joint[sim.active_count() * (n + 1) + sim.positive_count()] += 1.0;
  }
  return h;
}

}  // namespace

VerifyReport verify_equivalence(std::size_t fixtures, std::size_t samples, double tv_limit, std::uint64_t seed) {
  VerifyReport report{"equivalence", {}};
  for (std::size_t i = 0; i < fixtures; ++i) {
    const std::uint64_t s = derive_seed(seed, i);
    Rng rng(s);
    WeightedGraph wg;
    std::vector<NodeId> seeds;
    if (i == 0) {
      wg = two_node_fixture();
      seeds = {0};
    } else {
      const std::size_t n = 5 + i % 4;
      wg = random_weighted_graph(n, 1.5 + rng.uniform(), true, rng);
      seeds = {0};
      if (i % 2 == 0) seeds.push_back(static_cast<NodeId>(n - 1));
    }
    Rng a = rng.child(1), b = rng.child(2), c = rng.child(3);
    const Histograms ltn = sample_histograms(wg, Model::Ltn, seeds, samples, a);
    const Histograms tsn = sample_histograms(wg, Model::Tsn, seeds, samples, b);
    const Histograms lt = sample_histograms(wg, Model::Lt, seeds, samples, c);
    const double tv_pos = total_variation(ltn.positive, tsn.positive);
    const double tv_joint = total_variation(ltn.joint, tsn.joint);
    const double tv_active = total_variation(lt.active, ltn.active);
    CheckResult r;
    r.name = i == 0 ? "two_node" : "random_" + std::to_string(i);
    r.seed = s;
    r.passed = tv_pos < tv_limit && tv_joint < tv_limit && tv_active < tv_limit;
    r.stats = {{"nodes", wg.graph.node_count()}, {"edges", wg.graph.edge_count()}, {"samples", samples},
               {"tv_positive", tv_pos},          {"tv_joint", tv_joint},              {"tv_lt_vs_ltn_active", tv_active},
               {"limit", tv_limit}};
    report.checks.push_back(std::move(r));
  }
  return report;
}

VerifyReport verify_eigenvalue(int epochs, std::uint64_t seed) {
  VerifyReport report{"eigenvalue", {}};
  Rng rng(seed);
  RandomGraphSpec spec;
  spec.nodes = 60;
  spec.edges = 300;
  DirectedGraph g = generate_random_graph(spec, rng);
  const SyntheticFeatures f = generate_synthetic_features(g, 5, 0, derive_seed(seed, 1));
  attach_features(g, f);
  const Instance inst = make_instance(std::move(g), f.truth, Model::Lt);
  const ExplorationSets ex = select_exploration_sets(inst.graph, 5, 0);
  EvaluatorSettings es;
  es.K = 3;
  es.eval_worlds = 500;
  es.fstar_worlds = 500;
  es.fstar_samples = 2000;
  Rng eval_rng = rng.child(2);
  const RegretEvaluator eval(inst, es, eval_rng);
  LearnerConfig cfg;
  cfg.K = 3;
  cfg.exploration_edges = ex.edges;
  cfg.D = inst.truth.norm_bound_theta;
  cfg.oracle_samples = 200;
  const EpochSchedule schedule(5, 0, 1);
  Rng run_rng = rng.child(3);
  const LearningRun run = run_algorithm1(inst, cfg, schedule.epoch_end(epochs), eval, run_rng);
  for (const EpochSnapshot& s : run.history) {
    CheckResult r;
    r.name = "epoch_" + std::to_string(s.epoch);
    r.seed = seed;
    const double bound = 1.0 + s.epoch * ex.lambda_edge;
    const double rel = s.norm_r > 0 ? s.residual_M / s.norm_r : s.residual_M;
    r.passed = s.lambda_min_M >= bound - 1e-9 && s.residual_M <= 1e-8 * s.norm_r + 1e-300;
    r.stats = {{"lambda_min", s.lambda_min_M}, {"bound", bound}, {"lambda_min_edge", ex.lambda_edge},
               {"relative_residual", rel}};
    report.checks.push_back(std::move(r));
  }
  return report;
}

VerifyReport verify_greedy_ratio(std::size_t instances, std::uint64_t seed) {
  VerifyReport report{"greedy_ratio", {}};
  const double ratio = 1.0 - std::exp(-1.0);
  for (std::size_t i = 0; i < instances; ++i) {
    const std::uint64_t s = derive_seed(seed, i);
    Rng rng(s);
    const std::size_t n = 6 + i % 5;
    const WeightedGraph wg = random_weighted_graph(n, 1.0 + 0.5 * rng.uniform(), true, rng);
    const std::size_t K = 1 + i % 2;
    const SetEvaluator exact = [&](std::span<const NodeId> set) {
      return exact_positive_influence(wg.graph, wg.weights, set);
    };
    const OracleResult opt = brute_force_opt(n, K, exact);
    GreedyOptions go;
    go.exact = exact;
    go.optimum = opt.value_estimate.mean;
    Rng grng = rng.child(1);
    const OracleResult greedy = greedy_oracle(wg.graph, wg.weights, K, go, grng);
    CheckResult r;
    r.name = "instance_" + std::to_string(i);
    r.seed = s;
    r.passed = greedy.value_estimate.mean >= ratio * opt.value_estimate.mean - 1e-12;
    r.stats = {{"nodes", n},       {"K", K}, {"greedy", greedy.value_estimate.mean}, {"optimum", opt.value_estimate.mean},
               {"ratio", greedy.alpha}};
    report.checks.push_back(std::move(r));
  }
  return report;
}

VerifyReport run_verify_suite(const std::string& suite, std::uint64_t seed) {
  if (suite == "submodularity") return verify_submodularity(20, 6, seed);
  if (suite == "equivalence") return verify_equivalence(5, 100000, 0.02, seed);
  if (suite == "eigenvalue") return verify_eigenvalue(20, seed);
  if (suite == "greedy_ratio") return verify_greedy_ratio(20, seed);
  if (suite == "all") {
    VerifyReport all{"all", {}};
    for (const char* s : {"submodularity", "equivalence", "eigenvalue", "greedy_ratio"}) {
      VerifyReport r = run_verify_suite(s, seed);
      for (auto& c : r.checks) {
        c.name = std::string(s) + "/" + c.name;
        all.checks.push_back(std::move(c));
      }
    }
    return all;
  }
  throw std::invalid_argument("unknown verify suite '" + suite + "'");
}

}  // namespace ltn
