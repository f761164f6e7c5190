#include "doctest.h"

#include "ltn/influence.hpp"
#include "ltn/verification.hpp"

#include <cmath>
#include <algorithm>
#include <numeric>

using namespace ltn;

TEST_CASE("exact influence on closed-form fixtures") {
  DirectedGraph two(2, {{0, 1}});
  DerivedWeights w2 = make_weights({0.5}, {0.0, 0.2}, {0.0, 0.3});
  const std::vector<NodeId> s0{0}, s1{1}, both{0, 1}, none;
  CHECK(exact_positive_influence(two, w2, s0) == doctest::Approx(1.35));
  CHECK(exact_positive_influence(two, w2, s1) == doctest::Approx(1.0));
  CHECK(exact_positive_influence(two, w2, both) == doctest::Approx(2.0));
  CHECK(exact_positive_influence(two, w2, none) == doctest::Approx(0.0));

  DirectedGraph chain(3, {{0, 1}, {1, 2}});
  DerivedWeights wc = make_weights({0.6, 0.5});
  CHECK(exact_positive_influence(chain, wc, s0) == doctest::Approx(1.0 + 0.6 + 0.3));

  // node 2 with two parents: activation probability is the sum of weights
  DirectedGraph fan(3, {{0, 2}, {1, 2}});
  DerivedWeights wf = make_weights({0.3, 0.4});
  CHECK(exact_positive_influence(fan, wf, both) == doctest::Approx(2.7));
}

namespace {
// Independent oracle: enumerates parent choices and every sign correction.
double enumerate_all(const DirectedGraph& g, const DerivedWeights& w, const std::vector<NodeId>& seeds) {
  const std::size_t n = g.node_count();
  struct Opt {
    std::int32_t parent;
    std::int8_t corr;
    double p;
  };
  std::vector<std::vector<Opt>> opts(n);
  std::vector<std::uint8_t> is_seed(n, 0);
  for (NodeId s : seeds) is_seed[s] = 1;
  for (NodeId v = 0; v < n; ++v) {
    double sum = 0;
    for (EdgeId e : g.in_edges(v)) sum += w.edge_weight[e];
    opts[v].push_back({-1, 0, 1.0 - sum});
    for (EdgeId e : g.in_edges(v)) {
      const auto u = static_cast<std::int32_t>(g.edge(e).head);
      const double qn = w.has_autonomy() ? w.q_neg[v] : 0.0, qp = w.has_autonomy() ? w.q_pos[v] : 0.0;
      opts[v].push_back({u, -1, w.edge_weight[e] * qn});
      opts[v].push_back({u, 0, w.edge_weight[e] * (1 - qn - qp)});
      opts[v].push_back({u, 1, w.edge_weight[e] * qp});
    }
  }
  std::vector<std::size_t> idx(n, 0);
  std::vector<std::int32_t> parent(n), scratch;
  std::vector<std::int8_t> corr(n);
  std::vector<Sign> sign;
  double total = 0;
  while (true) {
    double p = 1;
    for (std::size_t v = 0; v < n; ++v) {
      parent[v] = opts[v][idx[v]].parent;
      corr[v] = opts[v][idx[v]].corr;
      p *= opts[v][idx[v]].p;
    }
    resolve_live_edge_signs(parent, corr, is_seed, sign, scratch);
    total += p * static_cast<double>(std::count(sign.begin(), sign.end(), Sign{1}));
    std::size_t v = 0;
    while (v < n && ++idx[v] == opts[v].size()) idx[v++] = 0;
    if (v == n) break;
  }
  return total;
}
}  // namespace

TEST_CASE("exact influence matches full enumeration of signs") {
  Rng gen(12);
  for (int i = 0; i < 12; ++i) {
    WeightedGraph wg = random_weighted_graph(4 + i % 3, 1.8, i % 4 != 0, gen);
    std::vector<NodeId> seeds{0};
    if (i % 2) seeds.push_back(static_cast<NodeId>(wg.graph.node_count() - 1));
    CHECK(exact_positive_influence(wg.graph, wg.weights, seeds) ==
          doctest::Approx(enumerate_all(wg.graph, wg.weights, seeds)).epsilon(1e-12));
  }
  // a cycle through a seed and one without
  DirectedGraph cyc(4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}, {1, 2}});
  DerivedWeights w = make_weights({0.5, 0.4, 0.3, 0.6, 0.2}, {0.1, 0.2, 0.3, 0.1}, {0.2, 0.1, 0.0, 0.4});
  const std::vector<NodeId> s{0};
  CHECK(exact_positive_influence(cyc, w, s) == doctest::Approx(enumerate_all(cyc, w, s)).epsilon(1e-12));
}

TEST_CASE("exact influence enforces its budget") {
  Rng gen(1);
  WeightedGraph wg = random_weighted_graph(8, 2.0, true, gen);
  const std::vector<NodeId> s{0};
  CHECK(live_edge_realization_count(wg.graph, wg.weights, s) <= full_realization_count(wg.graph, wg.weights));
  CHECK_THROWS_AS(exact_positive_influence(wg.graph, wg.weights, s, 1), std::length_error);
}

TEST_CASE("monte carlo estimates agree with exact values") {
  Rng gen(2);
  for (int i = 0; i < 4; ++i) {
    WeightedGraph wg = random_weighted_graph(7, 2.0, i % 2 == 0, gen);
    const std::vector<NodeId> s{0, 3};
    double exact = exact_positive_influence(wg.graph, wg.weights, s);
    Rng rng(100 + i);
    InfluenceEstimate est = estimate_influence(wg.graph, wg.weights, s, 40000, rng);
    CHECK(est.n_samples == 40000);
    CHECK(std::abs(est.mean - exact) < 5.0 * est.std_error + 1e-9);
    Rng bank_rng(200 + i);
    LiveEdgeBank bank(wg.graph, wg.weights, 40000, bank_rng);
    InfluenceEstimate b = bank.evaluate(s);
    CHECK(std::abs(b.mean - exact) < 5.0 * b.std_error + 1e-9);
  }
}

TEST_CASE("bank greedy gains match direct bank evaluation") {
  Rng gen(3);
  WeightedGraph wg = random_weighted_graph(15, 2.5, true, gen);
  Rng rng(4);
  LiveEdgeBank bank(wg.graph, wg.weights, 500, rng);
  LiveEdgeBank::Greedy g(bank);
  std::vector<NodeId> chosen;
  for (NodeId v : {3u, 7u, 11u}) {
    std::vector<NodeId> with = chosen;
    with.push_back(v);
    double before = bank.evaluate(chosen).mean * bank.size();
    double after = bank.evaluate(with).mean * bank.size();
    CHECK(static_cast<double>(g.gain(v)) == doctest::Approx(after - before));
    g.add(v);
    chosen = with;
    CHECK(static_cast<double>(g.total()) == doctest::Approx(after));
  }
}

TEST_CASE("greedy on the star picks the centre") {
  std::vector<Edge> edges;
  for (NodeId leaf = 1; leaf <= 6; ++leaf) edges.push_back({0, leaf});
  DirectedGraph star(7, edges);
  DerivedWeights w = make_weights(std::vector<double>(6, 0.9));
  Rng rng(5);
  OracleResult r = greedy_oracle(star, w, 1, {}, rng);
  CHECK(r.seed_set == std::vector<NodeId>{0});
  CHECK(r.value_estimate.mean == doctest::Approx(6.4).epsilon(0.05));

  GreedyOptions exact;
  exact.exact = [&](std::span<const NodeId> s) { return exact_positive_influence(star, w, s); };
  OracleResult e = greedy_oracle(star, w, 2, exact, rng);
  CHECK(e.seed_set.front() == 0);
  CHECK(e.value_estimate.mean == doctest::Approx(6.4 + 0.1));
}

TEST_CASE("brute force finds the best set of a modular function") {
  const std::vector<double> value{0.5, 3.0, 1.0, 3.0, 2.0};
  SetEvaluator f = [&](std::span<const NodeId> s) {
    double t = 0;
    for (NodeId v : s) t += value[v];
    return t;
  };
  OracleResult r = brute_force_opt(5, 2, f);
  CHECK(r.seed_set == std::vector<NodeId>{1, 3});
  CHECK(r.value_estimate.mean == doctest::Approx(6.0));
  CHECK_THROWS_AS(brute_force_opt(5, 2, f, 5), std::length_error);
  CHECK(binomial(5, 2) == 10.0);
  CHECK(binomial(232, 5) == doctest::Approx(5.3594e9).epsilon(1e-3));
}

TEST_CASE("greedy ties go to the lowest id") {
  DirectedGraph g(4, {});
  DerivedWeights w = make_weights({});
  GreedyOptions opt;
  opt.exact = [](std::span<const NodeId> s) { return static_cast<double>(s.size()); };
  Rng rng(1);
  OracleResult r = greedy_oracle(g, w, 2, opt, rng);
  CHECK(r.seed_set == std::vector<NodeId>{0, 1});
}

TEST_CASE("greedy reaches the guarantee on small instances") {
  Rng gen(6);
  for (int i = 0; i < 5; ++i) {
    WeightedGraph wg = random_weighted_graph(7, 2.0, true, gen);
    SetEvaluator f = [&](std::span<const NodeId> s) { return exact_positive_influence(wg.graph, wg.weights, s); };
    OracleResult opt = brute_force_opt(7, 2, f);
    GreedyOptions o;
    o.exact = f;
    o.optimum = opt.value_estimate.mean;
    Rng rng(i);
    OracleResult g = greedy_oracle(wg.graph, wg.weights, 2, o, rng);
    CHECK(g.value_estimate.mean >= (1.0 - std::exp(-1.0)) * opt.value_estimate.mean - 1e-12);
    CHECK(g.alpha == doctest::Approx(g.value_estimate.mean / opt.value_estimate.mean));
  }
}

TEST_CASE("positive influence is monotone and submodular on a small instance") {
  Rng gen(7);
  WeightedGraph wg = random_weighted_graph(5, 2.0, true, gen);
  SubmodularityCount c = count_submodularity_violations(wg.graph, wg.weights);
  CHECK(c.triples > 0);
  CHECK(c.monotonicity_violations == 0);
  CHECK(c.submodularity_violations == 0);
}
