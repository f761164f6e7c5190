#include "doctest.h"

#include "ltn/diffusion.hpp"
#include "ltn/verification.hpp"

#include "json.hpp"

#include <cmath>
#include <sstream>

using namespace ltn;

namespace {
// 0 -> 1 with w = 0.5, q+ = 0.2, q- = 0.3 at node 1.
struct TwoNode {
  DirectedGraph graph{2, {{0, 1}}};
  DerivedWeights weights = make_weights({0.5}, {0.0, 0.2}, {0.0, 0.3});
};
}  // namespace

TEST_CASE("positive turn probability closed form") {
  CHECK(positive_turn_probability(0.2, 0.3, 0.25, 0.5) == doctest::Approx(0.2 + 0.5 * 0.5));
  CHECK(positive_turn_probability(0.0, 0.0, 0.3, 0.3) == doctest::Approx(1.0));
  CHECK(positive_turn_probability(0.0, 0.0, 0.0, 0.3) == doctest::Approx(0.0));
  CHECK(positive_turn_probability(0.6, 0.4, 0.0, 0.7) == doctest::Approx(0.6));
  // no recent weight: only the autonomous part remains
  CHECK(positive_turn_probability(0.1, 0.2, 0.0, 0.0) == doctest::Approx(0.1));
}

TEST_CASE("positive turn probability stays in [0,1]") {
  Rng rng(17);
  for (int i = 0; i < 20000; ++i) {
    double qp = rng.uniform(), qn = rng.uniform() * (1.0 - qp);
    double rt = rng.uniform(), rp = rng.uniform() * rt;
    double p = positive_turn_probability(qp, qn, rp, rt);
    REQUIRE(p >= 0.0);
    REQUIRE(p <= 1.0);
  }
}

TEST_CASE("two-node fixture matches its closed form under both samplers") {
  TwoNode f;
  const std::vector<NodeId> seeds{0};
  const int n = 200000;
  for (Model m : {Model::Ltn, Model::Tsn}) {
    CascadeSimulator sim(f.graph, f.weights);
    Rng rng(m == Model::Ltn ? 1 : 2);
    int active = 0, positive = 0;
    for (int i = 0; i < n; ++i) {
      sim.run(m, seeds, rng);
      active += sim.activation_step()[1] != kNever;
      positive += sim.sign()[1] > 0;
    }
    // P(active) = 0.5, P(positive) = 0.5 * (0.2 + 0.5 * 1)
    CHECK(std::abs(active / double(n) - 0.5) < 0.006);
    CHECK(std::abs(positive / double(n) - 0.35) < 0.006);
  }
}

TEST_CASE("chain activation probability is the product of weights") {
  DirectedGraph g(3, {{0, 1}, {1, 2}});
  DerivedWeights w = make_weights({0.6, 0.5});
  CascadeSimulator sim(g, w);
  Rng rng(4);
  const std::vector<NodeId> seeds{0};
  int reach = 0, n = 100000;
  for (int i = 0; i < n; ++i) {
    sim.run(Model::Lt, seeds, rng);
    if (sim.activation_step()[2] != kNever) {
      CHECK(sim.activation_step()[2] == 3);
      ++reach;
    }
  }
  CHECK(std::abs(reach / double(n) - 0.3) < 0.006);
}

TEST_CASE("classical model marks every activated node positive") {
  Rng gen(8);
  WeightedGraph wg = random_weighted_graph(30, 3.0, false, gen);
  Rng rng(9);
  const std::vector<NodeId> seeds{0, 5};
  for (int i = 0; i < 200; ++i) {
    DiffusionTrace t = run_lt(wg.graph, wg.weights, seeds, rng);
    CHECK(t.active_count() == t.positive_count());
    CHECK(check_trace(t, seeds).empty());
  }
}

TEST_CASE("traces satisfy their structural invariants") {
  Rng gen(21);
  WeightedGraph wg = random_weighted_graph(40, 3.0, true, gen);
  Rng rng(22);
  const std::vector<NodeId> seeds{1, 2, 3};
  for (Model m : {Model::Lt, Model::Ltn, Model::Tsn}) {
    for (int i = 0; i < 200; ++i) {
      DiffusionTrace t = m == Model::Lt    ? run_lt(wg.graph, wg.weights, seeds, rng)
                         : m == Model::Ltn ? run_ltn(wg.graph, wg.weights, seeds, rng)
                                           : run_tsn(wg.graph, wg.weights, seeds, rng);
      REQUIRE(check_trace(t, seeds) == "");
      CHECK(t.steps[0].active.empty());
      CHECK(t.steps[1].active == seeds);
      for (NodeId v = 0; v < wg.graph.node_count(); ++v) {
        const int sv = t.activation_step[v];
        if (sv == kNever || sv == 1) continue;
        bool earlier_parent = false;
        for (NodeId u : wg.graph.in_neighbors(v)) earlier_parent |= t.activation_step[u] < sv;
        CHECK(earlier_parent);
      }
    }
  }
}

TEST_CASE("cascades are reproducible from the seed") {
  Rng gen(30);
  WeightedGraph wg = random_weighted_graph(25, 2.0, true, gen);
  const std::vector<NodeId> seeds{0};
  Rng a(77), b(77);
  for (int i = 0; i < 20; ++i) {
    DiffusionTrace x = run_ltn(wg.graph, wg.weights, seeds, a);
    DiffusionTrace y = run_ltn(wg.graph, wg.weights, seeds, b);
    CHECK(x.activation_step == y.activation_step);
    CHECK(x.sign == y.sign);
  }
}

TEST_CASE("seed handling") {
  TwoNode f;
  Rng rng(1);
  const std::vector<NodeId> dup{0, 0};
  DiffusionTrace t = run_ltn(f.graph, f.weights, dup, rng);
  CHECK(t.steps[1].active == std::vector<NodeId>{0});
  const std::vector<NodeId> bad{2};
  CHECK_THROWS_AS(run_ltn(f.graph, f.weights, bad, rng), std::out_of_range);
  const std::vector<NodeId> none;
  DiffusionTrace empty = run_lt(f.graph, f.weights, none, rng);
  CHECK(empty.active_count() == 0);
}

TEST_CASE("sign correction thresholds") {
  DerivedWeights w = make_weights({0.5}, {0.0, 0.2}, {0.0, 0.3});
  CHECK(draw_correction(w, 1, 0.0) == -1);
  CHECK(draw_correction(w, 1, 0.29) == -1);
  CHECK(draw_correction(w, 1, 0.31) == 0);
  CHECK(draw_correction(w, 1, 0.79) == 0);
  CHECK(draw_correction(w, 1, 0.81) == 1);
  DerivedWeights classical = make_weights({0.5});
  CHECK(draw_correction(classical, 1, 0.99) == 0);
}

TEST_CASE("live-edge sign resolution") {
  // 0 -> 1 -> 2 (flip on 2), 3 <-> 4 cycle without a seed
  std::vector<std::int32_t> parent{-1, 0, 1, 4, 3};
  std::vector<std::int8_t> corr{0, 0, -1, 0, 0};
  std::vector<std::uint8_t> seed{1, 0, 0, 0, 0};
  std::vector<Sign> sign;
  std::vector<std::int32_t> scratch;
  resolve_live_edge_signs(parent, corr, seed, sign, scratch);
  CHECK(sign == std::vector<Sign>{1, 1, -1, 0, 0});
  // correction +1 turns a negative chain positive
  corr[1] = -1;
  corr[2] = 1;
  resolve_live_edge_signs(parent, corr, seed, sign, scratch);
  CHECK(sign == std::vector<Sign>{1, -1, 1, 0, 0});
}

TEST_CASE("live-edge samples pick at most one parent") {
  Rng gen(5);
  WeightedGraph wg = random_weighted_graph(20, 3.0, true, gen);
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    LiveEdgeSample s = sample_live_edge_graph(wg.graph, wg.weights, rng);
    for (NodeId v = 0; v < wg.graph.node_count(); ++v) {
      if (s.chosen_edge[v] == LiveEdgeSample::kNone) {
        CHECK(s.correction[v] == 0);
        CHECK_FALSE(s.chosen_in_neighbor(wg.graph, v).has_value());
      } else {
        CHECK(wg.graph.edge(s.chosen_edge[v]).tail == v);
      }
    }
  }
}

TEST_CASE("trace jsonl has one object per step") {
  TwoNode f;
  Rng rng(3);
  const std::vector<NodeId> seeds{0};
  DiffusionTrace t = run_ltn(f.graph, f.weights, seeds, rng);
  std::ostringstream out;
  write_trace_jsonl(out, t, 4);
  std::istringstream in(out.str());
  std::string line;
  int steps = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j["run"] == 4);
    CHECK(j["step"] == steps);
    ++steps;
  }
  CHECK(steps == t.last_step() + 1);
}

TEST_CASE("model names round trip") {
  for (Model m : {Model::Lt, Model::Ltn, Model::Tsn}) CHECK(parse_model(model_name(m)) == m);
  CHECK_THROWS(parse_model("ic"));
}
