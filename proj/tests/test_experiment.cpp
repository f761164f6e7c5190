#include "doctest.h"

#include "ltn/experiment.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ltn;
using nlohmann::json;

namespace {
ExperimentConfig small_experiment() {
  json j = {{"graph", {{"source", "synthetic"}, {"nodes", 40}, {"edges", 160}, {"seed", 3}}},
            {"K", 2},
            {"epochs", 3},
            {"repetitions", 2},
            {"oracle_samples", 50},
            {"exploration_coseed", {{"max_degree", 2}}},
            {"evaluation", {{"eval_worlds", 200}, {"fstar_worlds", 200}, {"fstar_samples", 1000}}}};
  return ExperimentConfig::from_json(j);
}
}  // namespace

TEST_CASE("config defaults and json round trip") {
  ExperimentConfig d;
  CHECK(d.resolved_horizon(0) == 615);
  CHECK(d.policies.size() == 7);
  ExperimentConfig back = ExperimentConfig::from_json(d.to_json());
  CHECK(back.to_json() == d.to_json());

  json j = d.to_json();
  j["exploration_coseed"] = "none";
  CHECK(ExperimentConfig::from_json(j).exploration_coseed == 0);
  j["exploration_coseed"] = 3;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
}

TEST_CASE("config rejects unknown keys and values") {
  CHECK_THROWS(ExperimentConfig::from_json(json{{"epoch", 3}}));
  CHECK_THROWS(ExperimentConfig::from_json(json{{"graph", {{"nodez", 3}}}}));
  CHECK_THROWS(ExperimentConfig::from_json(json{{"policies", {"grd_magic"}}}));
  CHECK_THROWS(ExperimentConfig::from_json(json{{"model", "tsn"}}));
  CHECK_THROWS(ExperimentConfig::from_json(json{{"model", "ltn"}}));  // no autonomy features
  CHECK_THROWS(ExperimentConfig::from_json(json{{"repetitions", 0}}));
  CHECK(is_known_policy("grd_explr_q=4"));
  CHECK_FALSE(is_known_policy("grd_explr_q=0"));
}

TEST_CASE("doubles survive formatting") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -2.5}) {
    std::string s = format_double(x);
    double y = 0;
    std::from_chars(s.data(), s.data() + s.size(), y);
    CHECK(y == x);
  }
  CHECK(format_double(std::nan("")) == "");
}

TEST_CASE("fixture instances") {
  ExperimentConfig c;
  c.graph.kind = "fixture";
  c.graph.fixture = "two_node";
  c.model = Model::Ltn;
  Instance two = build_instance(c);
  CHECK(two.weights.edge_weight[0] == doctest::Approx(0.5));
  CHECK(two.weights.q_pos[1] == doctest::Approx(0.2));
  CHECK(two.weights.q_neg[1] == doctest::Approx(0.3));
  c.graph.fixture = "star";
  Instance star = build_instance(c);
  CHECK(star.graph.out_degree(0) == 6);
  c.graph.fixture = "ring";
  CHECK_THROWS(build_instance(c));
}

TEST_CASE("experiment runs are deterministic and thread independent") {
  ExperimentConfig c = small_experiment();
  Instance inst = build_instance(c);
  c.threads = 1;
  ExperimentResult a = run_experiment(c, inst);
  c.threads = 3;
  ExperimentResult b = run_experiment(c, inst);
  REQUIRE(a.runs.size() == 7 * 2);
  CHECK(a.horizon == EpochSchedule(5, 0, 1).epoch_end(3));
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].policy == b.runs[i].policy);
    REQUIRE(a.runs[i].run.records.size() == static_cast<std::size_t>(a.horizon));
    for (std::size_t t = 0; t < a.runs[i].run.records.size(); ++t) {
      CHECK(a.runs[i].run.records[t].seed_set == b.runs[i].run.records[t].seed_set);
      CHECK(a.runs[i].run.records[t].reward == b.runs[i].run.records[t].reward);
    }
  }
}

TEST_CASE("experiment outputs") {
  ExperimentConfig c = small_experiment();
  c.policies = {"rdm", "grd_explr_q=1"};
  c.repetitions = 1;
  Instance inst = build_instance(c);
  ExperimentResult r = run_experiment(c, inst);
  auto dir = std::filesystem::temp_directory_path() / "ltn_test_outputs";
  std::filesystem::remove_all(dir);
  write_experiment_outputs(c, r, dir);
  for (const char* f : {"rdm_rep0.csv", "grd_explr_q1_rep0.csv", "aggregate.csv", "plot_cumulative_reward.csv",
                        "plot_theta_error.csv", "summary.json"})
    CHECK(std::filesystem::exists(dir / f));
  std::ifstream in(dir / "grd_explr_q1_rep0.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "round,epoch,phase,policy,reward,cumulative_reward,scaled_regret,theta_error,beta_error");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == static_cast<std::size_t>(r.horizon));
  std::ifstream sj(dir / "summary.json");
  json summary = json::parse(sj);
  CHECK(summary["policies"].contains("rdm"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("simulate writes traces and a summary") {
  ExperimentConfig c;
  c.graph.kind = "fixture";
  c.graph.fixture = "two_node";
  c.model = Model::Ltn;
  c.seeds = {0};
  c.runs = 2000;
  Instance inst = build_instance(c);
  auto dir = std::filesystem::temp_directory_path() / "ltn_test_sim";
  std::filesystem::remove_all(dir);
  json s = simulate(c, inst, dir);
  CHECK(std::filesystem::exists(dir / "traces.jsonl"));
  CHECK(std::filesystem::exists(dir / "summary.json"));
  CHECK(s.dump().find("positive") != std::string::npos);
  std::filesystem::remove_all(dir);
}
