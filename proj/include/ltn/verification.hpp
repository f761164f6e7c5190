#pragma once

#include "ltn/graph.hpp"
#include "ltn/rng.hpp"
#include "ltn/weights.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ltn {

struct WeightedGraph {
  DirectedGraph graph;
  DerivedWeights weights;
};

// Random LT-N instance with valid weights: n nodes, each possible edge kept
// with probability mean_in_degree / (n - 1).
WeightedGraph random_weighted_graph(std::size_t n, double mean_in_degree, bool autonomy, Rng& rng);

struct CheckResult {
  std::string name;
  bool passed = false;
  nlohmann::json stats;
  std::uint64_t seed = 0;
};

struct VerifyReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool passed() const;
  nlohmann::json to_json() const;
};

struct SubmodularityCount {
  std::uint64_t triples = 0;
  std::uint64_t monotonicity_violations = 0;
  std::uint64_t submodularity_violations = 0;
  double worst_gap = 0.0;
};

// Exhaustive check over all S subset T and v outside T with exact values.
SubmodularityCount count_submodularity_violations(const DirectedGraph& graph,
                                                  const DerivedWeights& weights,
                                                  double tolerance = 1e-9);

// Total variation between two distributions given as count histograms.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

VerifyReport verify_submodularity(std::size_t instances, std::size_t max_nodes, std::uint64_t seed);
VerifyReport verify_equivalence(std::size_t fixtures, std::size_t samples, double tv_limit,
                                std::uint64_t seed);
VerifyReport verify_eigenvalue(int epochs, std::uint64_t seed);
VerifyReport verify_greedy_ratio(std::size_t instances, std::uint64_t seed);

// suite: submodularity | equivalence | eigenvalue | greedy_ratio | all.
VerifyReport run_verify_suite(const std::string& suite, std::uint64_t seed);

}  // namespace ltn
