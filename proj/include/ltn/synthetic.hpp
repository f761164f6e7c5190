#pragma once

#include "ltn/graph.hpp"
#include "ltn/rng.hpp"
#include "ltn/weights.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace ltn {

// Heavy-tailed random digraph with exactly `edges` distinct edges.
struct RandomGraphSpec {
  std::size_t nodes = 232;
  std::size_t edges = 3090;
  double exponent = 2.2;  // power-law exponent of the expected degrees
};
DirectedGraph generate_random_graph(const RandomGraphSpec& spec, Rng& rng);

struct FeatureSpec {
  int d = 5;
  int d_prime = 0;
  // Mean incoming weight sum the global feature scale aims for.
  double target_in_sum = 0.55;
  // Std-dev of the perturbation, relative to the mean product entry.
  double perturbation = 1.5;
  // Out-edges of the `high_degree_count` largest out-degree nodes are
  // scaled by `high_degree_scale`.
  std::size_t high_degree_count = 5;
  double high_degree_scale = 0.3;
  // Autonomy factors are drawn so that beliefs stay below this level.
  double max_belief = 0.8;
};

struct SyntheticFeatures {
  Eigen::MatrixXd edge_features;              // d x |E|
  Eigen::MatrixXd autonomy_pos, autonomy_neg;  // d' x |V|, empty when d' = 0
  ModelParams truth;
};

// Default ground truth for d = 5: three positive and two negative entries.
Eigen::VectorXd default_theta_star();

SyntheticFeatures generate_synthetic_features(const DirectedGraph& graph, const FeatureSpec& spec,
                                              std::uint64_t seed);
SyntheticFeatures generate_synthetic_features(const DirectedGraph& graph, int d, int d_prime,
                                              std::uint64_t seed);

// Installs the generated features on the graph.
void attach_features(DirectedGraph& graph, const SyntheticFeatures& features);

}  // namespace ltn
