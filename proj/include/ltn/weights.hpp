#pragma once

#include "ltn/graph.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ltn {

struct ModelParams {
  Eigen::VectorXd theta;
  Eigen::VectorXd beta;  // empty for the classical model
  double norm_bound_theta = 0.0;
  double norm_bound_beta = 0.0;
  bool ground_truth = false;

  bool has_autonomy() const { return beta.size() > 0; }
  // Throws when flagged as ground truth and a norm bound is exceeded.
  void validate() const;
};

ModelParams load_params(const std::string& path);
ModelParams params_from_json_text(const std::string& text);

// w(e) per edge; q_pos/q_neg/belief per node, empty when the model has no
// autonomy factors.
struct DerivedWeights {
  std::vector<double> edge_weight;
  std::vector<double> q_pos, q_neg, belief;

  bool has_autonomy() const { return !q_pos.empty(); }
  // Same edge weights, autonomy dropped.
  DerivedWeights classical() const;
};

// Throws std::domain_error naming the first violated invariant.
void validate_weights(const DirectedGraph& graph, const DerivedWeights& weights);

// Applies the repair rules in place: clip negatives, rescale incoming sums
// above one, rescale beliefs above one.
void sanitize_weights(const DirectedGraph& graph, DerivedWeights& weights);

DerivedWeights derive_weights(const DirectedGraph& graph, const ModelParams& params, bool sanitize);

// Builds weights directly from per-edge values (fixtures, tests).
DerivedWeights make_weights(std::vector<double> edge_weight, std::vector<double> q_pos = {},
                            std::vector<double> q_neg = {});

}  // namespace ltn
