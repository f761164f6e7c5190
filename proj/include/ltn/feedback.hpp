#pragma once

#include "ltn/diffusion.hpp"
#include "ltn/graph.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <vector>

namespace ltn {

// Node-level feedback for one observed non-seed node. Steps here count the
// seeds as step 0, so `activation_step` is one less than the trace step and
// step1_flag marks activation directly from the seeds' step.
struct RoundObservation {
  NodeId node = 0;
  std::vector<NodeId> relevant_parents;
  std::vector<EdgeId> relevant_edges;
  Eigen::VectorXd aggregated_feature;
  int activation_label = 0;
  std::optional<int> positive_label;
  int activation_step = kNever;
  bool step1_flag = false;
};

std::vector<RoundObservation> extract_feedback(const DirectedGraph& graph,
                                               const DiffusionTrace& trace);

// Record for the tail of an exploration edge: feature x(e), label 1 iff the
// tail activated at step 1. Throws if a seed other than the head points to
// the tail.
RoundObservation extract_exploration_edge_feedback(const DirectedGraph& graph,
                                                   const DiffusionTrace& trace,
                                                   EdgeId exploration_edge);

void write_observations_csv_header(std::ostream& out, int d);
void write_observations_csv(std::ostream& out, std::size_t round,
                            const std::vector<RoundObservation>& observations);

}  // namespace ltn
