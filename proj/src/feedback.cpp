#include "ltn/feedback.hpp"

#include <ostream>
#include <stdexcept>

namespace ltn {

namespace {
// Trace steps count seeds as step 1; feedback counts them as step 0.
int feedback_step(int trace_step) { return trace_step == kNever ? kNever : trace_step - 1; }

Eigen::VectorXd zero_feature(const DirectedGraph& graph) {
  return Eigen::VectorXd::Zero(graph.has_edge_features() ? graph.edge_feature_dim() : 0);
}
}  // namespace

std::vector<RoundObservation> extract_feedback(const DirectedGraph& graph, const DiffusionTrace& trace) {
  if (trace.node_count() != graph.node_count() || trace.activation_step.size() != graph.node_count())
    throw std::invalid_argument("trace does not belong to this graph");
  const bool features = graph.has_edge_features();
  std::vector<RoundObservation> out;
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    const int sv = trace.activation_step[v];
    if (sv == 1) continue;  // seed
    RoundObservation obs;
    obs.node = v;
    obs.aggregated_feature = zero_feature(graph);
    bool observed = false;
    for (EdgeId e : graph.in_edges(v)) {
      const NodeId u = graph.edge(e).head;
      const int su = trace.activation_step[u];
      if (su == kNever) continue;
      observed = true;
      if (sv != kNever && su > sv - 1) continue;
      obs.relevant_parents.push_back(u);
      obs.relevant_edges.push_back(e);
      if (features) obs.aggregated_feature += graph.edge_features().col(e);
    }
    if (!observed) continue;
    obs.activation_step = feedback_step(sv);
    obs.activation_label = sv != kNever ? 1 : 0;
    if (obs.activation_label) obs.positive_label = trace.sign[v] > 0 ? 1 : 0;
    obs.step1_flag = obs.activation_step == 1;
    out.push_back(std::move(obs));
  }
  return out;
}

RoundObservation extract_exploration_edge_feedback(const DirectedGraph& graph, const DiffusionTrace& trace,
                                                   EdgeId exploration_edge) {
  if (trace.node_count() != graph.node_count()) throw std::invalid_argument("trace does not belong to this graph");
  if (exploration_edge >= graph.edge_count()) throw std::out_of_range("exploration edge id out of range");
  const Edge& edge = graph.edge(exploration_edge);
  if (trace.activation_step[edge.head] != 1) throw std::invalid_argument("exploration head is not a seed");
  if (trace.activation_step[edge.tail] == 1) throw std::invalid_argument("exploration tail is a seed");
  for (EdgeId e : graph.in_edges(edge.tail)) {
    const NodeId u = graph.edge(e).head;
    if (u != edge.head && trace.activation_step[u] == 1)
      throw std::invalid_argument("co-seed " + std::to_string(u) + " points to the exploration tail");
  }
  RoundObservation obs;
  obs.node = edge.tail;
  obs.relevant_parents = {edge.head};
  obs.relevant_edges = {exploration_edge};
  obs.aggregated_feature = graph.has_edge_features() ? Eigen::VectorXd(graph.edge_features().col(exploration_edge))
                                                     : zero_feature(graph);
  obs.activation_step = feedback_step(trace.activation_step[edge.tail]);
  obs.step1_flag = obs.activation_step == 1;
  obs.activation_label = obs.step1_flag ? 1 : 0;
  if (obs.activation_label) obs.positive_label = trace.sign[edge.tail] > 0 ? 1 : 0;
  return obs;
}

void write_observations_csv_header(std::ostream& out, int d) {
  out << "round,node,step,y,y_plus,rp_size";
  for (int i = 0; i < d; ++i) out << ",x" << i;
  out << '\n';
}

void write_observations_csv(std::ostream& out, std::size_t round, const std::vector<RoundObservation>& observations) {
  for (const auto& o : observations) {
    out << round << ',' << o.node << ',';
    if (o.activation_step == kNever) out << "inf";
    else out << o.activation_step;
    out << ',' << o.activation_label << ',';
    if (o.positive_label) out << *o.positive_label;
    out << ',' << o.relevant_parents.size();
    for (Eigen::Index i = 0; i < o.aggregated_feature.size(); ++i) out << ',' << o.aggregated_feature(i);
    out << '\n';
  }
}

}  // namespace ltn
