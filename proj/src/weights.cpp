#include "ltn/weights.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ltn {

namespace {
// Violations this small are rounding noise and get clamped silently.
constexpr double kSlack = 1e-12;

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw std::invalid_argument(std::string("params: '") + key + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}
}  // namespace

void ModelParams::validate() const {
  if (!ground_truth) return;
  if (theta.norm() > norm_bound_theta + kSlack)
    throw std::domain_error("||theta|| exceeds its bound D");
  if (beta.size() > 0 && beta.norm() > norm_bound_beta + kSlack)
    throw std::domain_error("||beta|| exceeds its bound D'");
}

ModelParams params_from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ModelParams p;
  p.theta = vector_from_json(j, "theta");
  p.beta = vector_from_json(j, "beta");
  if (p.theta.size() == 0) throw std::invalid_argument("params: missing 'theta'");
  p.norm_bound_theta = j.value("D", p.theta.norm());
  p.norm_bound_beta = j.value("D_prime", p.beta.size() ? p.beta.norm() : 0.0);
  p.ground_truth = j.value("ground_truth", true);
  p.validate();
  return p;
}

ModelParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open params file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return params_from_json_text(ss.str());
}

DerivedWeights DerivedWeights::classical() const {
  DerivedWeights w;
  w.edge_weight = edge_weight;
  return w;
}

void validate_weights(const DirectedGraph& graph, const DerivedWeights& weights) {
  if (weights.edge_weight.size() != graph.edge_count())
    throw std::invalid_argument("edge weight count does not match edge count");
  for (std::size_t e = 0; e < weights.edge_weight.size(); ++e) {
    const double w = weights.edge_weight[e];
    if (!(w >= 0.0 && w <= 1.0))
      throw std::domain_error("edge " + std::to_string(e) + " weight " + std::to_string(w) + " outside [0,1]");
  }
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    double sum = 0.0;
    for (EdgeId e : graph.in_edges(v)) sum += weights.edge_weight[e];
    if (sum > 1.0 + kSlack)
      throw std::domain_error("node " + std::to_string(v) + " incoming weight sum " + std::to_string(sum) + " > 1");
  }
  if (!weights.has_autonomy()) return;
  if (weights.q_pos.size() != graph.node_count() || weights.q_neg.size() != graph.node_count() ||
      weights.belief.size() != graph.node_count())
    throw std::invalid_argument("autonomy factor count does not match node count");
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    if (!(weights.q_pos[v] >= 0.0) || !(weights.q_neg[v] >= 0.0))
      throw std::domain_error("node " + std::to_string(v) + " has a negative autonomy factor");
    if (weights.q_pos[v] + weights.q_neg[v] > 1.0 + kSlack)
      throw std::domain_error("node " + std::to_string(v) + " belief exceeds 1");
  }
}

void sanitize_weights(const DirectedGraph& graph, DerivedWeights& weights) {
  for (double& w : weights.edge_weight)
    if (!(w > 0.0)) w = 0.0;
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    double sum = 0.0;
    for (EdgeId e : graph.in_edges(v)) sum += weights.edge_weight[e];
    if (sum > 1.0 + kSlack)
      for (EdgeId e : graph.in_edges(v)) weights.edge_weight[e] /= sum;
  }
  if (!weights.has_autonomy()) return;
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    double& qp = weights.q_pos[v];
    double& qn = weights.q_neg[v];
    if (!(qp > 0.0)) qp = 0.0;
    if (!(qn > 0.0)) qn = 0.0;
    const double r = qp + qn;
    if (r > 1.0 + kSlack) {
      qp /= r;
      qn /= r;
    }
    weights.belief[v] = qp + qn;
  }
}

namespace {
// Tiny negative values from rounding are clamped to zero.
void clamp_rounding(DerivedWeights& weights) {
  for (double& w : weights.edge_weight)
    if (w < 0.0 && w >= -kSlack) w = 0.0;
  for (std::size_t v = 0; v < weights.q_pos.size(); ++v) {
    if (weights.q_pos[v] < 0.0 && weights.q_pos[v] >= -kSlack) weights.q_pos[v] = 0.0;
    if (weights.q_neg[v] < 0.0 && weights.q_neg[v] >= -kSlack) weights.q_neg[v] = 0.0;
    weights.belief[v] = weights.q_pos[v] + weights.q_neg[v];
  }
}
}  // namespace

DerivedWeights derive_weights(const DirectedGraph& graph, const ModelParams& params, bool sanitize) {
  if (!graph.has_edge_features() && graph.edge_count() > 0)
    throw std::invalid_argument("graph has no edge features");
  if (graph.edge_count() > 0 && graph.edge_feature_dim() != params.theta.size())
    throw std::invalid_argument("theta has dimension " + std::to_string(params.theta.size()) +
                                " but edge features have dimension " + std::to_string(graph.edge_feature_dim()));
  DerivedWeights w;
  w.edge_weight.resize(graph.edge_count());
  if (graph.edge_count() > 0) {
    const Eigen::VectorXd values = graph.edge_features().transpose() * params.theta;
    for (std::size_t e = 0; e < graph.edge_count(); ++e) w.edge_weight[e] = values(static_cast<Eigen::Index>(e));
  }
  if (params.has_autonomy()) {
    if (!graph.has_autonomy_features())
      throw std::invalid_argument("beta given but graph has no autonomy features");
    if (graph.autonomy_dim() != params.beta.size())
      throw std::invalid_argument("beta has dimension " + std::to_string(params.beta.size()) +
                                  " but autonomy features have dimension " + std::to_string(graph.autonomy_dim()));
    const Eigen::VectorXd qp = graph.autonomy_pos().transpose() * params.beta;
    const Eigen::VectorXd qn = graph.autonomy_neg().transpose() * params.beta;
    w.q_pos.assign(qp.data(), qp.data() + qp.size());
    w.q_neg.assign(qn.data(), qn.data() + qn.size());
    w.belief.resize(w.q_pos.size());
    for (std::size_t v = 0; v < w.belief.size(); ++v) w.belief[v] = w.q_pos[v] + w.q_neg[v];
  }
  if (sanitize) {
    sanitize_weights(graph, w);
  } else {
    clamp_rounding(w);
    validate_weights(graph, w);
  }
  return w;
}

DerivedWeights make_weights(std::vector<double> edge_weight, std::vector<double> q_pos,
                            std::vector<double> q_neg) {
  if (q_pos.size() != q_neg.size()) throw std::invalid_argument("q_pos and q_neg sizes differ");
  DerivedWeights w;
  w.edge_weight = std::move(edge_weight);
  w.q_pos = std::move(q_pos);
  w.q_neg = std::move(q_neg);
  w.belief.resize(w.q_pos.size());
  for (std::size_t v = 0; v < w.belief.size(); ++v) w.belief[v] = w.q_pos[v] + w.q_neg[v];
  return w;
}

}  // namespace ltn
