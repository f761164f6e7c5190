#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ltn {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Edge {
  NodeId head;
  NodeId tail;
};

// Directed graph without self-loops or parallel edges. Edge ids follow the
// order of the edge list passed at construction.
//
// Features are stored column-wise: edge_features().col(e) is x(e), and
// autonomy_pos().col(v) / autonomy_neg().col(v) are x+(v) / x-(v).
class DirectedGraph {
 public:
  DirectedGraph() = default;
  DirectedGraph(std::size_t node_count, std::vector<Edge> edges);

  std::size_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }

  std::span<const EdgeId> in_edges(NodeId v) const {
    return {in_ids_.data() + in_offsets_[v], in_ids_.data() + in_offsets_[v + 1]};
  }
  std::span<const EdgeId> out_edges(NodeId u) const {
    return {out_ids_.data() + out_offsets_[u], out_ids_.data() + out_offsets_[u + 1]};
  }
  std::size_t in_degree(NodeId v) const { return in_offsets_[v + 1] - in_offsets_[v]; }
  std::size_t out_degree(NodeId u) const { return out_offsets_[u + 1] - out_offsets_[u]; }

  std::vector<NodeId> in_neighbors(NodeId v) const;
  std::vector<NodeId> out_neighbors(NodeId u) const;
  std::optional<EdgeId> find_edge(NodeId head, NodeId tail) const;

  void set_edge_features(Eigen::MatrixXd features);
  void set_autonomy_features(Eigen::MatrixXd pos, Eigen::MatrixXd neg);

  bool has_edge_features() const { return edge_features_.cols() == static_cast<Eigen::Index>(edge_count()) && edge_features_.rows() > 0; }
  bool has_autonomy_features() const { return autonomy_pos_.rows() > 0; }
  int edge_feature_dim() const { return static_cast<int>(edge_features_.rows()); }
  int autonomy_dim() const { return static_cast<int>(autonomy_pos_.rows()); }

  const Eigen::MatrixXd& edge_features() const { return edge_features_; }
  const Eigen::MatrixXd& autonomy_pos() const { return autonomy_pos_; }
  const Eigen::MatrixXd& autonomy_neg() const { return autonomy_neg_; }

  void check_node(NodeId v) const;

 private:
  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> in_offsets_{0}, out_offsets_{0};
  std::vector<EdgeId> in_ids_, out_ids_;
  Eigen::MatrixXd edge_features_;
  Eigen::MatrixXd autonomy_pos_, autonomy_neg_;
};

struct LoadOptions {
  // When set, ids must be below this count; otherwise the node count is
  // one past the largest id seen.
  std::optional<std::size_t> node_count;
};

// Reads a whitespace separated "head tail" edge list. Blank lines and lines
// starting with '#' or '%' are skipped. Duplicate edges are dropped.
DirectedGraph load_graph(const std::string& path, const LoadOptions& options = {});
DirectedGraph parse_edge_list(std::istream& in, const LoadOptions& options = {});

// One real vector per line; returns a dim x rows matrix.
Eigen::MatrixXd load_feature_matrix(const std::string& path, std::size_t expected_rows);
Eigen::MatrixXd parse_feature_matrix(std::istream& in, std::size_t expected_rows);

}  // namespace ltn
