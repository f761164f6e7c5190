#include "ltn/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace ltn {

DirectedGraph::DirectedGraph(std::size_t node_count, std::vector<Edge> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges_.size() * 2);
  std::vector<std::size_t> in_deg(node_count_, 0), out_deg(node_count_, 0);
  for (const Edge& e : edges_) {
    if (e.head >= node_count_ || e.tail >= node_count_)
      throw std::invalid_argument("edge endpoint out of range: " + std::to_string(e.head) + " " +
                                  std::to_string(e.tail));
    if (e.head == e.tail) throw std::invalid_argument("self-loop at node " + std::to_string(e.head));
    const std::uint64_t key = (static_cast<std::uint64_t>(e.head) << 32) | e.tail;
    if (!seen.insert(key).second)
      throw std::invalid_argument("duplicate edge " + std::to_string(e.head) + " -> " +
                                  std::to_string(e.tail));
    ++out_deg[e.head];
    ++in_deg[e.tail];
  }
  in_offsets_.assign(node_count_ + 1, 0);
  out_offsets_.assign(node_count_ + 1, 0);
  for (std::size_t v = 0; v < node_count_; ++v) {
    in_offsets_[v + 1] = in_offsets_[v] + in_deg[v];
    out_offsets_[v + 1] = out_offsets_[v] + out_deg[v];
  }
  in_ids_.resize(edges_.size());
  out_ids_.resize(edges_.size());
  std::vector<std::size_t> in_pos(in_offsets_.begin(), in_offsets_.end() - 1);
  std::vector<std::size_t> out_pos(out_offsets_.begin(), out_offsets_.end() - 1);
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    in_ids_[in_pos[edges_[e].tail]++] = e;
    out_ids_[out_pos[edges_[e].head]++] = e;
  }
}

std::vector<NodeId> DirectedGraph::in_neighbors(NodeId v) const {
  std::vector<NodeId> out;
  for (EdgeId e : in_edges(v)) out.push_back(edges_[e].head);
  return out;
}

std::vector<NodeId> DirectedGraph::out_neighbors(NodeId u) const {
  std::vector<NodeId> out;
  for (EdgeId e : out_edges(u)) out.push_back(edges_[e].tail);
  return out;
}

std::optional<EdgeId> DirectedGraph::find_edge(NodeId head, NodeId tail) const {
  if (head >= node_count_ || tail >= node_count_) return std::nullopt;
  for (EdgeId e : out_edges(head))
    if (edges_[e].tail == tail) return e;
  return std::nullopt;
}

void DirectedGraph::set_edge_features(Eigen::MatrixXd features) {
  if (features.cols() != static_cast<Eigen::Index>(edge_count()))
    throw std::invalid_argument("edge feature count " + std::to_string(features.cols()) +
                                " does not match edge count " + std::to_string(edge_count()));
  edge_features_ = std::move(features);
}

void DirectedGraph::set_autonomy_features(Eigen::MatrixXd pos, Eigen::MatrixXd neg) {
  if (pos.rows() != neg.rows())
    throw std::invalid_argument("autonomy feature dimensions differ");
  if (pos.cols() != static_cast<Eigen::Index>(node_count_) ||
      neg.cols() != static_cast<Eigen::Index>(node_count_))
    throw std::invalid_argument("autonomy feature count does not match node count");
  autonomy_pos_ = std::move(pos);
  autonomy_neg_ = std::move(neg);
}

void DirectedGraph::check_node(NodeId v) const {
  if (v >= node_count_)
    throw std::out_of_range("node id " + std::to_string(v) + " out of range (" +
                            std::to_string(node_count_) + " nodes)");
}

namespace {

bool skippable(const std::string& line) {
  for (char c : line) {
    if (c == '#' || c == '%') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::runtime_error parse_error(std::size_t line, const std::string& what) {
  return std::runtime_error("line " + std::to_string(line) + ": " + what);
}

}  // namespace

DirectedGraph parse_edge_list(std::istream& in, const LoadOptions& options) {
  std::vector<Edge> edges;
  std::unordered_set<std::uint64_t> seen;
  std::size_t max_id = 0;
  bool any = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    std::istringstream ls(line);
    long long head = -1, tail = -1;
    std::string extra;
    if (!(ls >> head >> tail)) throw parse_error(lineno, "expected \"head tail\"");
    if (ls >> extra) throw parse_error(lineno, "trailing token '" + extra + "'");
    if (head < 0 || tail < 0) throw parse_error(lineno, "negative node id");
    if (head > 0xfffffffeLL || tail > 0xfffffffeLL) throw parse_error(lineno, "node id too large");
    if (options.node_count && (static_cast<std::size_t>(head) >= *options.node_count ||
                               static_cast<std::size_t>(tail) >= *options.node_count))
      throw parse_error(lineno, "dangling node id (node count " +
                                    std::to_string(*options.node_count) + ")");
    if (head == tail) throw parse_error(lineno, "self-loop");
    const std::uint64_t key = (static_cast<std::uint64_t>(head) << 32) | static_cast<std::uint64_t>(tail);
    any = true;
    max_id = std::max<std::size_t>(max_id, std::max(head, tail));
    if (!seen.insert(key).second) continue;
    edges.push_back({static_cast<NodeId>(head), static_cast<NodeId>(tail)});
  }
  const std::size_t n = options.node_count ? *options.node_count : (any ? max_id + 1 : 0);
  return DirectedGraph(n, std::move(edges));
}

DirectedGraph load_graph(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list " + path);
  try {
    return parse_edge_list(in, options);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

Eigen::MatrixXd parse_feature_matrix(std::istream& in, std::size_t expected_rows) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw parse_error(lineno, "bad number '" + tok + "'");
      row.push_back(x);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw parse_error(lineno, "expected " + std::to_string(rows.front().size()) + " values, got " +
                                    std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.size() != expected_rows)
    throw std::runtime_error("feature file has " + std::to_string(rows.size()) + " vectors, expected " +
                             std::to_string(expected_rows));
  const Eigen::Index dim = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c)
    for (Eigen::Index r = 0; r < dim; ++r) m(r, static_cast<Eigen::Index>(c)) = rows[c][r];
  return m;
}

Eigen::MatrixXd load_feature_matrix(const std::string& path, std::size_t expected_rows) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature file " + path);
  try {
    return parse_feature_matrix(in, expected_rows);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace ltn
