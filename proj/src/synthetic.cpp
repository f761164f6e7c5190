#include "ltn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace ltn {

DirectedGraph generate_random_graph(const RandomGraphSpec& spec, Rng& rng) {
  const std::size_t n = spec.nodes;
  if (n < 2 && spec.edges > 0) throw std::invalid_argument("need at least two nodes for edges");
  if (spec.edges > n * (n - 1)) throw std::invalid_argument("too many edges for node count");
  // Chung-Lu style expected degrees; in-degree ranks are an independent
  // permutation of the out-degree ranks.
  const double expo = 1.0 / (spec.exponent - 1.0);
  std::vector<double> out_w(n), in_w(n);
  for (std::size_t i = 0; i < n; ++i) out_w[i] = std::pow(static_cast<double>(i) + 3.0, -expo);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng.engine());
  for (std::size_t i = 0; i < n; ++i) in_w[perm[i]] = out_w[i];
  std::vector<std::size_t> relabel(n);
  std::iota(relabel.begin(), relabel.end(), 0);
  std::shuffle(relabel.begin(), relabel.end(), rng.engine());

  std::discrete_distribution<std::size_t> head_dist(out_w.begin(), out_w.end());
  std::discrete_distribution<std::size_t> tail_dist(in_w.begin(), in_w.end());
  std::unordered_set<std::uint64_t> seen;
  std::vector<Edge> edges;
  edges.reserve(spec.edges);
  std::size_t attempts = 0;
  while (edges.size() < spec.edges) {
    std::size_t h, t;
    if (++attempts > 200 * spec.edges + 1000) {
      // Saturated hubs: fall back to uniform endpoints.
      h = rng.below(n);
      t = rng.below(n);
    } else {
      h = head_dist(rng.engine());
      t = tail_dist(rng.engine());
    }
    if (h == t) continue;
    const NodeId a = static_cast<NodeId>(relabel[h]), b = static_cast<NodeId>(relabel[t]);
    const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
    if (!seen.insert(key).second) continue;
    edges.push_back({a, b});
  }
  return DirectedGraph(n, std::move(edges));
}

Eigen::VectorXd default_theta_star() {
  Eigen::VectorXd t(5);
  t << 1.1, 0.9, 0.8, -0.6, -0.75;
  return t;
}

namespace {

Eigen::VectorXd make_theta(int d, Rng& rng) {
  if (d == 5) return default_theta_star();
  Eigen::VectorXd t(d);
  const int positive = (3 * d + 4) / 5;
  for (int i = 0; i < d; ++i)
    t(i) = i < positive ? 0.7 + 0.5 * rng.uniform() : -(0.5 + 0.3 * rng.uniform());
  if (d == 1) t(0) = std::abs(t(0));
  return t * (default_theta_star().norm() / t.norm());
}

Eigen::MatrixXd node_vectors(int dim, std::size_t n, Rng& rng) {
  Eigen::MatrixXd z(dim, static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < z.cols(); ++c)
    for (int r = 0; r < dim; ++r) z(r, c) = 0.2 + 0.8 * rng.uniform();
  return z;
}

}  // namespace

SyntheticFeatures generate_synthetic_features(const DirectedGraph& graph, const FeatureSpec& spec,
                                              std::uint64_t seed) {
  if (spec.d < 1) throw std::invalid_argument("edge feature dimension must be >= 1");
  if (spec.d_prime < 0) throw std::invalid_argument("autonomy feature dimension must be >= 0");
  Rng rng(seed);
  const std::size_t n = graph.node_count(), m = graph.edge_count();
  SyntheticFeatures out;
  out.truth.theta = make_theta(spec.d, rng);
  out.truth.ground_truth = true;
  const Eigen::VectorXd& theta = out.truth.theta;

  // Product of endpoint vectors plus a perturbation.
  const Eigen::MatrixXd z = node_vectors(spec.d, n, rng);
  const double mean_entry = 0.36;
  Eigen::MatrixXd x(spec.d, static_cast<Eigen::Index>(m));
  for (EdgeId e = 0; e < m; ++e) {
    const Edge& ed = graph.edge(e);
    for (int r = 0; r < spec.d; ++r)
      x(r, e) = z(r, ed.head) * z(r, ed.tail) + rng.normal(0.0, spec.perturbation * mean_entry);
  }

  // Edges with negative weight are projected onto <x, theta> = 0.
  const double tt = theta.squaredNorm();
  double positive_sum = 0.0;
  for (EdgeId e = 0; e < m; ++e) {
    const double w = x.col(e).dot(theta);
    if (w < 0.0) x.col(e) -= (w / tt) * theta;
    else positive_sum += w;
  }
  if (positive_sum > 0.0 && n > 0) x *= spec.target_in_sum * static_cast<double>(n) / positive_sum;

  std::vector<NodeId> by_degree(n);
  std::iota(by_degree.begin(), by_degree.end(), 0);
  std::stable_sort(by_degree.begin(), by_degree.end(), [&](NodeId a, NodeId b) {
    return graph.out_degree(a) > graph.out_degree(b);
  });
  for (std::size_t i = 0; i < std::min(spec.high_degree_count, n); ++i)
    for (EdgeId e : graph.out_edges(by_degree[i])) x.col(e) *= spec.high_degree_scale;

  for (NodeId v = 0; v < n; ++v) {
    double sum = 0.0;
    for (EdgeId e : graph.in_edges(v)) sum += std::max(0.0, x.col(e).dot(theta));
    if (sum > 1.0)
      for (EdgeId e : graph.in_edges(v)) x.col(e) /= sum;
  }
  out.edge_features = std::move(x);
  out.truth.norm_bound_theta = theta.norm();

  if (spec.d_prime > 0) {
    Eigen::VectorXd beta(spec.d_prime);
    for (int i = 0; i < spec.d_prime; ++i) beta(i) = 0.3 + 0.7 * rng.uniform();
    Eigen::MatrixXd pos = node_vectors(spec.d_prime, n, rng);
    Eigen::MatrixXd neg = node_vectors(spec.d_prime, n, rng);
    double max_belief = 0.0;
    for (NodeId v = 0; v < n; ++v)
      max_belief = std::max(max_belief, pos.col(v).dot(beta) + neg.col(v).dot(beta));
    if (max_belief > 0.0) {
      const double s = spec.max_belief / max_belief;
      pos *= s;
      neg *= s;
    }
    out.autonomy_pos = std::move(pos);
    out.autonomy_neg = std::move(neg);
    out.truth.beta = beta;
    out.truth.norm_bound_beta = beta.norm();
  }
  return out;
}

SyntheticFeatures generate_synthetic_features(const DirectedGraph& graph, int d, int d_prime,
                                              std::uint64_t seed) {
  FeatureSpec spec;
  spec.d = d;
  spec.d_prime = d_prime;
  return generate_synthetic_features(graph, spec, seed);
}

void attach_features(DirectedGraph& graph, const SyntheticFeatures& features) {
  graph.set_edge_features(features.edge_features);
  if (features.autonomy_pos.rows() > 0)
    graph.set_autonomy_features(features.autonomy_pos, features.autonomy_neg);
}

}  // namespace ltn
