#include "ltn/influence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ltn {

InfluenceEstimate estimate_influence(const DirectedGraph& graph, const DerivedWeights& weights,
                                     std::span<const NodeId> seeds, std::size_t n_samples, Rng& rng) {
  if (n_samples == 0) throw std::invalid_argument("n_samples must be >= 1");
  CascadeSimulator sim(graph, weights);
  const Model model = weights.has_autonomy() ? Model::Ltn : Model::Lt;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    sim.run(model, seeds, rng);
    const double x = static_cast<double>(sim.positive_count());
    sum += x;
    sum_sq += x * x;
  }
  InfluenceEstimate est;
  est.n_samples = n_samples;
  const double N = static_cast<double>(n_samples);
  est.mean = sum / N;
  if (n_samples > 1) {
    const double var = std::max(0.0, (sum_sq - N * est.mean * est.mean) / (N - 1.0));
    est.std_error = std::sqrt(var / N);
  }
  return est;
}

namespace {

struct Option {
  std::int32_t parent;
  double prob;
};

// Parent choices per node. Only nodes reachable from the seeds matter; a
// choice of an unreachable parent is merged into the "nothing chosen" option.
// Sign corrections are summed in closed form per realization.
std::vector<std::vector<Option>> realization_options(const DirectedGraph& graph, const DerivedWeights& weights,
                                                     const std::vector<std::uint8_t>& is_seed) {
  const std::size_t n = graph.node_count();
  std::vector<std::uint8_t> reach(is_seed);
  std::vector<NodeId> stack;
  for (NodeId v = 0; v < n; ++v)
    if (is_seed[v]) stack.push_back(v);
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (EdgeId e : graph.out_edges(u)) {
      const NodeId v = graph.edge(e).tail;
      if (!reach[v] && weights.edge_weight[e] > 0.0) {
        reach[v] = 1;
        stack.push_back(v);
      }
    }
  }
  std::vector<std::vector<Option>> options(n);
  for (NodeId v = 0; v < n; ++v) {
    auto& opts = options[v];
    if (is_seed[v] || !reach[v]) {
      opts.push_back({-1, 1.0});
      continue;
    }
    double sum = 0.0;
    for (EdgeId e : graph.in_edges(v))
      if (reach[graph.edge(e).head]) sum += weights.edge_weight[e];
    if (1.0 - sum > 0.0) opts.push_back({-1, 1.0 - sum});
    for (EdgeId e : graph.in_edges(v)) {
      const double w = weights.edge_weight[e];
      const NodeId u = graph.edge(e).head;
      if (w > 0.0 && reach[u]) opts.push_back({static_cast<std::int32_t>(u), w});
    }
    if (opts.empty()) opts.push_back({-1, 1.0});
  }
  return options;
}

std::vector<std::uint8_t> seed_mask(const DirectedGraph& graph, std::span<const NodeId> seeds) {
  std::vector<std::uint8_t> mask(graph.node_count(), 0);
  for (NodeId s : seeds) {
    graph.check_node(s);
    mask[s] = 1;
  }
  return mask;
}

// Expected number of positive nodes in one parent-choice realization. An
// active node is positive with probability q+ + (1 - q+ - q-) p+(parent).
double expected_positives(std::span<const std::int32_t> parent, const std::vector<std::uint8_t>& is_seed,
                          const DerivedWeights& weights, std::vector<double>& p_pos,
                          std::vector<std::uint8_t>& state, std::vector<std::int32_t>& chain) {
  enum : std::uint8_t { kOpen, kWalking, kInactive, kActive };
  const std::size_t n = parent.size();
  p_pos.assign(n, 0.0);
  state.assign(n, kOpen);
  const bool autonomy = weights.has_autonomy();
  double total = 0.0;
  for (std::size_t start = 0; start < n; ++start) {
    if (state[start] != kOpen) continue;
    chain.clear();
    std::int32_t v = static_cast<std::int32_t>(start);
    bool active = false;
    double base = 0.0;
    while (true) {
      if (state[v] == kActive || state[v] == kInactive) {
        active = state[v] == kActive;
        base = p_pos[v];
        break;
      }
      if (state[v] == kWalking) break;  // cycle without a seed
      if (is_seed[v]) {
        state[v] = kActive;
        p_pos[v] = 1.0;
        total += 1.0;
        active = true;
        base = 1.0;
        break;
      }
      if (parent[v] < 0) {
        state[v] = kInactive;
        break;
      }
      state[v] = kWalking;
      chain.push_back(v);
      v = parent[v];
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const std::int32_t c = *it;
      state[c] = active ? kActive : kInactive;
      if (!active) continue;
      base = autonomy ? weights.q_pos[c] + (1.0 - weights.q_pos[c] - weights.q_neg[c]) * base : 1.0;
      p_pos[c] = base;
      total += base;
    }
  }
  return total;
}

}  // namespace

double live_edge_realization_count(const DirectedGraph& graph, const DerivedWeights& weights,
                                   std::span<const NodeId> seeds) {
  const auto options = realization_options(graph, weights, seed_mask(graph, seeds));
  double count = 1.0;
  for (const auto& o : options) count *= static_cast<double>(o.size());
  return count;
}

double full_realization_count(const DirectedGraph& graph, const DerivedWeights& weights) {
  double count = 1.0;
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    double options = 1.0;
    for (EdgeId e : graph.in_edges(v))
      if (weights.edge_weight[e] > 0.0) options += 1.0;
    count *= options;
  }
  return count;
}

double exact_positive_influence(const DirectedGraph& graph, const DerivedWeights& weights,
                                std::span<const NodeId> seeds, std::uint64_t budget) {
  const auto is_seed = seed_mask(graph, seeds);
  const auto options = realization_options(graph, weights, is_seed);
  const std::size_t n = graph.node_count();
  double count = 1.0;
  for (const auto& o : options) count *= static_cast<double>(o.size());
  if (count > static_cast<double>(budget))
    throw std::length_error("exact enumeration needs " + std::to_string(count) +
                            " realizations, budget is " + std::to_string(budget));
  if (n == 0) return 0.0;
  std::vector<std::size_t> idx(n, 0);
  std::vector<std::int32_t> parent(n), chain;
  std::vector<double> p_pos;
  std::vector<std::uint8_t> state;
  double total = 0.0;
  while (true) {
    double p = 1.0;
    for (std::size_t v = 0; v < n; ++v) {
      const Option& o = options[v][idx[v]];
      parent[v] = o.parent;
      p *= o.prob;
    }
    total += p * expected_positives(parent, is_seed, weights, p_pos, state, chain);
    std::size_t v = 0;
    while (v < n && ++idx[v] == options[v].size()) idx[v++] = 0;
    if (v == n) break;
  }
  return total;
}

LiveEdgeBank::LiveEdgeBank(const DirectedGraph& graph, const DerivedWeights& weights, std::size_t worlds,
                           Rng& rng)
    : n_(graph.node_count()), worlds_(worlds), signed_(weights.has_autonomy()) {
  if (worlds == 0) throw std::invalid_argument("bank needs at least one world");
  parent_.assign(worlds_ * n_, -1);
  correction_.assign(worlds_ * n_, 0);
  child_offset_.assign(worlds_ * (n_ + 1), 0);
  children_.assign(worlds_ * n_, 0);
  for (std::size_t w = 0; w < worlds_; ++w) {
    std::int32_t* par = parent_.data() + w * n_;
    std::int8_t* cor = correction_.data() + w * n_;
    for (NodeId v = 0; v < n_; ++v) {
      const double x = rng.uniform();
      double cum = 0.0;
      for (EdgeId e : graph.in_edges(v)) {
        cum += weights.edge_weight[e];
        if (x < cum) {
          par[v] = static_cast<std::int32_t>(graph.edge(e).head);
          break;
        }
      }
    }
    if (signed_)
      for (NodeId v = 0; v < n_; ++v)
        if (par[v] >= 0) cor[v] = draw_correction(weights, v, rng.uniform());
    std::uint32_t* off = child_offset_.data() + w * (n_ + 1);
    for (NodeId v = 0; v < n_; ++v)
      if (par[v] >= 0) ++off[par[v] + 1];
    for (std::size_t v = 0; v < n_; ++v) off[v + 1] += off[v];
    std::vector<std::uint32_t> pos(off, off + n_);
    NodeId* ch = children_.data() + w * n_;
    for (NodeId v = 0; v < n_; ++v)
      if (par[v] >= 0) ch[pos[par[v]]++] = v;
  }
}

InfluenceEstimate LiveEdgeBank::evaluate(std::span<const NodeId> seeds) const {
  std::vector<std::uint8_t> is_seed(n_, 0);
  std::vector<NodeId> unique;
  for (NodeId s : seeds) {
    if (s >= n_) throw std::out_of_range("seed id out of range");
    if (!is_seed[s]) unique.push_back(s);
    is_seed[s] = 1;
  }
  std::vector<std::pair<NodeId, Sign>> stack;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t w = 0; w < worlds_; ++w) {
    const std::uint32_t* off = child_offset_.data() + w * (n_ + 1);
    const NodeId* ch = children_.data() + w * n_;
    const std::int8_t* cor = correction_.data() + w * n_;
    // Live-edge in-degree is at most one, so each non-seed node is reached
    // from at most one parent.
    double positives = static_cast<double>(unique.size());
    for (NodeId s : unique) stack.emplace_back(s, Sign{1});
    while (!stack.empty()) {
      const auto [x, sx] = stack.back();
      stack.pop_back();
      for (std::uint32_t k = off[x]; k < off[x + 1]; ++k) {
        const NodeId c = ch[k];
        if (is_seed[c]) continue;
        const Sign sc = cor[c] != 0 ? cor[c] : sx;
        if (sc > 0) positives += 1.0;
        stack.emplace_back(c, sc);
      }
    }
    sum += positives;
    sum_sq += positives * positives;
  }
  InfluenceEstimate est;
  const double N = static_cast<double>(worlds_);
  est.n_samples = worlds_;
  est.mean = sum / N;
  if (worlds_ > 1) est.std_error = std::sqrt(std::max(0.0, (sum_sq - N * est.mean * est.mean) / (N - 1.0)) / N);
  return est;
}

LiveEdgeBank::Greedy::Greedy(const LiveEdgeBank& bank)
    : bank_(bank), sign_(bank.worlds_ * bank.n_, 0), is_seed_(bank.n_, 0) {}

std::int64_t LiveEdgeBank::Greedy::walk(NodeId v, bool commit) const {
  if (is_seed_[v]) return 0;
  const std::size_t n = bank_.n_;
  std::int64_t gain = 0;
  for (std::size_t w = 0; w < bank_.worlds_; ++w) {
    Sign* sg = sign_.data() + w * n;
    if (sg[v] == 1) continue;  // already positive: nothing below changes
    const std::uint32_t* off = bank_.child_offset_.data() + w * (n + 1);
    const NodeId* ch = bank_.children_.data() + w * n;
    const std::int8_t* cor = bank_.correction_.data() + w * n;
    ++gain;
    if (commit) sg[v] = 1;
    stack_.clear();
    stack_.emplace_back(v, Sign{1});
    while (!stack_.empty()) {
      const auto [x, sx] = stack_.back();
      stack_.pop_back();
      for (std::uint32_t k = off[x]; k < off[x + 1]; ++k) {
        const NodeId c = ch[k];
        if (c == v || is_seed_[c]) continue;
        const Sign nc = cor[c] != 0 ? cor[c] : sx;
        const Sign oc = sg[c];
        if (nc == oc) continue;
        gain += (nc == 1) - (oc == 1);
        if (commit) sg[c] = nc;
        stack_.emplace_back(c, nc);
      }
    }
  }
  return gain;
}

std::int64_t LiveEdgeBank::Greedy::gain(NodeId v) const { return walk(v, false); }

void LiveEdgeBank::Greedy::add(NodeId v) {
  total_ += walk(v, true);
  is_seed_[v] = 1;
}

OracleResult greedy_oracle(const DirectedGraph& graph, const DerivedWeights& weights, std::size_t K,
                           const GreedyOptions& options, Rng& rng) {
  const std::size_t n = graph.node_count();
  if (K > n) throw std::invalid_argument("K exceeds node count");
  OracleResult result;
  if (K == 0) {
    result.value_estimate = {0.0, 0.0, 0};
    if (options.optimum && *options.optimum > 0) result.alpha = 0.0;
    return result;
  }
  std::unique_ptr<LiveEdgeBank> bank;
  std::unique_ptr<LiveEdgeBank::Greedy> state;
  std::vector<NodeId> chosen;
  double current = 0.0;
  if (options.exact) {
    current = options.exact(chosen);
  } else {
    bank = std::make_unique<LiveEdgeBank>(graph, weights, options.n_samples, rng);
    state = std::make_unique<LiveEdgeBank::Greedy>(*bank);
  }
  auto marginal = [&](NodeId v) -> double {
    if (state) return static_cast<double>(state->gain(v));
    std::vector<NodeId> with = chosen;
    with.push_back(v);
    return options.exact(with) - current;
  };

  // Lazy greedy: bound[v] is v's last computed gain, exact when
  // fresh[v] == round + 1.
  std::vector<double> bound(n);
  std::vector<std::size_t> fresh(n, 1);
  std::vector<std::uint8_t> taken(n, 0);
  for (NodeId v = 0; v < n; ++v) bound[v] = marginal(v);
  for (std::size_t round = 0; round < K; ++round) {
    while (true) {
      NodeId best = 0;
      bool found = false;
      for (NodeId v = 0; v < n; ++v) {
        if (taken[v]) continue;
        if (!found || bound[v] > bound[best] + options.tie_epsilon) {
          best = v;
          found = true;
        }
      }
      if (fresh[best] == round + 1) {
        taken[best] = 1;
        chosen.push_back(best);
        if (state) state->add(best);
        else current = options.exact(chosen);
        break;
      }
      bound[best] = marginal(best);
      fresh[best] = round + 1;
    }
  }
  result.seed_set = chosen;
  if (state) {
    result.value_estimate = bank->evaluate(chosen);
  } else {
    result.value_estimate = {options.exact(chosen), 0.0, 0};
  }
  if (options.optimum && *options.optimum > 0.0) result.alpha = result.value_estimate.mean / *options.optimum;
  return result;
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

OracleResult brute_force_opt(std::size_t node_count, std::size_t K, const SetEvaluator& evaluator,
                             std::uint64_t budget, double tie_epsilon) {
  const std::size_t k = std::min(K, node_count);
  if (binomial(node_count, k) > static_cast<double>(budget))
    throw std::length_error("brute force needs C(" + std::to_string(node_count) + "," + std::to_string(k) +
                            ") evaluations, budget is " + std::to_string(budget));
  OracleResult best;
  std::vector<NodeId> comb(k);
  std::iota(comb.begin(), comb.end(), 0);
  bool have = false;
  double best_value = 0.0;
  while (true) {
    const double value = evaluator(comb);
    if (!have || value > best_value + tie_epsilon) {
      best_value = value;
      best.seed_set = comb;
      have = true;
    }
    // Next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && comb[i - 1] == node_count - k + i - 1) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (std::size_t j = i; j < k; ++j) comb[j] = comb[j - 1] + 1;
  }
  best.value_estimate = {best_value, 0.0, 0};
  best.alpha = 1.0;
  return best;
}

}  // namespace ltn
