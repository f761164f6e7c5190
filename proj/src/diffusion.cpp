#include "ltn/diffusion.hpp"

#include <algorithm>
#include <cassert>
#include <iostream>
#include <stdexcept>

namespace ltn {

Model parse_model(const std::string& name) {
  if (name == "lt") return Model::Lt;
  if (name == "ltn") return Model::Ltn;
  if (name == "tsn") return Model::Tsn;
  throw std::invalid_argument("unknown diffusion model '" + name + "'");
}

const char* model_name(Model model) {
  switch (model) {
    case Model::Lt: return "lt";
    case Model::Ltn: return "ltn";
    case Model::Tsn: return "tsn";
  }
  return "?";
}

std::size_t DiffusionTrace::active_count() const {
  return static_cast<std::size_t>(std::count_if(sign.begin(), sign.end(), [](Sign s) { return s != 0; }));
}

std::size_t DiffusionTrace::positive_count() const {
  return static_cast<std::size_t>(std::count(sign.begin(), sign.end(), Sign{1}));
}

double positive_turn_probability(double q_pos, double q_neg, double recent_pos_weight,
                                 double recent_total_weight) {
  const double r = q_pos + q_neg;
  const double own = r > 0.0 ? r * (q_pos / r) : 0.0;
  const double frac = recent_total_weight > 0.0 ? recent_pos_weight / recent_total_weight : 0.0;
  return own + (1.0 - r) * frac;
}

CascadeSimulator::CascadeSimulator(const DirectedGraph& graph, const DerivedWeights& weights)
    : graph_(graph), weights_(weights) {
  if (weights.edge_weight.size() != graph.edge_count())
    throw std::invalid_argument("weights do not match graph");
  const std::size_t n = graph.node_count();
  step_.assign(n, kNever);
  sign_.assign(n, 0);
  threshold_.assign(n, 1.0);
  active_weight_.assign(n, 0.0);
  recent_total_.assign(n, 0.0);
  recent_pos_.assign(n, 0.0);
  mark_.assign(n, 0);
}

void CascadeSimulator::start(std::span<const NodeId> seeds) {
  for (NodeId s : seeds) graph_.check_node(s);
  std::fill(step_.begin(), step_.end(), kNever);
  std::fill(sign_.begin(), sign_.end(), Sign{0});
  std::fill(active_weight_.begin(), active_weight_.end(), 0.0);
  frontier_.clear();
  for (NodeId s : seeds) {
    if (step_[s] == 1) continue;
    step_[s] = 1;
    sign_[s] = 1;
    frontier_.push_back(s);
  }
  std::sort(frontier_.begin(), frontier_.end());
  active_count_ = positive_count_ = frontier_.size();
  last_step_ = 1;
}

void CascadeSimulator::run(Model model, std::span<const NodeId> seeds, Rng& rng) {
  start(seeds);
  if (model == Model::Tsn) run_triggering(rng);
  else run_threshold(model == Model::Ltn && weights_.has_autonomy(), rng);
}

void CascadeSimulator::run_threshold(bool signed_model, Rng& rng) {
  const std::size_t n = graph_.node_count();
  for (std::size_t v = 0; v < n; ++v) threshold_[v] = rng.uniform_open_closed();
  int tau = 1;
  while (!frontier_.empty()) {
    ++tau;
    ++stamp_;
    touched_.clear();
    // Weight arriving from nodes activated at tau - 1.
    for (NodeId u : frontier_) {
      const bool positive = sign_[u] > 0;
      for (EdgeId e : graph_.out_edges(u)) {
        const NodeId v = graph_.edge(e).tail;
        if (step_[v] != kNever) continue;
        if (mark_[v] != stamp_) {
          mark_[v] = stamp_;
          recent_total_[v] = 0.0;
          recent_pos_[v] = 0.0;
          touched_.push_back(v);
        }
        const double w = weights_.edge_weight[e];
        recent_total_[v] += w;
        if (positive) recent_pos_[v] += w;
      }
    }
    std::sort(touched_.begin(), touched_.end());
    next_.clear();
    for (NodeId v : touched_) {
      active_weight_[v] += recent_total_[v];
      if (active_weight_[v] < threshold_[v]) continue;
      step_[v] = tau;
      ++active_count_;
      Sign s = 1;
      if (signed_model) {
        if (!(recent_total_[v] > 0.0)) {
          ++degenerate_;
          std::cerr << "ltn: activation of node " << v << " with zero recent weight\n";
        }
        const double p = positive_turn_probability(weights_.q_pos[v], weights_.q_neg[v],
                                                   recent_pos_[v], recent_total_[v]);
        assert(p >= 0.0 && p <= 1.0);
        s = rng.uniform() < p ? 1 : -1;
      }
      sign_[v] = s;
      if (s > 0) ++positive_count_;
      next_.push_back(v);
    }
    if (!next_.empty()) last_step_ = tau;
    frontier_.swap(next_);
  }
}

std::int8_t draw_correction(const DerivedWeights& weights, NodeId v, double u) {
  if (!weights.has_autonomy()) return 0;
  const double qn = weights.q_neg[v];
  const double qp = weights.q_pos[v];
  if (u < qn) return -1;
  if (u < 1.0 - qp) return 0;
  return 1;
}

void CascadeSimulator::run_triggering(Rng& rng) {
  // Entries (tail, edge) for edges out of nodes activated at tau - 1.
  std::vector<std::pair<NodeId, EdgeId>> arrivals;
  int tau = 1;
  while (!frontier_.empty()) {
    ++tau;
    arrivals.clear();
    for (NodeId u : frontier_)
      for (EdgeId e : graph_.out_edges(u)) {
        const NodeId v = graph_.edge(e).tail;
        if (step_[v] == kNever) arrivals.emplace_back(v, e);
      }
    std::stable_sort(arrivals.begin(), arrivals.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    next_.clear();
    for (std::size_t i = 0; i < arrivals.size();) {
      const NodeId v = arrivals[i].first;
      std::size_t j = i;
      double fresh = 0.0;
      for (; j < arrivals.size() && arrivals[j].first == v; ++j) fresh += weights_.edge_weight[arrivals[j].second];
      // active_weight_ holds the weight of parents in B_{tau-2}; v has not
      // chosen any of them.
      const double remaining = 1.0 - active_weight_[v];
      const double x = rng.uniform() * remaining;
      if (remaining > 0.0 && x < fresh) {
        double cum = 0.0;
        EdgeId chosen = arrivals[j - 1].second;
        for (std::size_t k = i; k < j; ++k) {
          cum += weights_.edge_weight[arrivals[k].second];
          if (x < cum) {
            chosen = arrivals[k].second;
            break;
          }
        }
        const NodeId parent = graph_.edge(chosen).head;
        const std::int8_t y = weights_.has_autonomy() ? draw_correction(weights_, v, rng.uniform()) : 0;
        const Sign s = y == 0 ? sign_[parent] : static_cast<Sign>(y);
        step_[v] = tau;
        sign_[v] = s;
        ++active_count_;
        if (s > 0) ++positive_count_;
        next_.push_back(v);
      }
      active_weight_[v] += fresh;
      i = j;
    }
    if (!next_.empty()) last_step_ = tau;
    frontier_.swap(next_);
  }
}

DiffusionTrace CascadeSimulator::trace() const {
  DiffusionTrace t;
  t.activation_step = step_;
  t.sign = sign_;
  t.steps.resize(static_cast<std::size_t>(last_step_) + 1);
  for (NodeId v = 0; v < step_.size(); ++v) {
    if (step_[v] == kNever) continue;
    for (int tau = step_[v]; tau <= last_step_; ++tau) {
      DiffusionStep& st = t.steps[tau];
      st.active.push_back(v);
      (sign_[v] > 0 ? st.positive : st.negative).push_back(v);
    }
  }
  return t;
}

namespace {
DiffusionTrace run_one(Model model, const DirectedGraph& graph, const DerivedWeights& weights,
                       std::span<const NodeId> seeds, Rng& rng) {
  CascadeSimulator sim(graph, weights);
  sim.run(model, seeds, rng);
  return sim.trace();
}
}  // namespace

DiffusionTrace run_lt(const DirectedGraph& graph, const DerivedWeights& weights,
                      std::span<const NodeId> seeds, Rng& rng) {
  return run_one(Model::Lt, graph, weights, seeds, rng);
}

DiffusionTrace run_ltn(const DirectedGraph& graph, const DerivedWeights& weights,
                       std::span<const NodeId> seeds, Rng& rng) {
  return run_one(Model::Ltn, graph, weights, seeds, rng);
}

DiffusionTrace run_tsn(const DirectedGraph& graph, const DerivedWeights& weights,
                       std::span<const NodeId> seeds, Rng& rng) {
  return run_one(Model::Tsn, graph, weights, seeds, rng);
}

std::string check_trace(const DiffusionTrace& trace, std::span<const NodeId> seeds) {
  const std::size_t n = trace.node_count();
  if (trace.activation_step.size() != n) return "activation_step size mismatch";
  if (trace.steps.size() < 2) return "trace must contain steps 0 and 1";
  if (!trace.steps[0].active.empty()) return "A_0 is not empty";
  std::vector<NodeId> s(seeds.begin(), seeds.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (trace.steps[1].active != s || trace.steps[1].positive != s || !trace.steps[1].negative.empty())
    return "step 1 does not equal the positive seed set";
  for (std::size_t tau = 0; tau < trace.steps.size(); ++tau) {
    const DiffusionStep& st = trace.steps[tau];
    std::vector<NodeId> merged;
    std::merge(st.positive.begin(), st.positive.end(), st.negative.begin(), st.negative.end(),
               std::back_inserter(merged));
    if (merged != st.active) return "positive and negative sets do not partition A at step " + std::to_string(tau);
    if (std::adjacent_find(merged.begin(), merged.end()) != merged.end())
      return "positive and negative sets overlap at step " + std::to_string(tau);
    if (tau > 0) {
      const DiffusionStep& prev = trace.steps[tau - 1];
      if (!std::includes(st.positive.begin(), st.positive.end(), prev.positive.begin(), prev.positive.end()) ||
          !std::includes(st.negative.begin(), st.negative.end(), prev.negative.begin(), prev.negative.end()))
        return "sets shrink at step " + std::to_string(tau);
    }
  }
  if (trace.last_step() - 1 > static_cast<int>(n - s.size())) return "too many steps";
  for (NodeId v = 0; v < n; ++v) {
    const int st = trace.activation_step[v];
    if ((st == kNever) != (trace.sign[v] == 0)) return "sign and activation step disagree";
    if (st != kNever) {
      if (st < 1 || st > trace.last_step()) return "activation step out of range";
      const auto& act = trace.steps[st].active;
      if (!std::binary_search(act.begin(), act.end(), v)) return "activation step not reflected in steps";
      const auto& before = trace.steps[st - 1].active;
      if (std::binary_search(before.begin(), before.end(), v)) return "node active before its step";
    }
  }
  return {};
}

namespace {
void write_ids(std::ostream& out, const std::vector<NodeId>& ids) {
  out << '[';
  for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? "," : "") << ids[i];
  out << ']';
}
}  // namespace

void write_trace_jsonl(std::ostream& out, const DiffusionTrace& trace, std::size_t run_index) {
  for (std::size_t tau = 0; tau < trace.steps.size(); ++tau) {
    const auto& st = trace.steps[tau];
    out << "{\"run\":" << run_index << ",\"step\":" << tau << ",\"active\":";
    write_ids(out, st.active);
    out << ",\"positive\":";
    write_ids(out, st.positive);
    out << ",\"negative\":";
    write_ids(out, st.negative);
    out << "}\n";
  }
}

std::optional<NodeId> LiveEdgeSample::chosen_in_neighbor(const DirectedGraph& graph, NodeId v) const {
  if (chosen_edge[v] == kNone) return std::nullopt;
  return graph.edge(chosen_edge[v]).head;
}

LiveEdgeSample sample_live_edge_graph(const DirectedGraph& graph, const DerivedWeights& weights, Rng& rng) {
  const std::size_t n = graph.node_count();
  LiveEdgeSample s;
  s.chosen_edge.assign(n, LiveEdgeSample::kNone);
  s.correction.assign(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    const double x = rng.uniform();
    double cum = 0.0;
    for (EdgeId e : graph.in_edges(v)) {
      cum += weights.edge_weight[e];
      if (x < cum) {
        s.chosen_edge[v] = e;
        break;
      }
    }
  }
  if (weights.has_autonomy())
    for (NodeId v = 0; v < n; ++v)
      if (s.chosen_edge[v] != LiveEdgeSample::kNone) s.correction[v] = draw_correction(weights, v, rng.uniform());
  return s;
}

void resolve_live_edge_signs(std::span<const std::int32_t> parent, std::span<const std::int8_t> correction,
                             std::span<const std::uint8_t> is_seed, std::vector<Sign>& sign,
                             std::vector<std::int32_t>& scratch) {
  const std::size_t n = parent.size();
  // 2: unresolved, 3: on the current chain, else a resolved sign.
  constexpr Sign kOpen = 2, kOnChain = 3;
  sign.assign(n, kOpen);
  scratch.clear();
  for (std::size_t start = 0; start < n; ++start) {
    if (sign[start] != kOpen) continue;
    std::size_t v = start;
    Sign root = 0;
    while (true) {
      if (is_seed[v]) {
        sign[v] = 1;
        root = 1;
        break;
      }
      if (sign[v] == kOnChain) {  // cycle without a seed
        root = 0;
        break;
      }
      if (sign[v] != kOpen) {
        root = sign[v];
        break;
      }
      if (parent[v] < 0) {
        sign[v] = 0;
        root = 0;
        break;
      }
      sign[v] = kOnChain;
      scratch.push_back(static_cast<std::int32_t>(v));
      v = static_cast<std::size_t>(parent[v]);
    }
    while (!scratch.empty()) {
      const std::size_t u = static_cast<std::size_t>(scratch.back());
      scratch.pop_back();
      if (root != 0 && correction[u] != 0) root = correction[u];
      sign[u] = root;
    }
  }
}

}  // namespace ltn
