#pragma once

#include "ltn/graph.hpp"
#include "ltn/rng.hpp"
#include "ltn/weights.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <span>
#include <vector>

namespace ltn {

enum class Model { Lt, Ltn, Tsn };

Model parse_model(const std::string& name);
const char* model_name(Model model);

// Activation step of a node that never activates.
inline constexpr int kNever = std::numeric_limits<int>::max();

// Signs: +1 positive, -1 negative, 0 inactive.
using Sign = std::int8_t;

struct DiffusionStep {
  std::vector<NodeId> active, positive, negative;  // sorted ids
};

// One cascade. Seeds are activated at step 1; step 0 is empty.
struct DiffusionTrace {
  std::vector<int> activation_step;  // kNever when inactive
  std::vector<Sign> sign;
  std::vector<DiffusionStep> steps;  // steps[tau] for tau = 0..last

  std::size_t node_count() const { return sign.size(); }
  int last_step() const { return static_cast<int>(steps.size()) - 1; }
  std::size_t active_count() const;
  std::size_t positive_count() const;
};

// Positive-turn probability given autonomy factors and the weight of
// the most recent activated in-neighbours (total and positive part).
double positive_turn_probability(double q_pos, double q_neg, double recent_pos_weight,
                                 double recent_total_weight);

// Reusable cascade workspace. Not thread safe; use one per worker.
class CascadeSimulator {
 public:
  CascadeSimulator(const DirectedGraph& graph, const DerivedWeights& weights);

  // Runs one cascade. Seed ids are validated; duplicates are ignored.
  void run(Model model, std::span<const NodeId> seeds, Rng& rng);

  std::span<const int> activation_step() const { return step_; }
  std::span<const Sign> sign() const { return sign_; }
  std::size_t active_count() const { return active_count_; }
  std::size_t positive_count() const { return positive_count_; }
  int last_step() const { return last_step_; }
  // Number of activations where the recent-weight denominator was zero.
  std::size_t degenerate_sign_draws() const { return degenerate_; }

  DiffusionTrace trace() const;

 private:
  void start(std::span<const NodeId> seeds);
  void run_threshold(bool signed_model, Rng& rng);
  void run_triggering(Rng& rng);

  const DirectedGraph& graph_;
  const DerivedWeights& weights_;
  std::vector<int> step_;
  std::vector<Sign> sign_;
  std::vector<double> threshold_, active_weight_, recent_total_, recent_pos_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
  std::vector<NodeId> frontier_, next_, touched_;
  std::size_t active_count_ = 0, positive_count_ = 0, degenerate_ = 0;
  int last_step_ = 0;
};

DiffusionTrace run_lt(const DirectedGraph& graph, const DerivedWeights& weights,
                      std::span<const NodeId> seeds, Rng& rng);
DiffusionTrace run_ltn(const DirectedGraph& graph, const DerivedWeights& weights,
                       std::span<const NodeId> seeds, Rng& rng);
DiffusionTrace run_tsn(const DirectedGraph& graph, const DerivedWeights& weights,
                       std::span<const NodeId> seeds, Rng& rng);

// Checks the structural trace invariants; returns an empty string when all
// hold, else a description of the first failure.
std::string check_trace(const DiffusionTrace& trace, std::span<const NodeId> seeds);

// One JSON object per step: {"run","step","active","positive","negative"}.
void write_trace_jsonl(std::ostream& out, const DiffusionTrace& trace, std::size_t run_index);

// Full (non-lazy) triggering sample: each node picks at most one in-edge and a
// sign correction on it.
struct LiveEdgeSample {
  static constexpr EdgeId kNone = std::numeric_limits<EdgeId>::max();
  std::vector<EdgeId> chosen_edge;   // kNone when nothing is chosen
  std::vector<std::int8_t> correction;  // -1, 0, +1; 0 when nothing is chosen

  std::optional<NodeId> chosen_in_neighbor(const DirectedGraph& graph, NodeId v) const;
};

LiveEdgeSample sample_live_edge_graph(const DirectedGraph& graph, const DerivedWeights& weights,
                                      Rng& rng);

// Draws the sign correction of a chosen edge into node v.
std::int8_t draw_correction(const DerivedWeights& weights, NodeId v, double u);

// Signs of all nodes in a live-edge realization given a seed mask. `parent`
// holds the chosen in-neighbour or -1. Inactive nodes get 0.
void resolve_live_edge_signs(std::span<const std::int32_t> parent,
                             std::span<const std::int8_t> correction,
                             std::span<const std::uint8_t> is_seed, std::vector<Sign>& sign,
                             std::vector<std::int32_t>& scratch);

}  // namespace ltn
