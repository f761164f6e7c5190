#pragma once

#include "ltn/diffusion.hpp"
#include "ltn/graph.hpp"
#include "ltn/rng.hpp"
#include "ltn/weights.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace ltn {

struct InfluenceEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

inline constexpr double kNominalAlpha = 1.0 - 0.36787944117144233 - 0.01;

struct OracleResult {
  std::vector<NodeId> seed_set;  // in selection order
  InfluenceEstimate value_estimate;
  double alpha = kNominalAlpha;
  double gamma = 1.0;
};

// Monte Carlo spread: |A+| under LT-N when the weights carry autonomy
// factors, |A| under classical LT otherwise.
InfluenceEstimate estimate_influence(const DirectedGraph& graph, const DerivedWeights& weights,
                                     std::span<const NodeId> seeds, std::size_t n_samples,
                                     Rng& rng);

// Exact f+(S) by enumeration of every in-neighbour choice; the sign
// corrections of each choice are summed in closed form. Throws
// std::length_error when the number of choices exceeds `budget`.
double exact_positive_influence(const DirectedGraph& graph, const DerivedWeights& weights,
                                std::span<const NodeId> seeds,
                                std::uint64_t budget = 50'000'000);

// Upper bound on the realizations any seed set needs.
double full_realization_count(const DirectedGraph& graph, const DerivedWeights& weights);

// Number of realizations exact_positive_influence would enumerate.
double live_edge_realization_count(const DirectedGraph& graph, const DerivedWeights& weights,
                                   std::span<const NodeId> seeds);

// A fixed collection of sampled triggering realizations. Evaluates spread
// with common random numbers and supports incremental greedy gains.
class LiveEdgeBank {
 public:
  LiveEdgeBank(const DirectedGraph& graph, const DerivedWeights& weights, std::size_t worlds,
               Rng& rng);

  std::size_t size() const { return worlds_; }
  std::size_t node_count() const { return n_; }
  bool signed_model() const { return signed_; }

  InfluenceEstimate evaluate(std::span<const NodeId> seeds) const;

  // Incremental state for greedy selection.
  class Greedy {
   public:
    explicit Greedy(const LiveEdgeBank& bank);
    // Total (over worlds) of newly positive nodes if v were added.
    std::int64_t gain(NodeId v) const;
    void add(NodeId v);
    std::int64_t total() const { return total_; }

   private:
    std::int64_t walk(NodeId v, bool commit) const;
    const LiveEdgeBank& bank_;
    mutable std::vector<Sign> sign_;  // worlds x n
    std::vector<std::uint8_t> is_seed_;
    mutable std::vector<std::pair<NodeId, Sign>> stack_;
    std::int64_t total_ = 0;
  };

 private:
  std::size_t n_ = 0, worlds_ = 0;
  bool signed_ = false;
  std::vector<std::int32_t> parent_;       // worlds x n
  std::vector<std::int8_t> correction_;    // worlds x n
  std::vector<std::uint32_t> child_offset_;  // worlds x (n+1)
  std::vector<NodeId> children_;           // worlds x n
};

using SetEvaluator = std::function<double(std::span<const NodeId>)>;

struct GreedyOptions {
  std::size_t n_samples = 1000;  // triggering worlds shared by one greedy run
  // When set, marginal gains come from this evaluator instead of the bank.
  SetEvaluator exact;
  double tie_epsilon = 1e-12;
  // Optional brute-force optimum for reporting the realized ratio.
  std::optional<double> optimum;
};

OracleResult greedy_oracle(const DirectedGraph& graph, const DerivedWeights& weights,
                           std::size_t K, const GreedyOptions& options, Rng& rng);

// Exhaustive search over all subsets of size min(K, |V|) in lexicographic
// order. Throws std::length_error when C(|V|, K) exceeds `budget`.
OracleResult brute_force_opt(std::size_t node_count, std::size_t K, const SetEvaluator& evaluator,
                             std::uint64_t budget = 5'000'000, double tie_epsilon = 1e-12);

double binomial(std::size_t n, std::size_t k);

}  // namespace ltn
