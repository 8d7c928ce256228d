#pragma once

// Tensor network of a factored Gibbs kernel. Each mode k is a label; its delta
// node D^(k) is never stored, it is the set of legs carrying label k plus the
// open edge. Low-rank matrix factors contribute two vertices joined by a rank
// label, tensor-train cores contribute one vertex each joined by bond labels.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "mmot/factor_model.hpp"
#include "mmot/lowrank.hpp"
#include "mmot/tensor.hpp"

namespace mmot {

struct Vertex {
  std::vector<int> labels;
  std::vector<double> values;  // row-major over labels
  int factor = -1;             // index of the originating factor or core
};

struct Leg {
  int vertex;
  int position;
};

struct DeltaNode {
  int mode;
  std::vector<Leg> legs;
  // incident factor legs plus the open edge
  std::size_t degree() const { return legs.size() + 1; }
};

// A label shared by vertices that is not a mode (rank or bond index).
struct InternalEdge {
  int label;
  std::size_t size;
  std::vector<int> vertices;
};

class FactorNetwork {
 public:
  FactorNetwork(std::vector<std::size_t> mode_sizes, std::vector<std::size_t> label_sizes,
                std::vector<Vertex> vertices);

  const std::vector<std::size_t>& mode_sizes() const { return mode_sizes_; }
  std::size_t order() const { return mode_sizes_.size(); }
  // Labels 0..m-1 are the modes.
  const std::vector<std::size_t>& label_sizes() const { return label_sizes_; }
  std::size_t num_labels() const { return label_sizes_.size(); }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<DeltaNode>& delta_nodes() const { return deltas_; }
  const std::vector<InternalEdge>& internal_edges() const { return edges_; }
  bool has_low_rank() const { return low_rank_; }

 private:
  std::vector<std::size_t> mode_sizes_;
  std::vector<std::size_t> label_sizes_;
  std::vector<Vertex> vertices_;
  std::vector<DeltaNode> deltas_;
  std::vector<InternalEdge> edges_;
  bool low_rank_ = false;
};

FactorNetwork build_network(const KernelModel& k);
FactorNetwork network_from_tt(const TTCores& tt);

class Scalings {
 public:
  explicit Scalings(const std::vector<std::size_t>& mode_sizes, std::vector<bool> fixed_mask = {});

  std::size_t order() const { return gammas_.size(); }
  const Vector& gamma(std::size_t k) const { return gammas_.at(k); }
  const std::vector<Vector>& gammas() const { return gammas_; }
  Vector beta(std::size_t k) const;
  bool fixed(std::size_t k) const { return fixed_.at(k); }
  const std::vector<bool>& fixed_mask() const { return fixed_; }
  // Version stamp of gamma_k; unique across all Scalings objects.
  std::uint64_t stamp(std::size_t k) const { return stamps_.at(k); }

  void set(std::size_t k, Vector gamma);
  // gamma_k <- gamma_k * factor (elementwise).
  void multiply(std::size_t k, std::span<const double> factor);
  void scale(std::size_t k, double c);

 private:
  void touch(std::size_t k);
  std::vector<Vector> gammas_;
  std::vector<bool> fixed_;
  std::vector<std::uint64_t> stamps_;
};

// Operands are numbered: network vertices 0..V-1, scaling leaves V..V+m-1,
// then any extra leaves, then step results in step order.
struct ContractionStep {
  std::vector<int> operands;
  std::vector<int> result_labels;
  std::vector<int> summed_labels;
  std::vector<int> leaves;  // sorted leaf ids feeding this result
  std::uint64_t flops = 0;
  bool final = false;
};

struct ContractionPlan {
  std::vector<int> output_labels;
  std::size_t num_leaves = 0;
  std::vector<ContractionStep> steps;
  std::uint64_t total_flops = 0;
};

// Variable elimination over labels; every step removes one label together
// with any label that no other tensor carries. The greedy passes choose
// the next label by
//   GreedySize:       smallest result, then fewest flops, then lowest label
//   GreedyCost:       fewest flops, then smallest result, then lowest label
//   GreedyModesFirst: mode labels (delta fusions) before internal labels,
//                     then as GreedyCost
// Greedy runs all three and keeps the cheapest plan (first one on ties).
// Sequential eliminates in ascending label order.
enum class PlanStrategy { Greedy, GreedySize, GreedyCost, GreedyModesFirst, Sequential };

// Labels below num_mode_labels are treated as modes by GreedyModesFirst.
ContractionPlan plan_contraction(std::span<const std::size_t> label_sizes,
                                 const std::vector<std::vector<int>>& leaf_labels,
                                 std::vector<int> output_labels,
                                 PlanStrategy strategy = PlanStrategy::Greedy,
                                 int num_mode_labels = 0);

ContractionPlan plan_marginal(const FactorNetwork& net, int k,
                              PlanStrategy strategy = PlanStrategy::Greedy);

std::uint64_t flops(const ContractionPlan& plan);

// Cost of multiplying operands (sorted by size, running label union) and then
// summing `summed` out of the product.
std::uint64_t step_flops(std::span<const std::size_t> label_sizes,
                         const std::vector<std::vector<int>>& operand_labels,
                         std::span<const int> result_labels, std::span<const int> summed_labels);

// Rank-1 term prefactor * outer(w_1..w_m) left by rounding.
struct Rank1Correction {
  double prefactor = 0.0;
  std::vector<Vector> vectors;

  bool is_zero() const { return prefactor == 0.0 || vectors.empty(); }
  DenseTensor materialize() const;
  Vector marginal(std::size_t k) const;
  double total() const;
};

class ContractionEngine {
 public:
  explicit ContractionEngine(FactorNetwork net, PlanStrategy strategy = PlanStrategy::Greedy,
                             bool cache_intermediates = true);

  const FactorNetwork& network() const { return net_; }
  const ContractionPlan& plan(int k);

  Vector marginal(const Scalings& s, int k);
  std::vector<Vector> all_marginals(const Scalings& s);
  // Total scaled mass sum(P).
  double total_mass(const Scalings& s);

  std::uint64_t flops() const { return flops_.load(); }
  void reset_flops() { flops_ = 0; }
  void clear_cache();

 private:
  struct CacheKey {
    std::vector<int> leaves;
    std::vector<int> labels;
    auto operator<=>(const CacheKey&) const = default;
  };
  struct CacheEntry {
    std::vector<std::uint64_t> stamps;
    std::vector<double> values;
  };

  Vector run(const ContractionPlan& plan, const Scalings& s);

  FactorNetwork net_;
  PlanStrategy strategy_;
  bool use_cache_;
  std::map<int, ContractionPlan> plans_;
  std::map<CacheKey, CacheEntry> cache_;
  std::mutex mutex_;
  std::atomic<std::uint64_t> flops_{0};
};

// Uncached evaluation of one plan.
Vector eval_marginal(const FactorNetwork& net, const Scalings& s, int k,
                     const ContractionPlan& plan);

struct AllMarginals {
  std::vector<Vector> marginals;
  std::uint64_t flops = 0;
};
AllMarginals eval_all_marginals(const FactorNetwork& net, const Scalings& s);

// <C, P> for P the scaled network plus an optional rank-1 term.
double eval_cost(const FactorNetwork& net, const Scalings& s, const CostModel& c,
                 const Rank1Correction* correction = nullptr);

// Scaled network as a dense tensor (desk scale).
DenseTensor materialize(const FactorNetwork& net, const Scalings& s,
                        std::size_t budget = kDefaultBudget);

}  // namespace mmot
