#pragma once

// Graphical-model costs C_I = sum_alpha C^alpha_{I_alpha} and their Gibbs
// kernels K_I = prod_alpha K^alpha_{I_alpha}. Mode indices are zero-based.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "mmot/tensor.hpp"

namespace mmot {

inline constexpr std::size_t kDefaultBudget = 10'000'000;

// Strictly increasing, non-empty list of modes a factor depends on.
class IndexTuple {
 public:
  IndexTuple() = default;
  IndexTuple(std::initializer_list<int> modes);
  explicit IndexTuple(std::vector<int> modes);

  const std::vector<int>& modes() const { return modes_; }
  std::size_t size() const { return modes_.size(); }
  int operator[](std::size_t j) const { return modes_[j]; }
  bool contains(int mode) const;

  friend bool operator==(const IndexTuple&, const IndexTuple&) = default;

 private:
  std::vector<int> modes_;
};

struct CostFactor {
  IndexTuple alpha;
  DenseTensor values;
};

class CostModel {
 public:
  CostModel(std::vector<std::size_t> mode_sizes, std::vector<CostFactor> factors);

  const std::vector<std::size_t>& mode_sizes() const { return mode_sizes_; }
  std::size_t order() const { return mode_sizes_.size(); }
  const std::vector<CostFactor>& factors() const { return factors_; }
  // ||C||_inf for the assembled tensor: sum of per-factor maxima (entries are >= 0).
  double sup_norm_bound() const;

 private:
  std::vector<std::size_t> mode_sizes_;
  std::vector<CostFactor> factors_;
};

// Rank-r matrix factor U V^T; U is n_a x r and V is n_b x r.
struct LowRankPair {
  Matrix u;
  Matrix v;
  std::size_t rank() const { return static_cast<std::size_t>(u.cols()); }
  Matrix reconstruct() const { return u * v.transpose(); }
};

struct KernelFactor {
  IndexTuple alpha;
  std::variant<DenseTensor, LowRankPair> form;

  bool is_low_rank() const { return std::holds_alternative<LowRankPair>(form); }
  // Entry at the factor's local multi-index (one index per mode in alpha).
  double entry(std::span<const std::size_t> local_index) const;
  // Dense copy; low-rank pairs are expanded.
  DenseTensor to_dense() const;
};

class KernelModel {
 public:
  KernelModel(std::vector<std::size_t> mode_sizes, std::vector<KernelFactor> factors, double eta);

  const std::vector<std::size_t>& mode_sizes() const { return mode_sizes_; }
  std::size_t order() const { return mode_sizes_.size(); }
  const std::vector<KernelFactor>& factors() const { return factors_; }
  double eta() const { return eta_; }

  // K_I for a global multi-index, evaluated factor by factor.
  double entry(std::span<const std::size_t> index) const;
  // log K_I as the sum of factor logs; throws PositivityError on a
  // nonpositive factor entry.
  double log_entry(std::span<const std::size_t> index) const;

 private:
  std::vector<std::size_t> mode_sizes_;
  std::vector<KernelFactor> factors_;
  double eta_;
};

// K^alpha = exp(-(C^alpha / eta)) factor by factor.
KernelModel gibbs_factors(const CostModel& c, double eta);

DenseTensor assemble_dense_cost(const CostModel& c, std::size_t budget = kDefaultBudget);
DenseTensor assemble_dense_kernel(const KernelModel& k, std::size_t budget = kDefaultBudget);

// Squared Euclidean distances between the rows of x and the rows of y.
DenseTensor sqdist_cost(const Matrix& x, const Matrix& y);

}  // namespace mmot
