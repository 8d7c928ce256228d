#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mmot/factor_model.hpp"
#include "mmot/tensor.hpp"

namespace mmot {

struct SvdResult {
  Matrix u;                     // n x r, orthonormal columns
  Vector singular_values;       // length r, non-increasing
  Matrix v;                     // n' x r, orthonormal columns
  std::size_t rank() const { return singular_values.size(); }
  Matrix reconstruct() const;
};

SvdResult truncated_svd(const Matrix& m, std::size_t r);

inline constexpr std::size_t kDefaultOversample = 10;
inline constexpr std::size_t kDefaultPowerIters = 2;

SvdResult randomized_svd(const Matrix& m, std::size_t r, std::size_t oversample = kDefaultOversample,
                         std::size_t power_iters = kDefaultPowerIters, std::uint64_t seed = 0);

enum class SvdMethod { Exact, Randomized };

// Entry count up to which positivity of U V^T is checked exhaustively.
inline constexpr std::size_t kPositivityExactLimit = kDefaultBudget;
inline constexpr std::size_t kPositivitySamples = 10'000;

// Rank-r factor U' = U diag(s), V' = V of a strictly positive kernel matrix.
// Throws PositivityError if the reconstruction has a nonpositive entry.
// For the randomized method the oversampling is reduced when r + 10 exceeds
// the smaller dimension.
KernelFactor lowrank_kernel_factor(const IndexTuple& alpha, const Matrix& k, std::size_t r,
                                   SvdMethod method = SvdMethod::Exact, std::uint64_t seed = 0);

// Smallest entry of U V^T; exhaustive below kPositivityExactLimit entries,
// otherwise over kPositivitySamples uniform draws.
double lowrank_min_entry(const LowRankPair& lr, std::uint64_t seed = 0);

struct LogErrorMode {
  bool sampled = false;
  std::size_t count = 1000;
  std::uint64_t seed = 0;
  static LogErrorMode exact() { return {}; }
  static LogErrorMode sample(std::size_t count, std::uint64_t seed) { return {true, count, seed}; }
};

// max |log K_I - log K~_I| over all I (exact) or over uniform draws (sampled).
double log_error(const KernelModel& k, const KernelModel& k_approx,
                 LogErrorMode mode = LogErrorMode::exact(), std::size_t budget = kDefaultBudget);

// max |log a - log b| over the entries of two factors on the same tuple.
double factor_log_error(const KernelFactor& a, const KernelFactor& b);

// Tensor train: cores[0] is n_1 x r_1, cores[k] is r_k x n_{k+1} x r_{k+1},
// cores.back() is r_{m-1} x n_m.
struct TTCores {
  std::vector<DenseTensor> cores;
  std::size_t order() const { return cores.size(); }
  std::vector<std::size_t> mode_sizes() const;
  std::vector<std::size_t> ranks() const;
};

// Sequential truncated SVDs of the unfoldings. ranks has m-1 entries and must
// satisfy r_k <= r_{k-1} n_k and r_k <= n_{k+1} ... n_m.
TTCores tt_svd(const DenseTensor& t, std::span<const std::size_t> ranks);

// Largest ranks tt_svd accepts for these mode sizes, capped at `cap`.
std::vector<std::size_t> tt_feasible_ranks(std::span<const std::size_t> dims, std::size_t cap);

DenseTensor tt_full(const TTCores& tt);
double tt_entry(const TTCores& tt, std::span<const std::size_t> index);

}  // namespace mmot
