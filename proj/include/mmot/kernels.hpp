#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP variant; the dispatching overload picks one by work size. The serial
// and parallel pair-contraction kernels compute each output entry with the
// same summation order, so their results agree bitwise.

#include <cstddef>
#include <span>
#include <vector>

#include "mmot/tensor.hpp"

namespace mmot::kernels {

// Row-major values over `labels`; extents come from a shared label-size table.
struct LabeledView {
  std::span<const double> values;
  std::span<const int> labels;
};

// out[R] = sum over S of a[..] * b[..], where R = result_labels (in output
// order) and S = summed_labels. Every label of a and b must be in R or S.
void contract_pair_serial(LabeledView a, LabeledView b, std::span<const int> result_labels,
                          std::span<const int> summed_labels,
                          std::span<const std::size_t> label_sizes, std::span<double> out);
void contract_pair_parallel(LabeledView a, LabeledView b, std::span<const int> result_labels,
                            std::span<const int> summed_labels,
                            std::span<const std::size_t> label_sizes, std::span<double> out);
void contract_pair(LabeledView a, LabeledView b, std::span<const int> result_labels,
                   std::span<const int> summed_labels, std::span<const std::size_t> label_sizes,
                   std::span<double> out);

// All marginals of K x_1 diag(g_1) ... x_m diag(g_m) in one sweep over K.
std::vector<Vector> scaled_marginals_serial(const DenseTensor& k, std::span<const Vector> gammas);
std::vector<Vector> scaled_marginals_parallel(const DenseTensor& k,
                                              std::span<const Vector> gammas);
std::vector<Vector> scaled_marginals(const DenseTensor& k, std::span<const Vector> gammas);

// Work (multiply-adds) above which the dispatchers go parallel.
inline constexpr std::size_t kParallelThreshold = std::size_t{1} << 15;

}  // namespace mmot::kernels
