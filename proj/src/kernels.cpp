#include "mmot/kernels.hpp"

#include <algorithm>
#include <string>

#include <omp.h>

#include "mmot/error.hpp"

namespace mmot::kernels {

namespace {

struct PairLayout {
  std::vector<std::size_t> r_ext, r_sa, r_sb;
  std::vector<std::size_t> s_ext, s_sa, s_sb;
  std::size_t out_size = 1;
  std::size_t sum_size = 1;
};

std::vector<std::size_t> label_strides(std::span<const int> labels,
                                       std::span<const std::size_t> label_sizes,
                                       std::size_t num_labels) {
  std::vector<std::size_t> stride(num_labels, 0);
  std::size_t s = 1;
  for (std::size_t j = labels.size(); j-- > 0;) {
    const auto l = static_cast<std::size_t>(labels[j]);
    if (l >= num_labels) throw DimensionError("label id out of range");
    if (stride[l] != 0) throw DimensionError("repeated label within one operand");
    stride[l] = s;
    s *= label_sizes[l];
  }
  return stride;
}

PairLayout make_layout(LabeledView a, LabeledView b, std::span<const int> result,
                       std::span<const int> summed, std::span<const std::size_t> sizes) {
  const std::size_t nl = sizes.size();
  const auto sa = label_strides(a.labels, sizes, nl);
  const auto sb = label_strides(b.labels, sizes, nl);
  std::vector<char> placed(nl, 0);
  auto in_a = [&](int l) { return std::find(a.labels.begin(), a.labels.end(), l) != a.labels.end(); };
  auto in_b = [&](int l) { return std::find(b.labels.begin(), b.labels.end(), l) != b.labels.end(); };

  PairLayout lay;
  for (int l : result) {
    const auto u = static_cast<std::size_t>(l);
    if (u >= nl || placed[u]) throw DimensionError("invalid result label");
    if (!in_a(l) && !in_b(l)) throw DimensionError("result label absent from both operands");
    placed[u] = 1;
    lay.r_ext.push_back(sizes[u]);
    lay.r_sa.push_back(sa[u]);
    lay.r_sb.push_back(sb[u]);
    lay.out_size *= sizes[u];
  }
  for (int l : summed) {
    const auto u = static_cast<std::size_t>(l);
    if (u >= nl || placed[u]) throw DimensionError("invalid summed label");
    placed[u] = 1;
    lay.s_ext.push_back(sizes[u]);
    lay.s_sa.push_back(sa[u]);
    lay.s_sb.push_back(sb[u]);
    lay.sum_size *= sizes[u];
  }
  for (int l : a.labels)
    if (!placed[static_cast<std::size_t>(l)]) throw DimensionError("operand label neither kept nor summed");
  for (int l : b.labels)
    if (!placed[static_cast<std::size_t>(l)]) throw DimensionError("operand label neither kept nor summed");

  std::size_t a_size = 1, b_size = 1;
  for (int l : a.labels) a_size *= sizes[static_cast<std::size_t>(l)];
  for (int l : b.labels) b_size *= sizes[static_cast<std::size_t>(l)];
  if (a.values.size() != a_size || b.values.size() != b_size)
    throw DimensionError("operand value count does not match its labels");
  return lay;
}

void run_range(const PairLayout& lay, const double* a, const double* b, double* out,
               std::size_t begin, std::size_t end) {
  const std::size_t nr = lay.r_ext.size();
  const std::size_t ns = lay.s_ext.size();
  std::vector<std::size_t> idx(nr, 0);
  std::size_t off_a = 0, off_b = 0;
  std::size_t rem = begin;
  for (std::size_t d = nr; d-- > 0;) {
    idx[d] = rem % lay.r_ext[d];
    rem /= lay.r_ext[d];
    off_a += idx[d] * lay.r_sa[d];
    off_b += idx[d] * lay.r_sb[d];
  }

  std::vector<std::size_t> sidx(ns, 0);
  const std::size_t inner_ext = ns ? lay.s_ext[ns - 1] : 1;
  const std::size_t inner_sa = ns ? lay.s_sa[ns - 1] : 0;
  const std::size_t inner_sb = ns ? lay.s_sb[ns - 1] : 0;
  const std::size_t outer_count = lay.sum_size / inner_ext;

  for (std::size_t o = begin; o < end; ++o) {
    double acc = 0.0;
    if (ns == 0) {
      acc = a[off_a] * b[off_b];
    } else {
      std::fill(sidx.begin(), sidx.end(), 0);
      std::size_t pa = off_a, pb = off_b;
      for (std::size_t c = 0; c < outer_count; ++c) {
        for (std::size_t j = 0; j < inner_ext; ++j) acc += a[pa + j * inner_sa] * b[pb + j * inner_sb];
        for (std::size_t d = ns - 1; d-- > 0;) {
          ++sidx[d];
          pa += lay.s_sa[d];
          pb += lay.s_sb[d];
          if (sidx[d] < lay.s_ext[d]) break;
          pa -= lay.s_sa[d] * lay.s_ext[d];
          pb -= lay.s_sb[d] * lay.s_ext[d];
          sidx[d] = 0;
        }
      }
    }
    out[o] = acc;
    for (std::size_t d = nr; d-- > 0;) {
      ++idx[d];
      off_a += lay.r_sa[d];
      off_b += lay.r_sb[d];
      if (idx[d] < lay.r_ext[d]) break;
      off_a -= lay.r_sa[d] * lay.r_ext[d];
      off_b -= lay.r_sb[d] * lay.r_ext[d];
      idx[d] = 0;
    }
  }
}

}  // namespace

void contract_pair_serial(LabeledView a, LabeledView b, std::span<const int> result_labels,
                          std::span<const int> summed_labels,
                          std::span<const std::size_t> label_sizes, std::span<double> out) {
  const auto lay = make_layout(a, b, result_labels, summed_labels, label_sizes);
  if (out.size() != lay.out_size) throw DimensionError("output buffer has the wrong size");
  run_range(lay, a.values.data(), b.values.data(), out.data(), 0, lay.out_size);
}

void contract_pair_parallel(LabeledView a, LabeledView b, std::span<const int> result_labels,
                            std::span<const int> summed_labels,
                            std::span<const std::size_t> label_sizes, std::span<double> out) {
  const auto lay = make_layout(a, b, result_labels, summed_labels, label_sizes);
  if (out.size() != lay.out_size) throw DimensionError("output buffer has the wrong size");
  const double* pa = a.values.data();
  const double* pb = b.values.data();
  double* po = out.data();
  const std::size_t total = lay.out_size;
#pragma omp parallel
  {
    const auto nt = static_cast<std::size_t>(omp_get_num_threads());
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t chunk = (total + nt - 1) / nt;
    const std::size_t begin = std::min(total, tid * chunk);
    const std::size_t end = std::min(total, begin + chunk);
    if (begin < end) run_range(lay, pa, pb, po, begin, end);
  }
}

void contract_pair(LabeledView a, LabeledView b, std::span<const int> result_labels,
                   std::span<const int> summed_labels, std::span<const std::size_t> label_sizes,
                   std::span<double> out) {
  std::size_t work = out.size();
  for (int l : summed_labels) work *= label_sizes[static_cast<std::size_t>(l)];
  if (work >= kParallelThreshold && omp_get_max_threads() > 1)
    contract_pair_parallel(a, b, result_labels, summed_labels, label_sizes, out);
  else
    contract_pair_serial(a, b, result_labels, summed_labels, label_sizes, out);
}

namespace {

void check_gammas(const DenseTensor& k, std::span<const Vector> gammas) {
  if (gammas.size() != k.order()) throw DimensionError("one scaling vector per mode required");
  for (std::size_t d = 0; d < k.order(); ++d)
    if (gammas[d].size() != k.dim(d)) throw DimensionError("scaling vector length mismatch");
}

void accumulate_range(const DenseTensor& k, std::span<const Vector> gammas, std::size_t begin,
                      std::size_t end, std::vector<Vector>& acc) {
  const std::size_t m = k.order();
  std::vector<std::size_t> idx(m);
  k.unravel(begin, idx);
  for (std::size_t flat = begin; flat < end; ++flat) {
    double w = k[flat];
    for (std::size_t d = 0; d < m; ++d) w *= gammas[d][idx[d]];
    for (std::size_t d = 0; d < m; ++d) acc[d][idx[d]] += w;
    for (std::size_t d = m; d-- > 0;) {
      if (++idx[d] < k.dim(d)) break;
      idx[d] = 0;
    }
  }
}

std::vector<Vector> zero_marginals(const DenseTensor& k) {
  std::vector<Vector> r;
  for (std::size_t d = 0; d < k.order(); ++d) r.emplace_back(k.dim(d), 0.0);
  return r;
}

}  // namespace

std::vector<Vector> scaled_marginals_serial(const DenseTensor& k, std::span<const Vector> gammas) {
  check_gammas(k, gammas);
  auto r = zero_marginals(k);
  accumulate_range(k, gammas, 0, k.size(), r);
  return r;
}

std::vector<Vector> scaled_marginals_parallel(const DenseTensor& k,
                                              std::span<const Vector> gammas) {
  check_gammas(k, gammas);
  const int max_threads = omp_get_max_threads();
  std::vector<std::vector<Vector>> partial(static_cast<std::size_t>(max_threads));
  const std::size_t total = k.size();
  int used = 1;
#pragma omp parallel
  {
    const auto nt = static_cast<std::size_t>(omp_get_num_threads());
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
#pragma omp single
    used = static_cast<int>(nt);
    const std::size_t chunk = (total + nt - 1) / nt;
    const std::size_t begin = std::min(total, tid * chunk);
    const std::size_t end = std::min(total, begin + chunk);
    partial[tid] = zero_marginals(k);
    if (begin < end) accumulate_range(k, gammas, begin, end, partial[tid]);
  }
  // Fixed reduction order keeps the result independent of scheduling.
  auto r = zero_marginals(k);
  for (int t = 0; t < used; ++t)
    for (std::size_t d = 0; d < k.order(); ++d)
      for (std::size_t i = 0; i < k.dim(d); ++i) r[d][i] += partial[static_cast<std::size_t>(t)][d][i];
  return r;
}

std::vector<Vector> scaled_marginals(const DenseTensor& k, std::span<const Vector> gammas) {
  if (k.size() * k.order() >= kParallelThreshold && omp_get_max_threads() > 1)
    return scaled_marginals_parallel(k, gammas);
  return scaled_marginals_serial(k, gammas);
}

}  // namespace mmot::kernels
