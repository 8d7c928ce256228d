#include "mmot/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mmot/error.hpp"

namespace mmot {

std::size_t product(std::span<const std::size_t> dims) {
  std::size_t p = 1;
  for (auto d : dims) p *= d;
  return p;
}

namespace {

void check_dims(const std::vector<std::size_t>& dims) {
  if (dims.empty()) throw DimensionError("tensor order must be at least 1");
  for (auto d : dims)
    if (d == 0) throw DimensionError("tensor dimensions must be positive");
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> dims, double fill)
    : dims_(std::move(dims)) {
  check_dims(dims_);
  values_.assign(product(dims_), fill);
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<double> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
  check_dims(dims_);
  if (values_.size() != product(dims_))
    throw DimensionError("value count " + std::to_string(values_.size()) +
                         " does not match dimensions");
}

DenseTensor DenseTensor::from_matrix(const Matrix& m) {
  DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      t.values_[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
  return t;
}

std::size_t DenseTensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) throw DimensionError("index arity mismatch");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (index[k] >= dims_[k]) throw DimensionError("index out of range");
    flat = flat * dims_[k] + index[k];
  }
  return flat;
}

void DenseTensor::unravel(std::size_t flat, std::span<std::size_t> index) const {
  for (std::size_t k = dims_.size(); k-- > 0;) {
    index[k] = flat % dims_[k];
    flat /= dims_[k];
  }
}

double& DenseTensor::at(std::span<const std::size_t> index) {
  return values_[flat_index(index)];
}

double DenseTensor::at(std::span<const std::size_t> index) const {
  return values_[flat_index(index)];
}

std::vector<std::size_t> DenseTensor::strides() const {
  std::vector<std::size_t> s(dims_.size(), 1);
  for (std::size_t k = dims_.size(); k-- > 1;) s[k - 1] = s[k] * dims_[k];
  return s;
}

Matrix DenseTensor::to_matrix() const {
  if (order() != 2) throw DimensionError("to_matrix requires an order-2 tensor");
  Matrix m(static_cast<Eigen::Index>(dims_[0]), static_cast<Eigen::Index>(dims_[1]));
  for (std::size_t i = 0; i < dims_[0]; ++i)
    for (std::size_t j = 0; j < dims_[1]; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values_[i * dims_[1] + j];
  return m;
}

double DenseTensor::sum() const { return mmot::sum(values_); }

double DenseTensor::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double DenseTensor::min() const { return *std::min_element(values_.begin(), values_.end()); }

DenseTensor mode_product(const DenseTensor& t, const Matrix& m, std::size_t k) {
  if (k >= t.order()) throw DimensionError("mode index out of range");
  if (static_cast<std::size_t>(m.cols()) != t.dim(k))
    throw DimensionError("matrix column count must equal dims[k]");
  auto dims = t.dims();
  const std::size_t nk = dims[k];
  const std::size_t nhat = static_cast<std::size_t>(m.rows());
  dims[k] = nhat;
  DenseTensor out(dims);
  // View T as (outer, n_k, inner) and the result as (outer, nhat, inner).
  std::size_t outer_count = 1, inner_count = 1;
  for (std::size_t j = 0; j < k; ++j) outer_count *= t.dim(j);
  for (std::size_t j = k + 1; j < t.order(); ++j) inner_count *= t.dim(j);
  for (std::size_t o = 0; o < outer_count; ++o)
    for (std::size_t j = 0; j < nhat; ++j)
      for (std::size_t i = 0; i < nk; ++i) {
        const double mji = m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
        const double* src = t.values().data() + (o * nk + i) * inner_count;
        double* dst = &out[(o * nhat + j) * inner_count];
        for (std::size_t q = 0; q < inner_count; ++q) dst[q] += mji * src[q];
      }
  return out;
}

Vector marginal(const DenseTensor& t, std::size_t k) {
  if (k >= t.order()) throw DimensionError("mode index out of range");
  const std::size_t nk = t.dim(k);
  std::size_t outer_count = 1, inner_count = 1;
  for (std::size_t j = 0; j < k; ++j) outer_count *= t.dim(j);
  for (std::size_t j = k + 1; j < t.order(); ++j) inner_count *= t.dim(j);
  Vector r(nk, 0.0);
  for (std::size_t o = 0; o < outer_count; ++o)
    for (std::size_t i = 0; i < nk; ++i) {
      const double* src = t.values().data() + (o * nk + i) * inner_count;
      double acc = 0.0;
      for (std::size_t q = 0; q < inner_count; ++q) acc += src[q];
      r[i] += acc;
    }
  return r;
}

double inner(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims()) throw DimensionError("inner product needs identical dims");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double entropy(const DenseTensor& t) {
  double h = 0.0;
  for (double v : t.values()) {
    if (v < 0.0) throw DimensionError("entropy of a tensor with negative entries");
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

DenseTensor outer(std::span<const Vector> vectors) {
  if (vectors.empty()) throw DimensionError("outer product of zero vectors");
  std::vector<std::size_t> dims;
  for (const auto& v : vectors) dims.push_back(v.size());
  DenseTensor out(dims);
  std::vector<std::size_t> idx(dims.size(), 0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    out.unravel(flat, idx);
    double p = 1.0;
    for (std::size_t k = 0; k < dims.size(); ++k) p *= vectors[k][idx[k]];
    out[flat] = p;
  }
  return out;
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("l1_distance length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace mmot
