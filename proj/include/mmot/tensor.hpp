#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mmot {

using Matrix = Eigen::MatrixXd;
using Vector = std::vector<double>;

// Order-m array of reals stored row-major (last index fastest).
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::size_t> dims, double fill = 0.0);
  DenseTensor(std::vector<std::size_t> dims, std::vector<double> values);

  static DenseTensor from_matrix(const Matrix& m);

  std::size_t order() const { return dims_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t dim(std::size_t k) const { return dims_.at(k); }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double& operator[](std::size_t flat) { return values_[flat]; }
  double operator[](std::size_t flat) const { return values_[flat]; }

  double& at(std::span<const std::size_t> index);
  double at(std::span<const std::size_t> index) const;

  std::size_t flat_index(std::span<const std::size_t> index) const;
  // Inverse of flat_index; writes into `index` (length order()).
  void unravel(std::size_t flat, std::span<std::size_t> index) const;

  // Strides in elements for each mode.
  std::vector<std::size_t> strides() const;

  // Only valid for order-2 tensors.
  Matrix to_matrix() const;

  double sum() const;
  double max_abs() const;
  double min() const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> values_;
};

std::size_t product(std::span<const std::size_t> dims);

// (T x_k M): replaces mode k of size n_k by the row count of M.
DenseTensor mode_product(const DenseTensor& t, const Matrix& m, std::size_t k);

// r_k(T): contraction with all-ones vectors on every mode except k.
Vector marginal(const DenseTensor& t, std::size_t k);

double inner(const DenseTensor& a, const DenseTensor& b);

// H(T) = -<T, log T> with 0 log 0 = 0. Throws on negative entries.
double entropy(const DenseTensor& t);

// Outer product of m >= 1 vectors.
DenseTensor outer(std::span<const Vector> vectors);

// Elementwise helpers used across modules.
double l1_norm(std::span<const double> v);
double l1_distance(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> v);

}  // namespace mmot
