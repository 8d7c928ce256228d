#include "mmot/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmot/error.hpp"

namespace mmot {

namespace {

void check_targets(const std::vector<std::size_t>& dims, const std::vector<Vector>& targets) {
  if (targets.size() != dims.size()) throw DimensionError("one target per mode required");
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (targets[k].size() != dims[k]) throw DimensionError("target length mismatch");
    for (double x : targets[k])
      if (!(x >= 0.0)) throw std::invalid_argument("targets must be non-negative");
  }
}

Vector shrink_factors(const Vector& target, const Vector& marginal) {
  Vector v(target.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(marginal[i] > 0.0)) throw PositivityError("rounding needs strictly positive marginals");
    v[i] = std::min(target[i] / marginal[i], 1.0);
  }
  return v;
}

// w_k = r_k - r_k(A); returns the prefactor ||w_1||^{-(m-1)} or 0.
double deficits(const std::vector<Vector>& targets, const std::vector<Vector>& marginals,
                std::vector<Vector>& w) {
  const std::size_t m = targets.size();
  w.assign(m, {});
  std::vector<double> norms(m);
  for (std::size_t k = 0; k < m; ++k) {
    w[k].resize(targets[k].size());
    for (std::size_t i = 0; i < w[k].size(); ++i) w[k][i] = targets[k][i] - marginals[k][i];
    norms[k] = l1_norm(w[k]);
  }
  for (std::size_t k = 1; k < m; ++k)
    if (std::abs(norms[k] - norms[0]) > 1e-8)
      throw std::runtime_error("rounding deficits disagree across modes: " + std::to_string(norms[0]) +
                               " vs " + std::to_string(norms[k]));
  if (norms[0] <= kZeroResidual) return 0.0;
  return std::pow(norms[0], -static_cast<double>(m - 1));
}

}  // namespace

DenseTensor round_dense(const DenseTensor& a, const std::vector<Vector>& targets) {
  check_targets(a.dims(), targets);
  for (double x : a.values())
    if (!(x > 0.0)) throw PositivityError("rounding input must be strictly positive");
  const std::size_t m = a.order();
  DenseTensor b = a;
  for (std::size_t k = 0; k < m; ++k) {
    const Vector v = shrink_factors(targets[k], marginal(b, k));
    // In-place mode-k diagonal scaling.
    const std::size_t stride = b.strides()[k];
    const std::size_t nk = b.dim(k);
    for (std::size_t flat = 0; flat < b.size(); ++flat) b[flat] *= v[(flat / stride) % nk];
  }
  std::vector<Vector> marg;
  for (std::size_t k = 0; k < m; ++k) marg.push_back(marginal(b, k));
  std::vector<Vector> w;
  const double pre = deficits(targets, marg, w);
  if (pre == 0.0) return b;
  DenseTensor corr = outer(w);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += pre * corr[i];
  return b;
}

StructuredRounding round_structured(MarginalOracle& oracle, const Scalings& s,
                                    const std::vector<Vector>& targets) {
  const auto dims = oracle.mode_sizes();
  check_targets(dims, targets);
  const std::size_t m = dims.size();
  StructuredRounding out{Scalings(dims), {}};
  for (std::size_t k = 0; k < m; ++k) out.scalings.set(k, s.gamma(k));
  for (std::size_t k = 0; k < m; ++k) {
    const Vector v = shrink_factors(targets[k], oracle.marginal(out.scalings, k));
    if (std::any_of(v.begin(), v.end(), [](double x) { return x != 1.0; })) out.scalings.multiply(k, v);
  }
  const auto marg = oracle.all_marginals(out.scalings);
  out.correction.prefactor = deficits(targets, marg, out.correction.vectors);
  if (out.correction.prefactor == 0.0) out.correction.vectors.clear();
  return out;
}

}  // namespace mmot
