#pragma once

#include <cmath>
#include <vector>

#include "mmot/random.hpp"
#include "mmot/tensor.hpp"

namespace testutil {

inline mmot::DenseTensor random_tensor(std::vector<std::size_t> dims, mmot::Rng& rng, double lo = 0.1,
                                       double hi = 1.0) {
  mmot::DenseTensor t(std::move(dims));
  for (double& x : t.values()) x = lo + (hi - lo) * rng.uniform();
  return t;
}

inline mmot::Vector random_vector(std::size_t n, mmot::Rng& rng, double lo = 0.1, double hi = 1.0) {
  mmot::Vector v(n);
  for (double& x : v) x = lo + (hi - lo) * rng.uniform();
  return v;
}

inline mmot::Vector random_simplex(std::size_t n, mmot::Rng& rng) {
  auto v = random_vector(n, rng, 0.2, 1.0);
  double s = 0.0;
  for (double x : v) s += x;
  for (double& x : v) x /= s;
  return v;
}

inline double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(b[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testutil

#include "mmot/factor_model.hpp"
#include "mmot/network.hpp"

namespace testutil {

inline std::vector<mmot::IndexTuple> chain(int m) {
  std::vector<mmot::IndexTuple> f;
  for (int k = 0; k + 1 < m; ++k) f.push_back({k, k + 1});
  return f;
}

inline std::vector<mmot::IndexTuple> star(int m) {
  std::vector<mmot::IndexTuple> f;
  for (int k = 0; k + 1 < m; ++k) f.push_back({k, m - 1});
  return f;
}

// Five modes, one order-3 factor.
inline std::vector<mmot::IndexTuple> fig1_graph() { return {{0, 1}, {0, 3}, {1, 2, 3}, {3, 4}}; }

inline std::vector<mmot::IndexTuple> window5() {
  return {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 4}};
}

inline mmot::KernelModel random_kernel(const std::vector<mmot::IndexTuple>& f,
                                       const std::vector<std::size_t>& n, mmot::Rng& rng,
                                       double lo = 0.2, double hi = 1.2) {
  std::vector<mmot::KernelFactor> fs;
  for (const auto& a : f) {
    std::vector<std::size_t> dims;
    for (int k : a.modes()) dims.push_back(n[static_cast<std::size_t>(k)]);
    fs.push_back({a, random_tensor(dims, rng, lo, hi)});
  }
  return mmot::KernelModel(n, fs, 1.0);
}

// Matrix factors only; U and V with positive entries.
inline mmot::KernelModel random_lowrank_kernel(const std::vector<mmot::IndexTuple>& f,
                                               const std::vector<std::size_t>& n, std::size_t r,
                                               mmot::Rng& rng) {
  std::vector<mmot::KernelFactor> fs;
  for (const auto& a : f) {
    mmot::LowRankPair lr{mmot::Matrix(static_cast<Eigen::Index>(n[static_cast<std::size_t>(a[0])]),
                                      static_cast<Eigen::Index>(r)),
                         mmot::Matrix(static_cast<Eigen::Index>(n[static_cast<std::size_t>(a[1])]),
                                      static_cast<Eigen::Index>(r))};
    for (auto* m : {&lr.u, &lr.v})
      for (Eigen::Index i = 0; i < m->rows(); ++i)
        for (Eigen::Index j = 0; j < m->cols(); ++j) (*m)(i, j) = 0.1 + rng.uniform();
    fs.push_back({a, lr});
  }
  return mmot::KernelModel(n, fs, 1.0);
}

inline mmot::Scalings random_scalings(const std::vector<std::size_t>& n, mmot::Rng& rng) {
  mmot::Scalings s(n);
  for (std::size_t k = 0; k < n.size(); ++k) s.set(k, random_vector(n[k], rng, 0.2, 2.0));
  return s;
}

// K scaled by all gammas, materialized.
inline mmot::DenseTensor scaled_dense(const mmot::DenseTensor& k, const mmot::Scalings& s) {
  mmot::DenseTensor p = k;
  std::vector<std::size_t> idx(k.order());
  for (std::size_t f = 0; f < p.size(); ++f) {
    p.unravel(f, idx);
    for (std::size_t d = 0; d < k.order(); ++d) p[f] *= s.gamma(d)[idx[d]];
  }
  return p;
}

}  // namespace testutil

#include <Eigen/QR>
#include <limits>

namespace testutil {

// min <C, P> over tensors with the given marginals, by enumerating the basic
// feasible solutions of the marginal constraints (tiny instances only).
inline double lp_optimum(const mmot::DenseTensor& c, const std::vector<mmot::Vector>& targets) {
  const auto& dims = c.dims();
  const std::size_t nvar = c.size();
  std::size_t rows = 0, rank = 1;
  for (auto n : dims) {
    rows += n;
    rank += n - 1;
  }
  mmot::Matrix a = mmot::Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(nvar));
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows));
  std::vector<std::size_t> idx(dims.size());
  for (std::size_t f = 0; f < nvar; ++f) {
    c.unravel(f, idx);
    std::size_t off = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      a(static_cast<Eigen::Index>(off + idx[k]), static_cast<Eigen::Index>(f)) = 1.0;
      off += dims[k];
    }
  }
  std::size_t off = 0;
  for (std::size_t k = 0; k < dims.size(); ++k)
    for (std::size_t i = 0; i < dims[k]; ++i) b(static_cast<Eigen::Index>(off++)) = targets[k][i];

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(rank);
  // iterate over all rank-sized column subsets
  std::vector<bool> sel(nvar, false);
  std::fill(sel.begin(), sel.begin() + static_cast<long>(rank), true);
  do {
    std::size_t j = 0;
    for (std::size_t v = 0; v < nvar; ++v)
      if (sel[v]) pick[j++] = static_cast<int>(v);
    mmot::Matrix ab(a.rows(), static_cast<Eigen::Index>(rank));
    for (std::size_t q = 0; q < rank; ++q) ab.col(static_cast<Eigen::Index>(q)) = a.col(pick[q]);
    Eigen::ColPivHouseholderQR<mmot::Matrix> qr(ab);
    if (qr.rank() < static_cast<Eigen::Index>(rank)) continue;
    Eigen::VectorXd x = qr.solve(b);
    if ((ab * x - b).norm() > 1e-10) continue;
    if (x.minCoeff() < -1e-12) continue;
    double cost = 0.0;
    for (std::size_t q = 0; q < rank; ++q) cost += c[static_cast<std::size_t>(pick[q])] * x(static_cast<Eigen::Index>(q));
    best = std::min(best, cost);
  } while (std::prev_permutation(sel.begin(), sel.end()));
  return best;
}

}  // namespace testutil
