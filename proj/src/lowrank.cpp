#include "mmot/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

#include "mmot/error.hpp"
#include "mmot/random.hpp"

namespace mmot {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

SvdResult take_leading(const Eigen::BDCSVD<Matrix>& svd, std::size_t r) {
  const auto rr = static_cast<Eigen::Index>(r);
  SvdResult out;
  out.u = svd.matrixU().leftCols(rr);
  out.v = svd.matrixV().leftCols(rr);
  const auto& s = svd.singularValues();
  out.singular_values.assign(s.data(), s.data() + rr);
  return out;
}

Matrix orthonormal_basis(const Matrix& y) {
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

}  // namespace

Matrix SvdResult::reconstruct() const {
  Matrix us = u;
  for (Eigen::Index j = 0; j < us.cols(); ++j) us.col(j) *= singular_values[static_cast<std::size_t>(j)];
  return us * v.transpose();
}

SvdResult truncated_svd(const Matrix& m, std::size_t r) {
  const auto mn = static_cast<std::size_t>(std::min(m.rows(), m.cols()));
  if (r < 1 || r > mn) throw DimensionError("rank " + std::to_string(r) + " outside [1, " + std::to_string(mn) + "]");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return take_leading(svd, r);
}

SvdResult randomized_svd(const Matrix& m, std::size_t r, std::size_t oversample,
                         std::size_t power_iters, std::uint64_t seed) {
  const auto mn = static_cast<std::size_t>(std::min(m.rows(), m.cols()));
  if (r < 1 || r + oversample > mn)
    throw DimensionError("rank plus oversampling exceeds the smaller dimension");
  const auto l = static_cast<Eigen::Index>(r + oversample);
  Rng rng(seed);
  Matrix omega(m.cols(), l);
  for (Eigen::Index j = 0; j < l; ++j)
    for (Eigen::Index i = 0; i < m.cols(); ++i) omega(i, j) = rng.normal();
  Matrix q = orthonormal_basis(m * omega);
  for (std::size_t it = 0; it < power_iters; ++it) {
    const Matrix z = orthonormal_basis(m.transpose() * q);
    q = orthonormal_basis(m * z);
  }
  const Matrix b = q.transpose() * m;
  Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out = take_leading(svd, r);
  out.u = q * out.u;
  return out;
}

double lowrank_min_entry(const LowRankPair& lr, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(lr.u.rows());
  const auto np = static_cast<std::size_t>(lr.v.rows());
  if (static_cast<double>(n) * static_cast<double>(np) <= static_cast<double>(kPositivityExactLimit))
    return lr.reconstruct().minCoeff();
  Rng rng(seed);
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < kPositivitySamples; ++s) {
    const auto i = static_cast<Eigen::Index>(rng.below(n));
    const auto j = static_cast<Eigen::Index>(rng.below(np));
    lo = std::min(lo, lr.u.row(i).dot(lr.v.row(j)));
  }
  return lo;
}

KernelFactor lowrank_kernel_factor(const IndexTuple& alpha, const Matrix& k, std::size_t r,
                                   SvdMethod method, std::uint64_t seed) {
  if (alpha.size() != 2) throw DimensionError("low-rank factors must be matrices");
  if (!(k.minCoeff() > 0.0)) throw PositivityError("kernel factor must be strictly positive");
  SvdResult svd;
  if (method == SvdMethod::Exact) {
    svd = truncated_svd(k, r);
  } else {
    const auto mn = static_cast<std::size_t>(std::min(k.rows(), k.cols()));
    if (r < 1 || r > mn) throw DimensionError("rank out of range");
    svd = randomized_svd(k, r, std::min(kDefaultOversample, mn - r), kDefaultPowerIters, seed);
  }
  LowRankPair lr;
  lr.u = svd.u;
  for (Eigen::Index j = 0; j < lr.u.cols(); ++j) lr.u.col(j) *= svd.singular_values[static_cast<std::size_t>(j)];
  lr.v = svd.v;
  if (!(lowrank_min_entry(lr, seed) > 0.0))
    throw PositivityError("rank " + std::to_string(r) + " too small for positivity");
  return KernelFactor{alpha, std::move(lr)};
}

double log_error(const KernelModel& k, const KernelModel& k_approx, LogErrorMode mode,
                 std::size_t budget) {
  if (k.mode_sizes() != k_approx.mode_sizes()) throw DimensionError("kernel models differ in shape");
  const auto& dims = k.mode_sizes();
  std::vector<std::size_t> idx(dims.size(), 0);
  double worst = 0.0;
  auto visit = [&] {
    const double d = std::abs(k.log_entry(idx) - k_approx.log_entry(idx));
    worst = std::max(worst, d);
  };
  if (mode.sampled) {
    Rng rng(mode.seed);
    for (std::size_t s = 0; s < mode.count; ++s) {
      for (std::size_t d = 0; d < dims.size(); ++d) idx[d] = static_cast<std::size_t>(rng.below(dims[d]));
      visit();
    }
    return worst;
  }
  const double total = static_cast<double>(product(dims));
  if (total > static_cast<double>(budget)) throw BudgetError("exact log error exceeds the entry budget");
  const auto count = product(dims);
  for (std::size_t flat = 0; flat < count; ++flat) {
    visit();
    for (std::size_t d = dims.size(); d-- > 0;) {
      if (++idx[d] < dims[d]) break;
      idx[d] = 0;
    }
  }
  return worst;
}

double factor_log_error(const KernelFactor& a, const KernelFactor& b) {
  if (a.alpha != b.alpha) throw DimensionError("factors live on different index tuples");
  const DenseTensor da = a.to_dense();
  const DenseTensor db = b.to_dense();
  if (da.dims() != db.dims()) throw DimensionError("factor shapes differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    if (!(da[i] > 0.0) || !(db[i] > 0.0)) throw PositivityError("nonpositive factor entry in log error");
    worst = std::max(worst, std::abs(std::log(da[i]) - std::log(db[i])));
  }
  return worst;
}

std::vector<std::size_t> TTCores::mode_sizes() const {
  std::vector<std::size_t> n;
  for (std::size_t k = 0; k < cores.size(); ++k) {
    const auto& c = cores[k];
    n.push_back(k == 0 ? c.dim(0) : c.dim(1));
  }
  return n;
}

std::vector<std::size_t> TTCores::ranks() const {
  std::vector<std::size_t> r;
  for (std::size_t k = 0; k + 1 < cores.size(); ++k) r.push_back(cores[k].dims().back());
  return r;
}

std::vector<std::size_t> tt_feasible_ranks(std::span<const std::size_t> dims, std::size_t cap) {
  if (dims.size() < 2) throw DimensionError("tensor train needs at least two modes");
  std::vector<std::size_t> r(dims.size() - 1);
  double left = 1.0;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    double right = 1.0;
    for (std::size_t j = k + 1; j < dims.size(); ++j) right *= static_cast<double>(dims[j]);
    left = (k == 0 ? 1.0 : static_cast<double>(r[k - 1])) * static_cast<double>(dims[k]);
    r[k] = static_cast<std::size_t>(std::min({static_cast<double>(cap), left, right}));
  }
  return r;
}

TTCores tt_svd(const DenseTensor& t, std::span<const std::size_t> ranks) {
  const auto& dims = t.dims();
  const std::size_t m = dims.size();
  if (m < 2) throw DimensionError("tensor train needs at least two modes");
  if (ranks.size() != m - 1) throw DimensionError("tensor train needs m-1 ranks");
  std::size_t rest = t.size();
  std::size_t r_prev = 1;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    rest /= dims[k];
    if (ranks[k] < 1 || ranks[k] > r_prev * dims[k] || ranks[k] > rest)
      throw DimensionError("infeasible tensor-train rank at position " + std::to_string(k));
    r_prev = ranks[k];
  }

  TTCores tt;
  RowMat c = Eigen::Map<const RowMat>(t.values().data(), static_cast<Eigen::Index>(dims[0]),
                                      static_cast<Eigen::Index>(t.size() / dims[0]));
  r_prev = 1;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const auto rk = static_cast<Eigen::Index>(ranks[k]);
    Eigen::BDCSVD<Matrix> svd(Matrix(c), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RowMat u = svd.matrixU().leftCols(rk);
    std::vector<std::size_t> core_dims =
        k == 0 ? std::vector<std::size_t>{dims[0], ranks[0]}
               : std::vector<std::size_t>{r_prev, dims[k], ranks[k]};
    tt.cores.emplace_back(core_dims, std::vector<double>(u.data(), u.data() + u.size()));
    RowMat sv = svd.singularValues().head(rk).asDiagonal() * svd.matrixV().leftCols(rk).transpose();
    const Eigen::Index next_rows = rk * static_cast<Eigen::Index>(dims[k + 1]);
    c = Eigen::Map<const RowMat>(sv.data(), next_rows, sv.size() / next_rows);
    r_prev = ranks[k];
  }
  tt.cores.emplace_back(std::vector<std::size_t>{r_prev, dims[m - 1]},
                        std::vector<double>(c.data(), c.data() + c.size()));
  return tt;
}

DenseTensor tt_full(const TTCores& tt) {
  const auto dims = tt.mode_sizes();
  // Left-to-right sweep keeping a (prefix entries) x r_k row-major block.
  RowMat acc = Eigen::Map<const RowMat>(tt.cores[0].values().data(),
                                        static_cast<Eigen::Index>(tt.cores[0].dim(0)),
                                        static_cast<Eigen::Index>(tt.cores[0].dim(1)));
  for (std::size_t k = 1; k < tt.cores.size(); ++k) {
    const auto& g = tt.cores[k];
    const auto rin = static_cast<Eigen::Index>(g.dim(0));
    const auto cols = static_cast<Eigen::Index>(g.size() / g.dim(0));
    const RowMat gm = Eigen::Map<const RowMat>(g.values().data(), rin, cols);
    const RowMat next = acc * gm;
    const Eigen::Index width = k + 1 < tt.cores.size() ? static_cast<Eigen::Index>(g.dim(2)) : 1;
    acc = Eigen::Map<const RowMat>(next.data(), next.size() / width, width);
  }
  return DenseTensor(dims, std::vector<double>(acc.data(), acc.data() + acc.size()));
}

double tt_entry(const TTCores& tt, std::span<const std::size_t> index) {
  const std::size_t m = tt.order();
  if (index.size() != m) throw DimensionError("index length differs from the train order");
  const auto& g0 = tt.cores[0];
  std::vector<double> row(g0.dim(1));
  for (std::size_t b = 0; b < row.size(); ++b) row[b] = g0[index[0] * g0.dim(1) + b];
  for (std::size_t k = 1; k < m; ++k) {
    const auto& g = tt.cores[k];
    const std::size_t rin = g.dim(0), nk = g.dim(1);
    const std::size_t rout = k + 1 < m ? g.dim(2) : 1;
    std::vector<double> next(rout, 0.0);
    for (std::size_t a = 0; a < rin; ++a)
      for (std::size_t b = 0; b < rout; ++b) next[b] += row[a] * g[(a * nk + index[k]) * rout + b];
    row = std::move(next);
  }
  return row[0];
}

}  // namespace mmot
