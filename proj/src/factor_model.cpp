#include "mmot/factor_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmot/error.hpp"

namespace mmot {

IndexTuple::IndexTuple(std::initializer_list<int> modes) : IndexTuple(std::vector<int>(modes)) {}

IndexTuple::IndexTuple(std::vector<int> modes) : modes_(std::move(modes)) {
  if (modes_.empty()) throw DimensionError("index tuple must be non-empty");
  if (modes_.front() < 0) throw DimensionError("index tuple modes must be non-negative");
  for (std::size_t j = 1; j < modes_.size(); ++j)
    if (modes_[j] <= modes_[j - 1]) throw DimensionError("index tuple must be strictly increasing");
}

bool IndexTuple::contains(int mode) const {
  return std::binary_search(modes_.begin(), modes_.end(), mode);
}

namespace {

void check_tuple(const IndexTuple& alpha, std::span<const std::size_t> dims,
                 const std::vector<std::size_t>& mode_sizes) {
  if (alpha.size() == 0) throw DimensionError("factor without modes");
  if (static_cast<std::size_t>(alpha.modes().back()) >= mode_sizes.size())
    throw DimensionError("factor mode outside [0, m)");
  if (dims.size() != alpha.size()) throw DimensionError("factor order does not match its index tuple");
  for (std::size_t j = 0; j < alpha.size(); ++j)
    if (dims[j] != mode_sizes[static_cast<std::size_t>(alpha[j])])
      throw DimensionError("factor dimension does not match mode size");
}

void check_coverage(const std::vector<std::size_t>& mode_sizes,
                    const std::vector<const IndexTuple*>& tuples) {
  if (mode_sizes.empty()) throw DimensionError("model needs at least one mode");
  for (std::size_t k = 0; k < mode_sizes.size(); ++k) {
    if (mode_sizes[k] == 0) throw DimensionError("mode sizes must be positive");
    const bool covered = std::any_of(tuples.begin(), tuples.end(),
                                     [&](const IndexTuple* t) { return t->contains(static_cast<int>(k)); });
    if (!covered) throw DimensionError("mode " + std::to_string(k) + " is not touched by any factor");
  }
}

// Gathers the local index of a factor from a global multi-index.
void local_index(const IndexTuple& alpha, std::span<const std::size_t> global,
                 std::vector<std::size_t>& local) {
  local.resize(alpha.size());
  for (std::size_t j = 0; j < alpha.size(); ++j) local[j] = global[static_cast<std::size_t>(alpha[j])];
}

}  // namespace

CostModel::CostModel(std::vector<std::size_t> mode_sizes, std::vector<CostFactor> factors)
    : mode_sizes_(std::move(mode_sizes)), factors_(std::move(factors)) {
  std::vector<const IndexTuple*> tuples;
  for (const auto& f : factors_) {
    check_tuple(f.alpha, f.values.dims(), mode_sizes_);
    for (double v : f.values.values())
      if (!(v >= 0.0)) throw DimensionError("cost factors must be non-negative");
    tuples.push_back(&f.alpha);
  }
  check_coverage(mode_sizes_, tuples);
}

double CostModel::sup_norm_bound() const {
  double s = 0.0;
  for (const auto& f : factors_) s += f.values.max_abs();
  return s;
}

double KernelFactor::entry(std::span<const std::size_t> local) const {
  if (const auto* d = std::get_if<DenseTensor>(&form)) return d->at(local);
  const auto& lr = std::get<LowRankPair>(form);
  return lr.u.row(static_cast<Eigen::Index>(local[0])).dot(lr.v.row(static_cast<Eigen::Index>(local[1])));
}

DenseTensor KernelFactor::to_dense() const {
  if (const auto* d = std::get_if<DenseTensor>(&form)) return *d;
  return DenseTensor::from_matrix(std::get<LowRankPair>(form).reconstruct());
}

KernelModel::KernelModel(std::vector<std::size_t> mode_sizes, std::vector<KernelFactor> factors,
                         double eta)
    : mode_sizes_(std::move(mode_sizes)), factors_(std::move(factors)), eta_(eta) {
  if (!(eta_ > 0.0)) throw std::invalid_argument("eta must be positive");
  std::vector<const IndexTuple*> tuples;
  for (const auto& f : factors_) {
    if (const auto* d = std::get_if<DenseTensor>(&f.form)) {
      check_tuple(f.alpha, d->dims(), mode_sizes_);
      for (double v : d->values())
        if (!(v > 0.0)) throw PositivityError("dense kernel factors must be strictly positive");
    } else {
      const auto& lr = std::get<LowRankPair>(f.form);
      if (f.alpha.size() != 2) throw DimensionError("low-rank form is limited to matrix factors");
      if (lr.u.cols() != lr.v.cols() || lr.u.cols() == 0)
        throw DimensionError("low-rank factors need matching positive rank");
      const std::size_t dims[2] = {static_cast<std::size_t>(lr.u.rows()),
                                   static_cast<std::size_t>(lr.v.rows())};
      check_tuple(f.alpha, dims, mode_sizes_);
    }
    tuples.push_back(&f.alpha);
  }
  check_coverage(mode_sizes_, tuples);
}

double KernelModel::entry(std::span<const std::size_t> index) const {
  std::vector<std::size_t> local;
  double p = 1.0;
  for (const auto& f : factors_) {
    local_index(f.alpha, index, local);
    p *= f.entry(local);
  }
  return p;
}

double KernelModel::log_entry(std::span<const std::size_t> index) const {
  std::vector<std::size_t> local;
  double s = 0.0;
  for (const auto& f : factors_) {
    local_index(f.alpha, index, local);
    const double v = f.entry(local);
    if (!(v > 0.0)) throw PositivityError("nonpositive kernel entry");
    s += std::log(v);
  }
  return s;
}

KernelModel gibbs_factors(const CostModel& c, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  std::vector<KernelFactor> factors;
  for (const auto& f : c.factors()) {
    DenseTensor k = f.values;
    for (double& v : k.values()) v = std::exp(-(v / eta));
    factors.push_back({f.alpha, std::move(k)});
  }
  return KernelModel(c.mode_sizes(), std::move(factors), eta);
}

namespace {

void check_budget(const std::vector<std::size_t>& dims, std::size_t budget) {
  double total = 1.0;
  for (auto d : dims) total *= static_cast<double>(d);
  if (total > static_cast<double>(budget))
    throw BudgetError("materialization of " + std::to_string(total) +
                      " entries exceeds the budget of " + std::to_string(budget));
}

// Walks every multi-index of `dims`, handing factor-local indices to `visit`.
template <typename Visit>
void for_each_factor_entry(const std::vector<std::size_t>& dims, std::size_t count,
                           const std::vector<const IndexTuple*>& tuples, Visit visit) {
  DenseTensor shape(dims);
  std::vector<std::size_t> idx(dims.size(), 0), local;
  for (std::size_t flat = 0; flat < count; ++flat) {
    for (std::size_t f = 0; f < tuples.size(); ++f) {
      local_index(*tuples[f], idx, local);
      visit(flat, f, local);
    }
    for (std::size_t d = dims.size(); d-- > 0;) {
      if (++idx[d] < dims[d]) break;
      idx[d] = 0;
    }
  }
}

}  // namespace

DenseTensor assemble_dense_cost(const CostModel& c, std::size_t budget) {
  check_budget(c.mode_sizes(), budget);
  DenseTensor out(c.mode_sizes(), 0.0);
  std::vector<const IndexTuple*> tuples;
  for (const auto& f : c.factors()) tuples.push_back(&f.alpha);
  for_each_factor_entry(c.mode_sizes(), out.size(), tuples,
                        [&](std::size_t flat, std::size_t f, const std::vector<std::size_t>& local) {
                          out[flat] += c.factors()[f].values.at(local);
                        });
  return out;
}

DenseTensor assemble_dense_kernel(const KernelModel& k, std::size_t budget) {
  check_budget(k.mode_sizes(), budget);
  // Expand low-rank factors once and reject nonpositive reconstructions.
  std::vector<DenseTensor> dense;
  std::vector<const IndexTuple*> tuples;
  for (const auto& f : k.factors()) {
    dense.push_back(f.to_dense());
    if (f.is_low_rank() && !(dense.back().min() > 0.0))
      throw PositivityError("low-rank factor reconstruction is not strictly positive; rank too small");
    tuples.push_back(&f.alpha);
  }
  DenseTensor out(k.mode_sizes(), 1.0);
  for_each_factor_entry(k.mode_sizes(), out.size(), tuples,
                        [&](std::size_t flat, std::size_t f, const std::vector<std::size_t>& local) {
                          out[flat] *= dense[f].at(local);
                        });
  return out;
}

DenseTensor sqdist_cost(const Matrix& x, const Matrix& y) {
  if (x.rows() == 0 || y.rows() == 0) throw DimensionError("empty point set");
  if (x.cols() != y.cols()) throw DimensionError("point dimensions differ");
  DenseTensor c({static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(y.rows())});
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < y.rows(); ++j)
      c[static_cast<std::size_t>(i * y.rows() + j)] = (x.row(i) - y.row(j)).squaredNorm();
  return c;
}

}  // namespace mmot
