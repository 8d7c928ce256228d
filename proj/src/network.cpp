#include "mmot/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <tuple>

#include "mmot/error.hpp"
#include "mmot/kernels.hpp"

namespace mmot {

namespace {

std::atomic<std::uint64_t> g_stamp_counter{1};

std::size_t labels_size(std::span<const std::size_t> label_sizes, std::span<const int> labels) {
  std::size_t s = 1;
  for (int l : labels) s *= label_sizes[static_cast<std::size_t>(l)];
  return s;
}

std::vector<int> sorted_union(std::span<const int> a, std::span<const int> b) {
  std::vector<int> u(a.begin(), a.end());
  u.insert(u.end(), b.begin(), b.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

bool has_label(std::span<const int> labels, int l) {
  return std::find(labels.begin(), labels.end(), l) != labels.end();
}

// Indices of `operand_labels` sorted by tensor size, stable.
std::vector<std::size_t> size_order(std::span<const std::size_t> label_sizes,
                                    const std::vector<std::vector<int>>& operand_labels) {
  std::vector<std::size_t> order(operand_labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return labels_size(label_sizes, operand_labels[x]) < labels_size(label_sizes, operand_labels[y]);
  });
  return order;
}

}  // namespace

FactorNetwork::FactorNetwork(std::vector<std::size_t> mode_sizes,
                             std::vector<std::size_t> label_sizes, std::vector<Vertex> vertices)
    : mode_sizes_(std::move(mode_sizes)),
      label_sizes_(std::move(label_sizes)),
      vertices_(std::move(vertices)) {
  const std::size_t m = mode_sizes_.size();
  if (m == 0) throw DimensionError("network needs at least one mode");
  if (label_sizes_.size() < m) throw DimensionError("label table shorter than the mode count");
  for (std::size_t k = 0; k < m; ++k)
    if (label_sizes_[k] != mode_sizes_[k]) throw DimensionError("mode label size mismatch");
  for (auto s : label_sizes_)
    if (s == 0) throw DimensionError("label sizes must be positive");

  deltas_.resize(m);
  for (std::size_t k = 0; k < m; ++k) deltas_[k].mode = static_cast<int>(k);
  edges_.resize(label_sizes_.size() - m);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    edges_[e].label = static_cast<int>(m + e);
    edges_[e].size = label_sizes_[m + e];
  }
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    const auto& vx = vertices_[v];
    std::set<int> seen;
    for (std::size_t p = 0; p < vx.labels.size(); ++p) {
      const int l = vx.labels[p];
      if (l < 0 || static_cast<std::size_t>(l) >= label_sizes_.size())
        throw DimensionError("vertex label out of range");
      if (!seen.insert(l).second) throw DimensionError("vertex repeats a label");
      if (static_cast<std::size_t>(l) < m)
        deltas_[static_cast<std::size_t>(l)].legs.push_back({static_cast<int>(v), static_cast<int>(p)});
      else
        edges_[static_cast<std::size_t>(l) - m].vertices.push_back(static_cast<int>(v));
    }
    if (vx.values.size() != labels_size(label_sizes_, vx.labels))
      throw DimensionError("vertex value count does not match its labels");
  }
  for (const auto& d : deltas_)
    if (d.legs.empty()) throw DimensionError("mode " + std::to_string(d.mode) + " has no incident factor");
  for (const auto& e : edges_)
    if (e.vertices.size() < 2) throw DimensionError("internal label must join at least two vertices");
  low_rank_ = !edges_.empty();
}

FactorNetwork build_network(const KernelModel& k) {
  std::vector<std::size_t> label_sizes = k.mode_sizes();
  std::vector<Vertex> vertices;
  for (std::size_t f = 0; f < k.factors().size(); ++f) {
    const auto& kf = k.factors()[f];
    if (const auto* d = std::get_if<DenseTensor>(&kf.form)) {
      Vertex v;
      v.labels = kf.alpha.modes();
      v.values.assign(d->values().begin(), d->values().end());
      v.factor = static_cast<int>(f);
      vertices.push_back(std::move(v));
    } else {
      const auto& lr = std::get<LowRankPair>(kf.form);
      const int rho = static_cast<int>(label_sizes.size());
      label_sizes.push_back(lr.rank());
      for (int side = 0; side < 2; ++side) {
        const Matrix& m = side == 0 ? lr.u : lr.v;
        Vertex v;
        v.labels = {kf.alpha[static_cast<std::size_t>(side)], rho};
        v.values.resize(static_cast<std::size_t>(m.size()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
          for (Eigen::Index j = 0; j < m.cols(); ++j)
            v.values[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
        v.factor = static_cast<int>(f);
        vertices.push_back(std::move(v));
      }
    }
  }
  return FactorNetwork(k.mode_sizes(), std::move(label_sizes), std::move(vertices));
}

FactorNetwork network_from_tt(const TTCores& tt) {
  const std::size_t m = tt.order();
  if (m < 2) throw DimensionError("tensor train needs at least two cores");
  std::vector<std::size_t> label_sizes = tt.mode_sizes();
  for (auto r : tt.ranks()) label_sizes.push_back(r);
  std::vector<Vertex> vertices;
  for (std::size_t k = 0; k < m; ++k) {
    Vertex v;
    const int mk = static_cast<int>(k);
    const int bond_in = static_cast<int>(m + k) - 1;
    const int bond_out = static_cast<int>(m + k);
    if (k == 0)
      v.labels = {0, bond_out};
    else if (k + 1 == m)
      v.labels = {bond_in, mk};
    else
      v.labels = {bond_in, mk, bond_out};
    v.values.assign(tt.cores[k].values().begin(), tt.cores[k].values().end());
    v.factor = mk;
    vertices.push_back(std::move(v));
  }
  return FactorNetwork(tt.mode_sizes(), std::move(label_sizes), std::move(vertices));
}

Scalings::Scalings(const std::vector<std::size_t>& mode_sizes, std::vector<bool> fixed_mask)
    : fixed_(std::move(fixed_mask)) {
  if (fixed_.empty()) fixed_.assign(mode_sizes.size(), false);
  if (fixed_.size() != mode_sizes.size()) throw DimensionError("fixed mask length mismatch");
  for (auto n : mode_sizes) gammas_.emplace_back(n, 1.0);
  stamps_.resize(mode_sizes.size());
  for (std::size_t k = 0; k < stamps_.size(); ++k) touch(k);
}

void Scalings::touch(std::size_t k) { stamps_[k] = g_stamp_counter.fetch_add(1); }

Vector Scalings::beta(std::size_t k) const {
  Vector b = gamma(k);
  for (double& x : b) x = std::log(x);
  return b;
}

void Scalings::set(std::size_t k, Vector gamma) {
  if (fixed_.at(k)) throw std::invalid_argument("scaling of mode " + std::to_string(k) + " is fixed");
  if (gamma.size() != gammas_[k].size()) throw DimensionError("scaling length mismatch");
  for (double g : gamma)
    if (!(g > 0.0) || !std::isfinite(g)) throw PositivityError("scalings must be positive and finite");
  gammas_[k] = std::move(gamma);
  touch(k);
}

void Scalings::multiply(std::size_t k, std::span<const double> factor) {
  if (factor.size() != gammas_.at(k).size()) throw DimensionError("scaling length mismatch");
  Vector g = gammas_[k];
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= factor[i];
  set(k, std::move(g));
}

void Scalings::scale(std::size_t k, double c) {
  Vector g = gammas_.at(k);
  for (double& x : g) x *= c;
  set(k, std::move(g));
}

std::uint64_t step_flops(std::span<const std::size_t> label_sizes,
                         const std::vector<std::vector<int>>& operand_labels,
                         std::span<const int> result_labels, std::span<const int> summed_labels) {
  if (operand_labels.empty()) return 0;
  const auto order = size_order(label_sizes, operand_labels);
  std::vector<int> running = sorted_union(operand_labels[order[0]], {});
  std::uint64_t mults = 0;
  for (std::size_t j = 1; j < order.size(); ++j) {
    running = sorted_union(running, operand_labels[order[j]]);
    mults += labels_size(label_sizes, running);
  }
  const std::uint64_t adds =
      labels_size(label_sizes, result_labels) * (labels_size(label_sizes, summed_labels) - 1);
  return mults + adds;
}

namespace {

enum class GreedyRule { Size, Cost, ModesFirst };

ContractionPlan plan_pass(std::span<const std::size_t> label_sizes,
                          const std::vector<std::vector<int>>& leaf_labels,
                          const std::vector<int>& output_labels, bool sequential, GreedyRule rule,
                          int num_modes) {
  struct Active {
    int id;
    std::vector<int> labels;
    std::vector<int> leaves;
  };
  ContractionPlan plan;
  plan.output_labels = output_labels;
  plan.num_leaves = leaf_labels.size();
  std::vector<Active> active;
  for (std::size_t i = 0; i < leaf_labels.size(); ++i) {
    for (int l : leaf_labels[i])
      if (l < 0 || static_cast<std::size_t>(l) >= label_sizes.size()) throw DimensionError("leaf label out of range");
    active.push_back({static_cast<int>(i), leaf_labels[i], {static_cast<int>(i)}});
  }
  int next_id = static_cast<int>(leaf_labels.size());

  auto is_output = [&](int l) { return has_label(output_labels, l); };

  while (true) {
    std::set<int> candidates;
    for (const auto& a : active)
      for (int l : a.labels)
        if (!is_output(l)) candidates.insert(l);
    if (candidates.empty()) break;

    struct Choice {
      int label = -1;
      std::vector<std::size_t> group;
      std::vector<int> result, summed;
      std::size_t size = 0;
      std::uint64_t cost = 0;
    };
    std::optional<Choice> best;
    for (int l : candidates) {
      Choice c;
      c.label = l;
      std::vector<int> uni;
      std::set<int> others;
      for (std::size_t a = 0; a < active.size(); ++a) {
        if (has_label(active[a].labels, l)) {
          c.group.push_back(a);
          uni = sorted_union(uni, active[a].labels);
        } else {
          others.insert(active[a].labels.begin(), active[a].labels.end());
        }
      }
      for (int x : uni) {
        if (!is_output(x) && !others.count(x))
          c.summed.push_back(x);
        else
          c.result.push_back(x);
      }
      c.size = labels_size(label_sizes, c.result);
      std::vector<std::vector<int>> ops;
      for (auto a : c.group) ops.push_back(active[a].labels);
      c.cost = step_flops(label_sizes, ops, c.result, c.summed);
      const bool is_mode = c.label < num_modes;
      auto key = [&](const Choice& x, bool mode) {
        switch (rule) {
          case GreedyRule::Size: return std::make_tuple(0, x.size, x.cost, x.label);
          case GreedyRule::Cost: return std::make_tuple(0, x.cost, x.size, x.label);
          default: return std::make_tuple(mode ? 0 : 1, x.cost, x.size, x.label);
        }
      };
      if (!best || key(c, is_mode) < key(*best, best->label < num_modes)) best = std::move(c);
      if (sequential) break;
    }

    ContractionStep step;
    std::vector<int> leaves;
    for (auto a : best->group) {
      step.operands.push_back(active[a].id);
      leaves.insert(leaves.end(), active[a].leaves.begin(), active[a].leaves.end());
    }
    std::sort(leaves.begin(), leaves.end());
    step.result_labels = best->result;
    step.summed_labels = best->summed;
    step.leaves = leaves;
    step.flops = best->cost;
    plan.total_flops += step.flops;
    plan.steps.push_back(step);

    std::vector<Active> rest;
    for (std::size_t a = 0; a < active.size(); ++a)
      if (std::find(best->group.begin(), best->group.end(), a) == best->group.end()) rest.push_back(active[a]);
    rest.push_back({next_id++, best->result, leaves});
    active = std::move(rest);
  }

  // Everything left carries output labels only; multiply it together.
  std::vector<int> uni;
  ContractionStep fin;
  std::vector<std::vector<int>> ops;
  for (const auto& a : active) {
    uni = sorted_union(uni, a.labels);
    fin.operands.push_back(a.id);
    fin.leaves.insert(fin.leaves.end(), a.leaves.begin(), a.leaves.end());
    ops.push_back(a.labels);
  }
  std::vector<int> want = output_labels;
  std::sort(want.begin(), want.end());
  if (std::adjacent_find(want.begin(), want.end()) != want.end())
    throw DimensionError("repeated output label");
  if (uni != want) throw DimensionError("output labels do not match the network's open labels");
  std::sort(fin.leaves.begin(), fin.leaves.end());
  fin.result_labels = output_labels;
  fin.flops = step_flops(label_sizes, ops, fin.result_labels, {});
  fin.final = true;
  plan.total_flops += fin.flops;
  plan.steps.push_back(std::move(fin));
  return plan;
}

}  // namespace

ContractionPlan plan_contraction(std::span<const std::size_t> label_sizes,
                                 const std::vector<std::vector<int>>& leaf_labels,
                                 std::vector<int> output_labels, PlanStrategy strategy,
                                 int num_mode_labels) {
  switch (strategy) {
    case PlanStrategy::Sequential:
      return plan_pass(label_sizes, leaf_labels, output_labels, true, GreedyRule::Size, num_mode_labels);
    case PlanStrategy::GreedySize:
      return plan_pass(label_sizes, leaf_labels, output_labels, false, GreedyRule::Size, num_mode_labels);
    case PlanStrategy::GreedyCost:
      return plan_pass(label_sizes, leaf_labels, output_labels, false, GreedyRule::Cost, num_mode_labels);
    case PlanStrategy::GreedyModesFirst:
      return plan_pass(label_sizes, leaf_labels, output_labels, false, GreedyRule::ModesFirst,
                       num_mode_labels);
    case PlanStrategy::Greedy: break;
  }
  std::optional<ContractionPlan> best;
  for (auto rule : {GreedyRule::Size, GreedyRule::Cost, GreedyRule::ModesFirst}) {
    auto p = plan_pass(label_sizes, leaf_labels, output_labels, false, rule, num_mode_labels);
    if (!best || p.total_flops < best->total_flops) best = std::move(p);
  }
  return std::move(*best);
}

namespace {

std::vector<std::vector<int>> network_leaf_labels(const FactorNetwork& net) {
  std::vector<std::vector<int>> leaves;
  for (const auto& v : net.vertices()) leaves.push_back(v.labels);
  for (std::size_t k = 0; k < net.order(); ++k) leaves.push_back({static_cast<int>(k)});
  return leaves;
}

struct Operand {
  std::span<const double> values;
  std::vector<int> labels;
};

// Executes `plan` over leaves; returns the final tensor over plan.output_labels.
// `lookup` may satisfy a non-final step from a cache; `store` records results.
template <typename Lookup, typename Store>
std::vector<double> execute(const ContractionPlan& plan, const std::vector<Operand>& leaves,
                            std::span<const std::size_t> label_sizes, std::uint64_t& flops,
                            Lookup lookup, Store store) {
  std::vector<std::vector<double>> results(plan.steps.size());
  std::vector<std::vector<int>> result_labels(plan.steps.size());
  const auto nleaves = static_cast<int>(leaves.size());
  auto operand = [&](int id) -> Operand {
    if (id < nleaves) return leaves[static_cast<std::size_t>(id)];
    const auto s = static_cast<std::size_t>(id - nleaves);
    return {results[s], result_labels[s]};
  };
  static const double one = 1.0;
  const std::span<const double> scalar_one(&one, 1);

  for (std::size_t si = 0; si < plan.steps.size(); ++si) {
    const auto& step = plan.steps[si];
    result_labels[si] = step.result_labels;
    auto& out = results[si];
    if (!step.final && lookup(step, out)) continue;

    std::vector<Operand> ops;
    std::vector<std::vector<int>> op_labels;
    for (int id : step.operands) {
      ops.push_back(operand(id));
      op_labels.push_back(ops.back().labels);
    }
    const auto order = size_order(label_sizes, op_labels);
    out.assign(labels_size(label_sizes, step.result_labels), 0.0);
    const int no_labels[1] = {0};
    const std::span<const int> empty(no_labels, 0);

    if (order.size() == 1) {
      const auto& a = ops[order[0]];
      kernels::contract_pair({a.values, a.labels}, {scalar_one, empty}, step.result_labels,
                             step.summed_labels, label_sizes, out);
    } else {
      std::vector<double> running(ops[order[0]].values.begin(), ops[order[0]].values.end());
      std::vector<int> running_labels = ops[order[0]].labels;
      for (std::size_t j = 1; j < order.size(); ++j) {
        const auto& b = ops[order[j]];
        if (j + 1 == order.size()) {
          kernels::contract_pair({running, running_labels}, {b.values, b.labels}, step.result_labels,
                                 step.summed_labels, label_sizes, out);
        } else {
          auto uni = sorted_union(running_labels, b.labels);
          std::vector<double> next(labels_size(label_sizes, uni));
          kernels::contract_pair({running, running_labels}, {b.values, b.labels}, uni, empty,
                                 label_sizes, next);
          running = std::move(next);
          running_labels = std::move(uni);
        }
      }
    }
    flops += step.flops;
    if (!step.final) store(step, out);
  }
  return std::move(results.back());
}

std::vector<Operand> network_operands(const FactorNetwork& net, const Scalings& s) {
  if (s.order() != net.order()) throw DimensionError("scalings order differs from the network");
  std::vector<Operand> leaves;
  for (const auto& v : net.vertices()) leaves.push_back({v.values, v.labels});
  for (std::size_t k = 0; k < net.order(); ++k) {
    if (s.gamma(k).size() != net.mode_sizes()[k]) throw DimensionError("scaling length mismatch");
    leaves.push_back({s.gamma(k), {static_cast<int>(k)}});
  }
  return leaves;
}

void check_marginal(const Vector& r, int k) {
  for (double x : r)
    if (!(x > 0.0) || !std::isfinite(x))
      throw PositivityError("nonpositive entry in marginal " + std::to_string(k) +
                            "; the kernel approximation is not positive");
}

}  // namespace

ContractionPlan plan_marginal(const FactorNetwork& net, int k, PlanStrategy strategy) {
  if (k < 0 || static_cast<std::size_t>(k) >= net.order()) throw DimensionError("mode out of range");
  return plan_contraction(net.label_sizes(), network_leaf_labels(net), {k}, strategy,
                          static_cast<int>(net.order()));
}

std::uint64_t flops(const ContractionPlan& plan) {
  std::uint64_t f = 0;
  for (const auto& s : plan.steps) f += s.flops;
  return f;
}

DenseTensor Rank1Correction::materialize() const {
  DenseTensor t = outer(vectors);
  for (double& x : t.values()) x *= prefactor;
  return t;
}

Vector Rank1Correction::marginal(std::size_t k) const {
  Vector r = vectors.at(k);
  double c = prefactor;
  for (std::size_t j = 0; j < vectors.size(); ++j)
    if (j != k) c *= sum(vectors[j]);
  for (double& x : r) x *= c;
  return r;
}

double Rank1Correction::total() const {
  if (vectors.empty()) return 0.0;
  double c = prefactor;
  for (const auto& v : vectors) c *= sum(v);
  return c;
}

ContractionEngine::ContractionEngine(FactorNetwork net, PlanStrategy strategy, bool cache_intermediates)
    : net_(std::move(net)), strategy_(strategy), use_cache_(cache_intermediates) {}

const ContractionPlan& ContractionEngine::plan(int k) {
  std::lock_guard lock(mutex_);
  auto it = plans_.find(k);
  if (it == plans_.end()) it = plans_.emplace(k, plan_marginal(net_, k, strategy_)).first;
  return it->second;
}

void ContractionEngine::clear_cache() {
  std::lock_guard lock(mutex_);
  cache_.clear();
}

Vector ContractionEngine::run(const ContractionPlan& plan, const Scalings& s) {
  const auto leaves = network_operands(net_, s);
  const int nv = static_cast<int>(net_.vertices().size());
  auto stamps_of = [&](const ContractionStep& step) {
    std::vector<std::uint64_t> st;
    for (int l : step.leaves)
      if (l >= nv) st.push_back(s.stamp(static_cast<std::size_t>(l - nv)));
    return st;
  };
  std::uint64_t f = 0;
  auto lookup = [&](const ContractionStep& step, std::vector<double>& out) {
    if (!use_cache_) return false;
    auto it = cache_.find(CacheKey{step.leaves, step.result_labels});
    if (it == cache_.end() || it->second.stamps != stamps_of(step)) return false;
    out = it->second.values;
    return true;
  };
  auto store = [&](const ContractionStep& step, const std::vector<double>& out) {
    if (use_cache_) cache_[CacheKey{step.leaves, step.result_labels}] = CacheEntry{stamps_of(step), out};
  };
  Vector r = execute(plan, leaves, net_.label_sizes(), f, lookup, store);
  flops_ += f;
  return r;
}

Vector ContractionEngine::marginal(const Scalings& s, int k) {
  const ContractionPlan& p = plan(k);
  std::lock_guard lock(mutex_);
  Vector r = run(p, s);
  check_marginal(r, k);
  return r;
}

std::vector<Vector> ContractionEngine::all_marginals(const Scalings& s) {
  std::vector<Vector> out;
  for (std::size_t k = 0; k < net_.order(); ++k) out.push_back(marginal(s, static_cast<int>(k)));
  return out;
}

double ContractionEngine::total_mass(const Scalings& s) { return sum(marginal(s, 0)); }

Vector eval_marginal(const FactorNetwork& net, const Scalings& s, int k, const ContractionPlan& plan) {
  if (plan.output_labels.size() != 1 || plan.output_labels[0] != k)
    throw DimensionError("plan does not compute the requested marginal");
  if (plan.num_leaves != net.vertices().size() + net.order())
    throw DimensionError("plan was built for a different network");
  std::uint64_t f = 0;
  Vector r = execute(
      plan, network_operands(net, s), net.label_sizes(), f,
      [](const ContractionStep&, std::vector<double>&) { return false; },
      [](const ContractionStep&, const std::vector<double>&) {});
  check_marginal(r, k);
  return r;
}

AllMarginals eval_all_marginals(const FactorNetwork& net, const Scalings& s) {
  ContractionEngine engine(net);
  AllMarginals out;
  out.marginals = engine.all_marginals(s);
  out.flops = engine.flops();
  return out;
}

namespace {

// <C^alpha, outer(w_k, k in alpha)> times the totals of the other w_k.
double correction_cost(const CostFactor& f, const Rank1Correction& corr) {
  const auto& dims = f.values.dims();
  std::vector<std::size_t> idx(dims.size(), 0);
  double acc = 0.0;
  for (std::size_t flat = 0; flat < f.values.size(); ++flat) {
    double w = f.values[flat];
    for (std::size_t j = 0; j < dims.size(); ++j) w *= corr.vectors[static_cast<std::size_t>(f.alpha[j])][idx[j]];
    acc += w;
    for (std::size_t d = dims.size(); d-- > 0;) {
      if (++idx[d] < dims[d]) break;
      idx[d] = 0;
    }
  }
  for (std::size_t k = 0; k < corr.vectors.size(); ++k)
    if (!f.alpha.contains(static_cast<int>(k))) acc *= sum(corr.vectors[k]);
  return corr.prefactor * acc;
}

}  // namespace

double eval_cost(const FactorNetwork& net, const Scalings& s, const CostModel& c,
                 const Rank1Correction* correction) {
  if (c.mode_sizes() != net.mode_sizes()) throw DimensionError("cost and network differ in shape");
  auto leaf_labels = network_leaf_labels(net);
  leaf_labels.push_back({});
  auto leaves = network_operands(net, s);
  leaves.push_back({});
  double total = 0.0;
  for (const auto& f : c.factors()) {
    leaf_labels.back() = f.alpha.modes();
    leaves.back() = {f.values.values(), f.alpha.modes()};
    const auto plan = plan_contraction(net.label_sizes(), leaf_labels, {}, PlanStrategy::Greedy,
                                       static_cast<int>(net.order()));
    std::uint64_t fl = 0;
    total += execute(
        plan, leaves, net.label_sizes(), fl,
        [](const ContractionStep&, std::vector<double>&) { return false; },
        [](const ContractionStep&, const std::vector<double>&) {})[0];
    if (correction && !correction->is_zero()) {
      if (correction->vectors.size() != net.order()) throw DimensionError("correction order mismatch");
      total += correction_cost(f, *correction);
    }
  }
  return total;
}

DenseTensor materialize(const FactorNetwork& net, const Scalings& s, std::size_t budget) {
  if (static_cast<double>(product(net.mode_sizes())) > static_cast<double>(budget))
    throw BudgetError("plan materialization exceeds the entry budget");
  std::vector<int> out(net.order());
  std::iota(out.begin(), out.end(), 0);
  const auto plan = plan_contraction(net.label_sizes(), network_leaf_labels(net), out,
                                     PlanStrategy::Greedy, static_cast<int>(net.order()));
  std::uint64_t f = 0;
  auto values = execute(
      plan, network_operands(net, s), net.label_sizes(), f,
      [](const ContractionStep&, std::vector<double>&) { return false; },
      [](const ContractionStep&, const std::vector<double>&) {});
  return DenseTensor(net.mode_sizes(), std::move(values));
}

}  // namespace mmot
