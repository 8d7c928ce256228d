#include "mmot/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <string>

#include "mmot/error.hpp"
#include "mmot/kernels.hpp"

namespace mmot {

std::vector<Vector> MarginalOracle::all_marginals(const Scalings& s) {
  std::vector<Vector> out;
  for (std::size_t k = 0; k < mode_sizes().size(); ++k) out.push_back(marginal(s, k));
  return out;
}

DenseOracle::DenseOracle(DenseTensor k) : k_(std::move(k)) {
  for (double x : k_.values())
    if (!(x > 0.0)) throw PositivityError("dense kernel must be strictly positive");
}

std::vector<Vector> DenseOracle::all_marginals(const Scalings& s) {
  auto r = kernels::scaled_marginals(k_, s.gammas());
  flops_ += 2 * k_.size() * k_.order();
  for (const auto& v : r)
    for (double x : v)
      if (!(x > 0.0) || !std::isfinite(x)) throw PositivityError("nonpositive marginal");
  return r;
}

Vector DenseOracle::marginal(const Scalings& s, std::size_t k) { return all_marginals(s).at(k); }

NetworkOracle::NetworkOracle(FactorNetwork net, PlanStrategy strategy, bool cache_intermediates)
    : engine_(std::move(net), strategy, cache_intermediates) {}

Vector NetworkOracle::marginal(const Scalings& s, std::size_t k) {
  return engine_.marginal(s, static_cast<int>(k));
}

std::vector<Vector> NetworkOracle::all_marginals(const Scalings& s) { return engine_.all_marginals(s); }

double distance_quantity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("marginal length mismatch");
  // (b - a) + a log(a / b) = a (x - log(1 + x)) with x = (b - a) / a
  double q = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = (b[i] - a[i]) / a[i];
    q += a[i] * (x - std::log1p(x));
  }
  return q;
}

double projection_quantity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("marginal length mismatch");
  double ab = 0.0, aa = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
  }
  const double c = ab / aa;
  double q = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) q += std::abs(b[i] - c * a[i]);
  return q;
}

namespace {

template <typename F>
int argmax_over(const SinkhornState& st, F quantity) {
  int best = -1;
  double best_q = 0.0;
  for (int k : st.update_set) {
    const auto u = static_cast<std::size_t>(k);
    const double q = quantity(st.targets[u], st.marginals[u]);
    if (best < 0 || q > best_q) {
      best = k;
      best_q = q;
    }
  }
  if (best < 0) throw std::invalid_argument("empty update set");
  return best;
}

}  // namespace

int select_greedy_distance(const SinkhornState& st) {
  return argmax_over(st, [](const Vector& a, const Vector& b) { return distance_quantity(a, b); });
}

int select_greedy_projection(const SinkhornState& st) {
  return argmax_over(st, [](const Vector& a, const Vector& b) { return projection_quantity(a, b); });
}

double l1_residual(const SinkhornState& st) {
  double r = 0.0;
  for (int k : st.update_set) {
    const auto u = static_cast<std::size_t>(k);
    r += l1_distance(st.marginals[u], st.targets[u]);
  }
  return r;
}

bool stopping_l1(const SinkhornState& st, double eps) { return l1_residual(st) <= eps; }

bool stopping_projection(const SinkhornState& st, double eps, std::size_t m) {
  double worst = 0.0;
  for (int k : st.update_set) {
    const auto u = static_cast<std::size_t>(k);
    worst = std::max(worst, projection_quantity(st.targets[u], st.marginals[u]));
  }
  return worst < eps / (2.0 * static_cast<double>(m));
}

SinkhornResult solve(MarginalOracle& oracle, const std::vector<Vector>& targets,
                     const SinkhornConfig& cfg, const std::function<void(const IterationRecord&)>& hook) {
  const auto dims = oracle.mode_sizes();
  const std::size_t m = dims.size();
  if (!(cfg.eps_stop > 0.0)) throw std::invalid_argument("eps_stop must be positive");
  if (targets.size() != m) throw DimensionError("one target per mode required");

  std::vector<int> update = cfg.update_set;
  if (update.empty()) {
    update.resize(m);
    std::iota(update.begin(), update.end(), 0);
  }
  std::sort(update.begin(), update.end());
  update.erase(std::unique(update.begin(), update.end()), update.end());
  std::vector<bool> fixed(m, true);
  for (int k : update) {
    if (k < 0 || static_cast<std::size_t>(k) >= m) throw DimensionError("update mode out of range");
    const auto u = static_cast<std::size_t>(k);
    fixed[u] = false;
    if (targets[u].size() != dims[u]) throw DimensionError("target length mismatch on mode " + std::to_string(k));
    for (double x : targets[u])
      if (!(x > 0.0)) throw PositivityError("targets must be strictly positive");
    if (std::abs(sum(targets[u]) - 1.0) > 1e-12) throw std::invalid_argument("targets must sum to 1");
  }

  SinkhornResult res{Scalings(dims, fixed), 0, {}, false, {}, {}};
  Scalings& s = res.scalings;
  if (cfg.normalize_first) {
    const auto k0 = static_cast<std::size_t>(update.front());
    s.scale(k0, 1.0 / sum(oracle.marginal(s, k0)));
  }

  for (std::size_t t = 0;; ++t) {
    res.marginals = oracle.all_marginals(s);
    const SinkhornState st{res.marginals, targets, update};
    const double residual = l1_residual(st);
    res.residual_history.push_back(residual);
    const bool done = cfg.stopping == Stopping::L1Sum ? residual <= cfg.eps_stop
                                                      : stopping_projection(st, cfg.eps_stop, m);
    if (done) {
      res.converged = true;
      break;
    }
    if (t >= cfg.max_iters) break;

    int k = 0;
    switch (cfg.selection) {
      case Selection::Cyclic: k = update[t % update.size()]; break;
      case Selection::GreedyDistance: k = select_greedy_distance(st); break;
      case Selection::GreedyProjection: k = select_greedy_projection(st); break;
    }
    const auto u = static_cast<std::size_t>(k);
    Vector ratio(dims[u]);
    for (std::size_t i = 0; i < ratio.size(); ++i) ratio[i] = targets[u][i] / res.marginals[u][i];
    s.multiply(u, ratio);
    res.selected_indices.push_back(k);
    res.iterations = t + 1;
    if (hook) hook(IterationRecord{t + 1, k, residual, &s});
  }
  return res;
}

double iteration_bound_a(double c_inf, const std::vector<Vector>& targets, double eta,
                         double eps_stop, std::size_t m) {
  if (!(eta > 0.0) || !(eps_stop > 0.0)) throw std::invalid_argument("eta and eps_stop must be positive");
  if (eta >= 0.5) std::cerr << "warning: iteration bound (a) assumes 0 < eta < 1/2, got " << eta << "\n";
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& r : targets)
    for (double x : r) {
      if (!(x > 0.0)) throw PositivityError("targets must be strictly positive");
      lo = std::min(lo, x);
    }
  const double md = static_cast<double>(m);
  return 2.0 + 2.0 * md * md / eps_stop * (c_inf / eta - std::log(lo));
}

double iteration_bound_b(std::span<const std::size_t> mode_sizes, double eta, double eps_stop,
                         double k_l1_norm) {
  if (mode_sizes.empty()) throw DimensionError("no modes");
  for (auto n : mode_sizes)
    if (n != mode_sizes[0]) throw DimensionError("iteration bound (b) needs equal mode sizes");
  if (!(eta > 0.0) || !(eps_stop > 0.0)) throw std::invalid_argument("eta and eps_stop must be positive");
  const double md = static_cast<double>(mode_sizes.size());
  const double root = std::sqrt(static_cast<double>(mode_sizes[0])) + 1.0;
  return 8.0 * md * md * root * root / (eps_stop * eps_stop) * std::log(k_l1_norm / eta);
}

}  // namespace mmot
