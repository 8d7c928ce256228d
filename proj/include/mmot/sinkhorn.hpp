#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mmot/network.hpp"
#include "mmot/tensor.hpp"

namespace mmot {

// Evaluates r_k(P) for P = K scaled by the current gammas.
class MarginalOracle {
 public:
  virtual ~MarginalOracle() = default;
  virtual std::vector<std::size_t> mode_sizes() const = 0;
  virtual Vector marginal(const Scalings& s, std::size_t k) = 0;
  virtual std::vector<Vector> all_marginals(const Scalings& s);
  // Operation count accumulated so far.
  virtual std::uint64_t flops() const { return 0; }
};

class DenseOracle : public MarginalOracle {
 public:
  explicit DenseOracle(DenseTensor k);
  std::vector<std::size_t> mode_sizes() const override { return k_.dims(); }
  Vector marginal(const Scalings& s, std::size_t k) override;
  std::vector<Vector> all_marginals(const Scalings& s) override;
  std::uint64_t flops() const override { return flops_; }
  const DenseTensor& kernel() const { return k_; }

 private:
  DenseTensor k_;
  std::uint64_t flops_ = 0;
};

class NetworkOracle : public MarginalOracle {
 public:
  explicit NetworkOracle(FactorNetwork net, PlanStrategy strategy = PlanStrategy::Greedy,
                         bool cache_intermediates = true);
  std::vector<std::size_t> mode_sizes() const override { return engine_.network().mode_sizes(); }
  Vector marginal(const Scalings& s, std::size_t k) override;
  std::vector<Vector> all_marginals(const Scalings& s) override;
  std::uint64_t flops() const override { return engine_.flops(); }
  ContractionEngine& engine() { return engine_; }
  const FactorNetwork& network() const { return engine_.network(); }

 private:
  ContractionEngine engine_;
};

enum class Selection { Cyclic, GreedyDistance, GreedyProjection };
enum class Stopping { L1Sum, Projection };

struct SinkhornConfig {
  double eta = 1.0;
  double eps_stop = 1e-4;
  Selection selection = Selection::GreedyProjection;
  Stopping stopping = Stopping::Projection;
  std::vector<int> update_set;  // empty means every mode
  std::size_t max_iters = 100'000;
  bool normalize_first = false;
};

struct IterationRecord {
  std::size_t t;         // iterations completed
  int k;                 // mode just updated
  double residual;       // residual before the update
  const Scalings* scalings;
};

struct SinkhornResult {
  Scalings scalings;
  std::size_t iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
  std::vector<int> selected_indices;
  std::vector<Vector> marginals;  // r_k(P) at termination
};

// Targets for modes outside the update set may be left empty.
SinkhornResult solve(MarginalOracle& oracle, const std::vector<Vector>& targets,
                     const SinkhornConfig& cfg,
                     const std::function<void(const IterationRecord&)>& hook = {});

// Marginals of the current iterate next to their targets.
struct SinkhornState {
  std::span<const Vector> marginals;
  std::span<const Vector> targets;
  std::span<const int> update_set;
};

double distance_quantity(std::span<const double> target, std::span<const double> marginal);
double projection_quantity(std::span<const double> target, std::span<const double> marginal);

int select_greedy_distance(const SinkhornState& st);
int select_greedy_projection(const SinkhornState& st);
double l1_residual(const SinkhornState& st);
bool stopping_l1(const SinkhornState& st, double eps);
bool stopping_projection(const SinkhornState& st, double eps, std::size_t m);

// 2 + 2 m^2 / eps * (C_inf / eta - log min_{k,i} r_k,i). Warns on stderr
// when eta is outside (0, 1/2).
double iteration_bound_a(double c_inf, const std::vector<Vector>& targets, double eta,
                         double eps_stop, std::size_t m);
// 8 m^2 (sqrt n + 1)^2 / eps^2 * log(||K||_1 / eta); equal mode sizes only.
double iteration_bound_b(std::span<const std::size_t> mode_sizes, double eta, double eps_stop,
                         double k_l1_norm);

}  // namespace mmot
