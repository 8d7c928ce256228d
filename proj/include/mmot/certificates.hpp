#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mmot {

struct ErrorBudget {
  double eps_log = 0.0;   // bound on ||log K - log K~||_inf
  double eps_stop = 0.0;  // stopping tolerance
  double eta = 1.0;
  std::vector<std::size_t> dims;
  double c_inf = 0.0;     // ||C||_inf

  // Throws HypothesisError unless 0 <= eps_log <= 1, eps_stop >= 0, eta > 0,
  // c_inf >= 0, m >= 2 and every n_k >= 2.
  void validate() const;
};

// Bound on |V(P~) - V(P)| for the entropic objective V = <C,P> - eta H(P).
double epsilon_entropic(const ErrorBudget& b);

// Bound on <C, P^> - min <C, P> after rounding.
double epsilon_total(const ErrorBudget& b);

// Sum of per-factor log errors; bounds the log error of the product kernel.
double compose_factor_errors(std::span<const double> per_factor);

// Rescales by alpha = 1 / c_inf: c_inf -> 1, eta -> alpha eta.
ErrorBudget normalized_budget(const ErrorBudget& b);

}  // namespace mmot
