#include "mmot/certificates.hpp"

#include <cmath>
#include <stdexcept>

#include "mmot/error.hpp"

namespace mmot {

namespace {

// x log(c / x) with the x -> 0 limit.
double xlog(double x, double c) { return x > 0.0 ? x * std::log(c / x) : 0.0; }

}  // namespace

void ErrorBudget::validate() const {
  if (!(eps_log >= 0.0) || eps_log > 1.0) throw HypothesisError("eps_log must lie in [0, 1]");
  if (!(eps_stop >= 0.0)) throw HypothesisError("eps_stop must be non-negative");
  if (!(eta > 0.0)) throw HypothesisError("eta must be positive");
  if (!(c_inf >= 0.0)) throw HypothesisError("c_inf must be non-negative");
  if (dims.size() < 2) throw HypothesisError("at least two marginals required");
  for (auto n : dims)
    if (n < 2) throw HypothesisError("every mode needs at least two points");
}

double epsilon_entropic(const ErrorBudget& b) {
  b.validate();
  double total = 1.0;
  for (auto n : b.dims) total *= static_cast<double>(n);
  const double big = total - 1.0;
  const double reg = b.eps_log * 2.0 + xlog(b.eps_log, 2.0) + 0.5 * b.eps_log * std::log(big) +
                     2.0 * xlog(b.eps_stop, big);
  return b.eta * reg + (b.eps_log + 2.0 * b.eps_stop) * b.c_inf;
}

double epsilon_total(const ErrorBudget& b) {
  b.validate();
  double logs = 0.0;
  for (auto n : b.dims) logs += std::log(static_cast<double>(n));
  return 2.0 * b.eta * b.eps_log + 2.0 * b.eta * logs + 4.0 * b.c_inf * b.eps_stop;
}

double compose_factor_errors(std::span<const double> per_factor) {
  double s = 0.0;
  for (double e : per_factor) {
    if (!(e >= 0.0)) throw std::invalid_argument("factor errors must be non-negative");
    s += e;
  }
  return s;
}

ErrorBudget normalized_budget(const ErrorBudget& b) {
  if (!(b.c_inf > 0.0)) throw std::invalid_argument("normalization needs c_inf > 0");
  const double alpha = 1.0 / b.c_inf;
  ErrorBudget out = b;
  out.c_inf = 1.0;
  out.eta = alpha * b.eta;
  return out;
}

}  // namespace mmot
