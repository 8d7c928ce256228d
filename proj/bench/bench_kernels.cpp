// Serial reference vs OpenMP kernels on a few sizes.
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "mmot/kernels.hpp"
#include "mmot/random.hpp"

using namespace mmot;

namespace {

double best_of(int reps, const std::function<void()>& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

std::vector<double> fill(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform();
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

int main() {
  Rng rng(1);
  std::printf("threads %d\n", omp_get_max_threads());
  std::printf("%-28s %12s %12s %8s %10s\n", "kernel", "serial_s", "parallel_s", "speedup", "max_diff");

  // matrix-vector style step: out[j] = sum_i a[i] * k[i, j]
  for (std::size_t n : {256, 1024, 2048}) {
    const std::vector<std::size_t> sizes = {n, n};
    const std::vector<int> la = {0}, lk = {0, 1}, res = {1}, sum = {0};
    auto a = fill(n, rng), k = fill(n * n, rng);
    std::vector<double> o1(n), o2(n);
    kernels::LabeledView va{a, la}, vk{k, lk};
    const double ts = best_of(5, [&] { kernels::contract_pair_serial(va, vk, res, sum, sizes, o1); });
    const double tp = best_of(5, [&] { kernels::contract_pair_parallel(va, vk, res, sum, sizes, o2); });
    char name[64];
    std::snprintf(name, sizeof name, "matvec n=%zu", n);
    std::printf("%-28s %12.3e %12.3e %8.2f %10.1e\n", name, ts, tp, ts / tp, max_diff(o1, o2));
  }

  // rank-r step: out[j, r] = sum_i a[i, r] * v[i, j] style contraction with a kept label
  for (std::size_t n : {512, 2048}) {
    const std::size_t r = 25;
    const std::vector<std::size_t> sizes = {n, n, r};
    const std::vector<int> la = {0, 2}, lk = {0, 1}, res = {1, 2}, sum = {0};
    auto a = fill(n * r, rng), k = fill(n * n, rng);
    std::vector<double> o1(n * r), o2(n * r);
    kernels::LabeledView va{a, la}, vk{k, lk};
    const double ts = best_of(3, [&] { kernels::contract_pair_serial(va, vk, res, sum, sizes, o1); });
    const double tp = best_of(3, [&] { kernels::contract_pair_parallel(va, vk, res, sum, sizes, o2); });
    char name[64];
    std::snprintf(name, sizeof name, "pair n=%zu r=%zu", n, r);
    std::printf("%-28s %12.3e %12.3e %8.2f %10.1e\n", name, ts, tp, ts / tp, max_diff(o1, o2));
  }

  // all marginals of a dense scaled tensor
  for (std::size_t n : {16, 40}) {
    DenseTensor t({n, n, n, n});
    for (double& x : t.values()) x = rng.uniform();
    std::vector<Vector> g(4);
    for (auto& v : g) v = fill(n, rng);
    std::vector<Vector> m1, m2;
    const double ts = best_of(3, [&] { m1 = kernels::scaled_marginals_serial(t, g); });
    const double tp = best_of(3, [&] { m2 = kernels::scaled_marginals_parallel(t, g); });
    double d = 0.0;
    for (std::size_t k = 0; k < 4; ++k) d = std::max(d, max_diff(m1[k], m2[k]));
    char name[64];
    std::snprintf(name, sizeof name, "scaled_marginals n=%zu m=4", n);
    std::printf("%-28s %12.3e %12.3e %8.2f %10.1e\n", name, ts, tp, ts / tp, d);
  }
  return 0;
}
