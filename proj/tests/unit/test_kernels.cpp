#include <doctest.h>

#include <omp.h>

#include "mmot/kernels.hpp"
#include "mmot/tensor.hpp"
#include "test_util.hpp"

using namespace mmot;

TEST_CASE("pair contraction matches a loop oracle") {
  Rng rng(21);
  // labels: 0 (3), 1 (4), 2 (5); a over (0,1), b over (2,1); out[2,0] = sum_1 a b
  const std::size_t sizes[3] = {3, 4, 5};
  auto a = testutil::random_vector(12, rng);
  auto b = testutil::random_vector(20, rng);
  const int la[2] = {0, 1}, lb[2] = {2, 1}, res[2] = {2, 0}, sum[1] = {1};
  Vector out(15);
  kernels::contract_pair_serial({a, la}, {b, lb}, res, sum, sizes, out);
  for (std::size_t k = 0; k < 5; ++k)
    for (std::size_t i = 0; i < 3; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 4; ++j) s += a[i * 4 + j] * b[k * 4 + j];
      CHECK(std::abs(out[k * 3 + i] - s) < 1e-14);
    }
  const int bad_sum[1] = {2};
  CHECK_THROWS(kernels::contract_pair_serial({a, la}, {b, lb}, res, bad_sum, sizes, out));
}

TEST_CASE("serial and parallel kernels agree bitwise") {
  Rng rng(22);
  const std::size_t sizes[4] = {40, 30, 20, 10};
  auto a = testutil::random_vector(40 * 30 * 10, rng);
  auto b = testutil::random_vector(30 * 20 * 10, rng);
  const int la[3] = {0, 1, 3}, lb[3] = {1, 2, 3}, res[2] = {0, 2}, sum[2] = {1, 3};
  Vector s(800), p(800);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(4);
  kernels::contract_pair_serial({a, la}, {b, lb}, res, sum, sizes, s);
  kernels::contract_pair_parallel({a, la}, {b, lb}, res, sum, sizes, p);
  CHECK(s == p);

  auto k = testutil::random_tensor({12, 9, 7}, rng);
  std::vector<Vector> g = {testutil::random_vector(12, rng), testutil::random_vector(9, rng),
                           testutil::random_vector(7, rng)};
  auto ms = kernels::scaled_marginals_serial(k, g);
  auto mp = kernels::scaled_marginals_parallel(k, g);
  for (int d = 0; d < 3; ++d) CHECK(testutil::max_rel_diff(mp[d], ms[d]) < 1e-13);
  omp_set_num_threads(saved);
}

TEST_CASE("scaled marginals equal marginals of the scaled tensor") {
  Rng rng(23);
  auto k = testutil::random_tensor({4, 3, 5}, rng);
  std::vector<Vector> g = {testutil::random_vector(4, rng), testutil::random_vector(3, rng),
                           testutil::random_vector(5, rng)};
  DenseTensor p = k;
  std::size_t idx[3];
  for (std::size_t f = 0; f < p.size(); ++f) {
    p.unravel(f, idx);
    p[f] *= g[0][idx[0]] * g[1][idx[1]] * g[2][idx[2]];
  }
  auto r = kernels::scaled_marginals(k, g);
  for (std::size_t d = 0; d < 3; ++d) CHECK(testutil::max_rel_diff(r[d], marginal(p, d)) < 1e-13);
}
