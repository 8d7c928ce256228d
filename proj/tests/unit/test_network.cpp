#include <doctest.h>

#include <cmath>

#include "mmot/error.hpp"
#include "mmot/network.hpp"
#include "test_util.hpp"

using namespace mmot;
using namespace testutil;

namespace {

std::vector<std::size_t> degrees(const FactorNetwork& net) {
  std::vector<std::size_t> d;
  for (const auto& node : net.delta_nodes()) d.push_back(node.degree());
  return d;
}

std::vector<std::size_t> random_sizes(std::size_t m, Rng& rng, std::size_t lo = 2, std::size_t hi = 5) {
  std::vector<std::size_t> n(m);
  for (auto& x : n) x = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
  return n;
}

void check_against_dense(const std::vector<IndexTuple>& f, std::size_t m, Rng& rng, int draws) {
  for (int d = 0; d < draws; ++d) {
    auto n = random_sizes(m, rng);
    auto km = random_kernel(f, n, rng);
    auto net = build_network(km);
    auto s = random_scalings(n, rng);
    auto p = scaled_dense(assemble_dense_kernel(km), s);
    for (std::size_t k = 0; k < m; ++k) {
      auto plan = plan_marginal(net, static_cast<int>(k));
      CHECK(max_rel_diff(eval_marginal(net, s, static_cast<int>(k), plan), marginal(p, k)) < 1e-11);
    }
  }
}

}  // namespace

TEST_CASE("network shapes follow the factor graph") {
  Rng rng(51);
  auto chain_net = build_network(random_kernel(chain(4), {3, 3, 3, 3}, rng));
  CHECK(chain_net.vertices().size() == 3);
  CHECK(degrees(chain_net) == std::vector<std::size_t>{2, 3, 3, 2});
  CHECK(chain_net.internal_edges().empty());

  auto star_net = build_network(random_kernel(star(4), {3, 3, 3, 3}, rng));
  CHECK(degrees(star_net) == std::vector<std::size_t>{2, 2, 2, 4});

  auto fig1 = build_network(random_kernel(fig1_graph(), {2, 3, 2, 3, 2}, rng));
  CHECK(fig1.vertices().size() == 4);
  CHECK(degrees(fig1) == std::vector<std::size_t>{3, 3, 2, 4, 2});

  auto lr = build_network(random_lowrank_kernel(chain(4), {5, 5, 5, 5}, 2, rng));
  CHECK(lr.vertices().size() == 6);
  CHECK(lr.internal_edges().size() == 3);
  for (const auto& e : lr.internal_edges()) {
    CHECK(e.size == 2);
    CHECK(e.vertices.size() == 2);
  }
  CHECK(degrees(lr) == std::vector<std::size_t>{2, 3, 3, 2});
}

TEST_CASE("flop convention") {
  const std::size_t n = 7;
  const std::size_t sizes[2] = {n, n};
  // matrix-vector product
  CHECK(step_flops(sizes, {{0}, {0, 1}}, std::vector<int>{1}, std::vector<int>{0}) == n * (2 * n - 1));
  // elementwise triple product
  CHECK(step_flops(sizes, {{0}, {0}, {0}}, std::vector<int>{0}, std::vector<int>{}) == 2 * n);
  CHECK(flops(ContractionPlan{}) == 0);
}

TEST_CASE("chain flop counts") {
  Rng rng(52);
  for (std::size_t n : {5, 9, 50}) {
    auto net = build_network(random_kernel(chain(4), {n, n, n, n}, rng));
    for (int k = 0; k < 4; ++k) CHECK(flops(plan_marginal(net, k)) == 6 * n * n);
    Scalings s(net.mode_sizes());
    auto all = eval_all_marginals(net, s);
    CHECK(all.flops == 12 * n * n + 4 * n);
  }
  // one matrix factor: a mat-vec, then the elementwise product with gamma_1
  const std::size_t n = 6;
  auto net2 = build_network(random_kernel({{0, 1}}, {n, n}, rng));
  auto plan = plan_marginal(net2, 0);
  REQUIRE(plan.steps.size() == 2);
  CHECK(plan.steps[0].flops == n * (2 * n - 1));
  CHECK(plan.steps[1].flops == n);
}

TEST_CASE("low-rank chain marginals cost O(nr)") {
  Rng rng(53);
  for (std::size_t r : {2, 5, 10})
    for (std::size_t n : {100, 420}) {
      auto net = build_network(random_lowrank_kernel(chain(4), {n, n, n, n}, r, rng));
      Scalings s(net.mode_sizes());
      CHECK(eval_all_marginals(net, s).flops <= 40 * n * r);
    }
}

TEST_CASE("structured marginals match the dense oracle") {
  Rng rng(54);
  check_against_dense(chain(4), 4, rng, 10);
  check_against_dense(chain(5), 5, rng, 10);
  check_against_dense(star(4), 4, rng, 10);
  check_against_dense(fig1_graph(), 5, rng, 10);
  check_against_dense(window5(), 5, rng, 10);
}

TEST_CASE("low-rank and tensor-train networks match their dense expansions") {
  Rng rng(55);
  std::vector<std::size_t> n = {4, 5, 3, 4, 5};
  auto km = random_lowrank_kernel(window5(), n, 3, rng);
  auto net = build_network(km);
  auto s = random_scalings(n, rng);
  auto p = scaled_dense(assemble_dense_kernel(km), s);
  for (int k = 0; k < 5; ++k)
    CHECK(max_rel_diff(eval_marginal(net, s, k, plan_marginal(net, k)), marginal(p, static_cast<std::size_t>(k))) <
          1e-11);

  auto t = random_tensor({3, 4, 3, 2}, rng);
  const std::size_t ranks[3] = {3, 6, 2};
  auto tt = tt_svd(t, ranks);
  auto tnet = network_from_tt(tt);
  CHECK(tnet.internal_edges().size() == 3);
  std::vector<std::size_t> tn = {3, 4, 3, 2};
  auto ts = random_scalings(tn, rng);
  auto tp = scaled_dense(tt_full(tt), ts);
  for (int k = 0; k < 4; ++k) {
    auto plan = plan_marginal(tnet, k);
    CHECK(max_rel_diff(eval_marginal(tnet, ts, k, plan), marginal(tp, static_cast<std::size_t>(k))) < 1e-11);
  }
  auto mat = materialize(tnet, ts);
  CHECK(max_rel_diff(Vector(mat.values().begin(), mat.values().end()),
                     Vector(tp.values().begin(), tp.values().end())) < 1e-11);
}

TEST_CASE("plans built with different strategies agree") {
  Rng rng(56);
  for (const auto& f : {chain(5), star(4), fig1_graph(), window5()}) {
    const std::size_t m = f == star(4) ? 4 : 5;
    auto n = random_sizes(m, rng);
    auto net = build_network(random_kernel(f, n, rng));
    auto s = random_scalings(n, rng);
    for (std::size_t k = 0; k < m; ++k) {
      const int kk = static_cast<int>(k);
      auto ref = eval_marginal(net, s, kk, plan_marginal(net, kk, PlanStrategy::Sequential));
      for (auto st : {PlanStrategy::Greedy, PlanStrategy::GreedySize, PlanStrategy::GreedyCost,
                      PlanStrategy::GreedyModesFirst})
        CHECK(max_rel_diff(eval_marginal(net, s, kk, plan_marginal(net, kk, st)), ref) < 1e-10);
    }
  }
}

TEST_CASE("simple marginals") {
  const std::size_t n = 3;
  KernelModel ones({n, n, n, n},
                   {{{0, 1}, DenseTensor({n, n}, 1.0)}, {{1, 2}, DenseTensor({n, n}, 1.0)},
                    {{2, 3}, DenseTensor({n, n}, 1.0)}},
                   1.0);
  auto net = build_network(ones);
  Scalings s(net.mode_sizes());
  for (const auto& r : eval_all_marginals(net, s).marginals)
    for (double x : r) CHECK(x == double(n * n * n));

  Rng rng(57);
  auto k = random_tensor({4, 5}, rng);
  auto net2 = build_network(KernelModel({4, 5}, {{{0, 1}, k}}, 1.0));
  Scalings s2(net2.mode_sizes());
  auto g1 = random_vector(4, rng);
  s2.set(0, g1);
  auto r = eval_marginal(net2, s2, 0, plan_marginal(net2, 0));
  for (std::size_t i = 0; i < 4; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 5; ++j) row += k[i * 5 + j];
    CHECK(rel(r[i], g1[i] * row) < 1e-14);
  }
}

TEST_CASE("scaling one gamma scales every marginal") {
  Rng rng(58);
  std::vector<std::size_t> n = {3, 4, 3, 2};
  auto net = build_network(random_kernel(chain(4), n, rng));
  auto s = random_scalings(n, rng);
  auto before = eval_all_marginals(net, s).marginals;
  s.scale(1, 2.5);
  auto after = eval_all_marginals(net, s).marginals;
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t i = 0; i < n[k]; ++i) CHECK(rel(after[k][i], 2.5 * before[k][i]) < 1e-13);
}

TEST_CASE("intermediate cache follows scaling versions") {
  Rng rng(59);
  std::vector<std::size_t> n = {4, 4, 4, 4};
  auto km = random_kernel(chain(4), n, rng);
  ContractionEngine engine(build_network(km));
  auto s = random_scalings(n, rng);
  auto dense = assemble_dense_kernel(km);
  for (int round = 0; round < 6; ++round) {
    auto r = engine.all_marginals(s);
    auto p = scaled_dense(dense, s);
    for (std::size_t k = 0; k < 4; ++k) CHECK(max_rel_diff(r[k], marginal(p, k)) < 1e-12);
    s.multiply(static_cast<std::size_t>(round % 4), random_vector(4, rng, 0.5, 1.5));
  }
  // a second, identical-looking Scalings never reads stale entries
  Scalings fresh(n);
  auto r = engine.all_marginals(fresh);
  for (std::size_t k = 0; k < 4; ++k) CHECK(max_rel_diff(r[k], marginal(dense, k)) < 1e-12);
}

TEST_CASE("fixed scalings reject updates") {
  Scalings s({3, 3}, {false, true});
  CHECK_NOTHROW(s.set(0, {1, 2, 3}));
  CHECK_THROWS(s.set(1, {1, 2, 3}));
  CHECK_THROWS_AS(s.set(0, {1, 0, 3}), PositivityError);
}

TEST_CASE("transport cost") {
  Rng rng(60);
  std::vector<std::size_t> n = {4, 3, 4, 3};
  std::vector<CostFactor> cf;
  for (auto& a : chain(4)) cf.push_back({a, random_tensor({n[a[0]], n[a[1]]}, rng, 0.0, 2.0)});
  CostModel c(n, cf);
  auto km = gibbs_factors(c, 0.8);
  auto net = build_network(km);
  auto s = random_scalings(n, rng);
  auto p = scaled_dense(assemble_dense_kernel(km), s);
  CHECK(rel(eval_cost(net, s, c), inner(assemble_dense_cost(c), p)) < 1e-10);

  std::vector<CostFactor> zf;
  for (auto& a : chain(4)) zf.push_back({a, DenseTensor({n[a[0]], n[a[1]]}, 0.0)});
  CHECK(eval_cost(net, s, CostModel(n, zf)) == 0.0);

  Rank1Correction corr;
  corr.prefactor = 0.37;
  for (auto nk : n) corr.vectors.push_back(random_vector(nk, rng, -0.5, 0.5));
  DenseTensor pc = p;
  auto cm = corr.materialize();
  for (std::size_t i = 0; i < pc.size(); ++i) pc[i] += cm[i];
  CHECK(rel(eval_cost(net, s, c, &corr), inner(assemble_dense_cost(c), pc)) < 1e-10);
  for (std::size_t k = 0; k < 4; ++k) CHECK(max_rel_diff(corr.marginal(k), marginal(cm, k)) < 1e-12);

  // two-mode loop oracle
  auto cm2 = random_tensor({3, 5}, rng);
  CostModel c2({3, 5}, {{{0, 1}, cm2}});
  auto k2 = gibbs_factors(c2, 1.0);
  auto net2 = build_network(k2);
  auto s2 = random_scalings({3, 5}, rng);
  const auto& kk = std::get<DenseTensor>(k2.factors()[0].form);
  double oracle = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 5; ++j) oracle += cm2[i * 5 + j] * s2.gamma(0)[i] * kk[i * 5 + j] * s2.gamma(1)[j];
  CHECK(rel(eval_cost(net2, s2, c2), oracle) < 1e-12);
}

TEST_CASE("window graph marginals scale linearly in n") {
  Rng rng(61);
  const std::size_t r = 5;
  auto flops_at = [&](std::size_t n) {
    auto net = build_network(random_lowrank_kernel(window5(), std::vector<std::size_t>(5, n), r, rng));
    return static_cast<double>(flops(plan_marginal(net, 2)));
  };
  const double ratio = flops_at(288) / flops_at(144);
  CHECK(ratio > 2.0 * 0.75);
  CHECK(ratio < 2.0 * 1.25);
}

TEST_CASE("positivity failures surface from low-rank networks") {
  LowRankPair lr{Matrix::Ones(3, 1), Matrix::Ones(3, 1)};
  lr.u(1, 0) = -5.0;
  auto net = build_network(KernelModel({3, 3}, {{{0, 1}, lr}}, 1.0));
  Scalings s(net.mode_sizes());
  CHECK_THROWS_AS(eval_marginal(net, s, 0, plan_marginal(net, 0)), PositivityError);
}
