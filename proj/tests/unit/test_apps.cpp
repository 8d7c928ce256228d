#include <doctest.h>

#include <cmath>

#include "mmot/apps.hpp"
#include "mmot/error.hpp"
#include "mmot/lowrank.hpp"
#include "mmot/network.hpp"
#include "mmot/rounding.hpp"
#include "test_util.hpp"

using namespace mmot;
using namespace testutil;

TEST_CASE("image grid validation") {
  CHECK_THROWS_AS(ImageGrid(2, 2, std::vector<Rgb>(3)), DimensionError);
  CHECK_THROWS(ImageGrid(1, 1, {Rgb{0.5, 1.2, 0.0}}));
  ImageGrid g(2, 1, {Rgb{0, 0.5, 1}, Rgb{1, 1, 1}});
  CHECK(g.points()(0, 1) == 0.5);
  auto s = synthetic_image(8, 8, 3);
  for (const auto& p : s.pixels())
    for (double c : p) CHECK((c >= 0.0 && c <= 1.0));
}

TEST_CASE("proof of concept at full rank reproduces the reference") {
  PocConfig cfg;
  cfg.n = 6;
  cfg.ranks = {6};
  cfg.seed = 4;
  auto rep = run_poc(cfg);
  REQUIRE(rep.ranks.size() == 1);
  CHECK(rep.converged);
  CHECK(rep.ranks[0].cost_diff_svds <= 1e-10);
  CHECK(rep.ranks[0].cost_diff_tt <= 1e-10);
  CHECK(rep.ranks[0].log_err_svds < 1e-10);
}

TEST_CASE("proof of concept reference matches a dense twin") {
  const std::size_t n = 5;
  auto c = poc_cost(n, 9);
  auto k = gibbs_factors(c, 1.0);
  DenseOracle dense(assemble_dense_kernel(k));
  SinkhornConfig scfg;
  std::vector<Vector> t(4, Vector(n, 1.0 / n));
  auto res = solve(dense, t, scfg);
  auto p = round_dense(scaled_dense(dense.kernel(), res.scalings), t);
  PocConfig cfg;
  cfg.n = n;
  cfg.seed = 9;
  auto rep = run_poc(cfg);
  CHECK(rel(rep.reference_cost, inner(assemble_dense_cost(c), p)) < 1e-8);
}

TEST_CASE("proof of concept cost difference shrinks with rank") {
  PocConfig cfg;
  cfg.n = 12;
  cfg.ranks = {3, 12};
  cfg.seed = 5;
  auto rep = run_poc(cfg);
  REQUIRE(rep.ranks.size() == 2);
  CHECK(rep.ranks[1].cost_diff_svds < rep.ranks[0].cost_diff_svds);
  CHECK(rep.ranks[1].cost_diff_tt < rep.ranks[0].cost_diff_tt);
  CHECK(rep.ranks[1].log_err_svds < rep.ranks[0].log_err_svds);
}

TEST_CASE("proof of concept skips the tensor train over budget") {
  PocConfig cfg;
  cfg.n = 8;
  cfg.ranks = {4};
  cfg.tt_budget = 100;
  auto rep = run_poc(cfg);
  CHECK(std::isnan(rep.ranks[0].cost_diff_tt));
  CHECK(rep.ranks[0].note.find("tt: skipped") != std::string::npos);
  CHECK_THROWS(run_poc(PocConfig{1, {}, 1.0}));
}

namespace {

std::array<Matrix, 3> random_colors(std::size_t n, Rng& rng) {
  std::array<Matrix, 3> x;
  for (auto& m : x) {
    m.resize(static_cast<Eigen::Index>(n), 3);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (int c = 0; c < 3; ++c) m(i, c) = rng.uniform();
  }
  return x;
}

Vector barycenter_dense_vs_structured(const std::array<Matrix, 3>& x, const std::array<double, 3>& lambda) {
  Matrix xb = lambda[0] * x[0] + lambda[1] * x[1] + lambda[2] * x[2];
  auto k = gibbs_factors(star_cost(x, xb, lambda), 0.1);
  DenseOracle dense(assemble_dense_kernel(k));
  NetworkOracle net(build_network(k));
  auto a = barycenter_star(dense, 1e-10);
  auto b = barycenter_star(net, 1e-10);
  CHECK(max_rel_diff(a.r_b, b.r_b) < 1e-9);
  CHECK(std::abs(sum(b.r_b) - 1.0) < 1e-8);
  for (double v : b.r_b) CHECK(v > 0.0);
  return b.r_b;
}

}  // namespace

TEST_CASE("barycenter matches the dense oracle") {
  Rng rng(61);
  auto x = random_colors(16, rng);
  barycenter_dense_vs_structured(x, {1.0 / 3, 1.0 / 3, 1.0 / 3});

  SUBCASE("identical inputs") {
    std::array<Matrix, 3> same = {x[0], x[0], x[0]};
    barycenter_dense_vs_structured(same, {0.2, 0.5, 0.3});
    barycenter_dense_vs_structured(same, {0.6, 0.1, 0.3});
  }
  SUBCASE("weight collapse") {
    auto rb = barycenter_dense_vs_structured(x, {1.0, 0.0, 0.0});
    auto k = gibbs_factors(star_cost(x, x[0], {1.0, 0.0, 0.0}), 0.1);
    for (double v : std::get<DenseTensor>(k.factors()[1].form).values()) CHECK(v == 1.0);
    // with mode 4 pinned, gamma_1 is proportional to 1 / (K1 1) and r_B to K1^T gamma_1
    Matrix k1 = std::get<DenseTensor>(k.factors()[0].form).to_matrix();
    Eigen::VectorXd g = k1.rowwise().sum().cwiseInverse();
    Eigen::VectorXd expect = k1.transpose() * g;
    expect /= expect.sum();
    CHECK(max_rel_diff(rb, Vector(expect.data(), expect.data() + expect.size())) < 1e-8);
  }
  CHECK_THROWS(star_cost(x, x[0], {0.5, 0.6, 0.0}));
}

TEST_CASE("color transfer") {
  SUBCASE("self transfer keeps the image") {
    auto img = synthetic_image(16, 16, 11);
    ColorConfig cfg;
    cfg.lambda = {1.0, 0.0, 0.0};
    cfg.rank = 0;
    auto out = run_color_transfer({img, img, img, img}, cfg);
    // the entropic blur at eta = 0.1 pulls the extreme colors inward, so the mean is bounded
    double mean = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i)
      for (std::size_t c = 0; c < 3; ++c) mean += std::abs(out.image.pixel(i)[c] - img.pixel(i)[c]);
    CHECK(mean / (3.0 * static_cast<double>(img.size())) <= 0.05);
  }
  SUBCASE("pipeline matches a dense twin") {
    std::array<ImageGrid, 4> im = {synthetic_image(5, 5, 21), synthetic_image(5, 5, 22), synthetic_image(5, 5, 23),
                                   synthetic_image(5, 5, 24)};
    ColorConfig cfg;
    cfg.rank = 0;
    cfg.eps_stop = 1e-10;
    auto out = run_color_transfer(im, cfg);
    const std::size_t n = 25;
    std::array<Matrix, 3> src = {im[0].points(), im[1].points(), im[2].points()};
    Matrix xb = (src[0] + src[1] + src[2]) / 3.0;
    DenseOracle star(assemble_dense_kernel(gibbs_factors(star_cost(src, xb, cfg.lambda), 0.1)));
    auto rb = barycenter_star(star, 1e-10).r_b;
    CHECK(max_rel_diff(rb, out.r_b) < 1e-8);
    const double mass = sum(rb);
    for (double& v : rb) v /= mass;
    auto k2 = assemble_dense_kernel(gibbs_factors(CostModel({n, n}, {{{0, 1}, sqdist_cost(xb, im[3].points())}}), 0.1));
    DenseOracle two(k2);
    SinkhornConfig scfg;
    scfg.eps_stop = 1e-10;
    auto res = solve(two, {rb, Vector(n, 1.0 / n)}, scfg);
    auto p = scaled_dense(k2, res.scalings);
    for (std::size_t j = 0; j < n; ++j) {
      double col = 0.0;
      Rgb acc{0, 0, 0};
      for (std::size_t i = 0; i < n; ++i) {
        col += p[i * n + j];
        for (int c = 0; c < 3; ++c) acc[static_cast<std::size_t>(c)] += p[i * n + j] * xb(static_cast<Eigen::Index>(i), c);
      }
      for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(acc[c] / col - out.image.pixel(j)[c]) < 1e-8);
    }
  }
  SUBCASE("full rank equals full matrices") {
    std::array<ImageGrid, 4> im = {synthetic_image(6, 6, 1), synthetic_image(6, 6, 2), synthetic_image(6, 6, 3),
                                   synthetic_image(6, 6, 4)};
    ColorConfig cfg;
    cfg.rank = 35;
    cfg.compare_full = true;
    auto lr = run_color_transfer(im, cfg);
    cfg.rank = 0;
    auto full = run_color_transfer(im, cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < 36; ++i)
      for (std::size_t c = 0; c < 3; ++c) worst = std::max(worst, std::abs(lr.image.pixel(i)[c] - full.image.pixel(i)[c]));
    CHECK(worst <= 1e-8);
  }
  SUBCASE("error decays with rank at 16x16") {
    std::array<ImageGrid, 4> im = {synthetic_image(16, 16, 1), synthetic_image(16, 16, 2),
                                   synthetic_image(16, 16, 3), synthetic_image(16, 16, 4)};
    double prev = 1e300;
    for (std::size_t r : {3, 5, 10, 50}) {
      ColorConfig cfg;
      cfg.rank = r;
      cfg.compare_full = true;
      auto out = run_color_transfer(im, cfg);
      CHECK(out.metrics.converged);
      CHECK(out.metrics.inf_error < prev);
      prev = out.metrics.inf_error;
      CHECK(out.full_sweep_flops > out.sweep_flops);
    }
  }
  SUBCASE("mismatched sizes") {
    std::array<ImageGrid, 4> im = {synthetic_image(4, 4, 1), synthetic_image(4, 4, 2), synthetic_image(4, 4, 3),
                                   synthetic_image(4, 5, 4)};
    CHECK_THROWS_AS(run_color_transfer(im, ColorConfig{}), DimensionError);
  }
}

TEST_CASE("bridge graph parsing") {
  CHECK(parse_bridge_graph("chain") == BridgeGraph::Chain);
  CHECK(parse_bridge_graph("window") == BridgeGraph::Window);
  CHECK_THROWS(parse_bridge_graph("ring"));
  CHECK(bridge_edges(BridgeGraph::Window).size() == 7);
}

TEST_CASE("bridge chain against message passing") {
  const std::size_t s = 8, n = 64;
  auto a = grid_blob(s, 0.2, 0.3, 0.15);
  auto b = grid_blob(s, 0.7, 0.8, 0.2);
  BridgeConfig cfg;
  cfg.side = s;
  cfg.rank = 0;
  cfg.eps_stop = 1e-9;
  auto out = run_bridge(a, b, cfg);
  CHECK(out.metrics.converged);
  const Matrix x = unit_grid(s);
  Matrix k(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j) k(i, j) = std::exp(-(x.row(i) - x.row(j)).squaredNorm());
  // forward and backward messages along the chain
  const auto& g = out.gammas;
  Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(g[0].data(), 64);
  std::vector<Eigen::VectorXd> fwd = {f}, bwd(5);
  for (int j = 1; j < 5; ++j) fwd.push_back(k.transpose() * fwd.back());
  bwd[4] = Eigen::Map<const Eigen::VectorXd>(g[4].data(), 64);
  for (int j = 3; j >= 0; --j) bwd[static_cast<std::size_t>(j)] = k * bwd[static_cast<std::size_t>(j + 1)];
  for (std::size_t m = 0; m < 5; ++m) {
    Vector expect(n);
    for (std::size_t i = 0; i < n; ++i) expect[i] = fwd[m](static_cast<Eigen::Index>(i)) * bwd[m](static_cast<Eigen::Index>(i));
    CHECK(max_rel_diff(expect, out.marginals[m]) < 1e-9);
  }
  const double mass = sum(out.marginals[0]);
  for (std::size_t m = 0; m < 5; ++m) CHECK(std::abs(sum(out.marginals[m]) - mass) < 1e-10);
}

TEST_CASE("bridge time reversal and dense twin") {
  const std::size_t s = 3, n = 9;
  auto a = grid_blob(s, 0.2, 0.3, 0.3);
  BridgeConfig cfg;
  cfg.side = s;
  cfg.rank = 0;
  cfg.eps_stop = 1e-10;
  auto out = run_bridge(a, a, cfg);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(out.marginals[1][i] - out.marginals[3][i]) < 1e-8);

  // dense twin over all 9^5 entries
  auto b = grid_blob(s, 0.9, 0.6, 0.4);
  auto st = run_bridge(a, b, cfg);
  const Matrix x = unit_grid(s);
  Matrix kk(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < kk.rows(); ++i)
    for (Eigen::Index j = 0; j < kk.cols(); ++j) kk(i, j) = std::exp(-(x.row(i) - x.row(j)).squaredNorm());
  std::vector<KernelFactor> f;
  for (const auto& e : bridge_edges(BridgeGraph::Chain)) f.push_back({e, DenseTensor::from_matrix(kk)});
  DenseOracle dense(assemble_dense_kernel(KernelModel(std::vector<std::size_t>(5, n), f, 1.0)));
  SinkhornConfig scfg;
  scfg.eps_stop = 1e-10;
  scfg.update_set = {0, 4};
  auto res = solve(dense, {a, {}, {}, {}, b}, scfg);
  for (std::size_t m = 0; m < 5; ++m) CHECK(max_rel_diff(res.marginals[m], st.marginals[m]) < 1e-9);
}

TEST_CASE("bridge window flops grow linearly in n") {
  BridgeConfig cfg;
  cfg.graph = BridgeGraph::Window;
  cfg.rank = 10;
  cfg.side = 8;
  auto small = run_bridge(grid_blob(8, 0.2, 0.3, 0.1), grid_blob(8, 0.8, 0.7, 0.15), cfg);
  cfg.side = 12;
  auto big = run_bridge(grid_blob(12, 0.2, 0.3, 0.1), grid_blob(12, 0.8, 0.7, 0.15), cfg);
  const double ratio = static_cast<double>(big.per_marginal_flops) / static_cast<double>(small.per_marginal_flops);
  CHECK(std::abs(ratio / 2.25 - 1.0) <= 0.25);
  CHECK_THROWS_AS(run_bridge(Vector(10, 0.1), Vector(64, 1.0 / 64), BridgeConfig{}), DimensionError);
}
