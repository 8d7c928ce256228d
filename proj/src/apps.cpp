#include "mmot/apps.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mmot/error.hpp"
#include "mmot/lowrank.hpp"
#include "mmot/network.hpp"
#include "mmot/random.hpp"
#include "mmot/rounding.hpp"

namespace mmot {

ImageGrid::ImageGrid(std::size_t width, std::size_t height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (pixels_.size() != width_ * height_) throw DimensionError("ImageGrid: pixel count mismatch");
  for (const auto& p : pixels_)
    for (double c : p)
      if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("ImageGrid: channel outside [0,1]");
}

Matrix ImageGrid::points() const {
  Matrix x(static_cast<Eigen::Index>(size()), 3);
  for (std::size_t i = 0; i < size(); ++i)
    for (int c = 0; c < 3; ++c) x(static_cast<Eigen::Index>(i), c) = pixels_[i][static_cast<std::size_t>(c)];
  return x;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vector uniform(std::size_t n) { return Vector(n, 1.0 / static_cast<double>(n)); }

Matrix gibbs_matrix(const Matrix& c, double eta) { return (-(c.array() / eta)).exp().matrix(); }

Matrix random_points(std::size_t n, std::size_t dim, Rng& rng) {
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.uniform();
  return x;
}

// Dense factor for rank 0 or rank >= n, otherwise a rank-r factor.
KernelFactor kernel_factor(const IndexTuple& alpha, const Matrix& k, std::size_t rank, SvdMethod method,
                           std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(std::min(k.rows(), k.cols()));
  if (rank == 0 || rank >= n) return KernelFactor{alpha, DenseTensor::from_matrix(k)};
  return lowrank_kernel_factor(alpha, k, rank, method, seed);
}

struct Solved {
  double cost = 0.0;
  std::uint64_t flops = 0;
  double seconds = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

Solved solve_round_cost(FactorNetwork net, const CostModel& c, const std::vector<Vector>& targets,
                        const SinkhornConfig& scfg) {
  NetworkOracle oracle(std::move(net));
  const auto t0 = Clock::now();
  auto res = solve(oracle, targets, scfg);
  auto rounded = round_structured(oracle, res.scalings, targets);
  Solved out;
  out.seconds = seconds_since(t0);
  out.cost = eval_cost(oracle.network(), rounded.scalings, c, &rounded.correction);
  out.flops = oracle.flops();
  out.iterations = res.iterations;
  out.converged = res.converged;
  return out;
}

}  // namespace

CostModel poc_cost(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("run_poc: n must be at least 2");
  Rng rng(seed);
  std::array<Matrix, 4> x;
  for (auto& xi : x) xi = random_points(n, 2, rng);
  std::vector<CostFactor> f;
  for (int k = 0; k < 3; ++k)
    f.push_back({IndexTuple{k, k + 1}, sqdist_cost(x[static_cast<std::size_t>(k)], x[static_cast<std::size_t>(k + 1)])});
  return CostModel({n, n, n, n}, std::move(f));
}

ExperimentReport run_poc(const PocConfig& cfg) {
  const std::size_t n = cfg.n;
  const auto c = poc_cost(n, cfg.seed);
  const auto k = gibbs_factors(c, cfg.eta);
  const std::vector<Vector> targets(4, uniform(n));
  SinkhornConfig scfg;
  scfg.eta = cfg.eta;
  scfg.eps_stop = cfg.eps_stop;
  scfg.max_iters = cfg.max_iters;

  ExperimentReport rep;
  const auto ref = solve_round_cost(build_network(k), c, targets, scfg);
  rep.reference_cost = ref.cost;
  rep.reference_flops = ref.flops;
  rep.reference_seconds = ref.seconds;
  rep.reference_iterations = ref.iterations;
  rep.converged = ref.converged;

  const std::vector<std::size_t> dims(4, n);
  const bool tt_ok = static_cast<double>(n) * n * n * n <= static_cast<double>(cfg.tt_budget);
  DenseTensor dense_k;
  if (tt_ok) dense_k = assemble_dense_kernel(k, cfg.tt_budget);

  for (std::size_t r : cfg.ranks) {
    RankResult row;
    row.rank = r;
    if (r == 0) {
      row.note = "rank must be positive";
      rep.ranks.push_back(row);
      continue;
    }
    if (r > n) {
      row.note = "svds: rank exceeds n";
    } else {
      try {
        std::vector<KernelFactor> lr;
        for (const auto& f : k.factors())
          lr.push_back(lowrank_kernel_factor(f.alpha, std::get<DenseTensor>(f.form).to_matrix(), r));
        KernelModel ksvd(dims, std::move(lr), cfg.eta);
        const auto s = solve_round_cost(build_network(ksvd), c, targets, scfg);
        row.cost_diff_svds = std::abs(s.cost - ref.cost);
        row.log_err_svds = log_error(k, ksvd, LogErrorMode::sample(cfg.log_samples, cfg.seed + r));
        row.flops = s.flops;
        row.seconds = s.seconds;
        row.iterations = s.iterations;
        row.converged = s.converged;
        rep.converged = rep.converged && s.converged;
      } catch (const PositivityError& e) {
        row.note = "svds: " + std::string(e.what());
      }
    }

    if (!tt_ok) {
      if (!row.note.empty()) row.note += "; ";
      row.note += "tt: skipped, n^4 exceeds budget";
    } else {
      auto tt = tt_svd(dense_k, tt_feasible_ranks(dims, r));
      const auto full = tt_full(tt);
      if (full.min() <= 0.0) {
        if (!row.note.empty()) row.note += "; ";
        row.note += "tt: nonpositive entry";
      } else {
        const auto s = solve_round_cost(network_from_tt(tt), c, targets, scfg);
        row.cost_diff_tt = std::abs(s.cost - ref.cost);
        Rng rng(cfg.seed + r);
        double err = 0.0;
        for (std::size_t i = 0; i < cfg.log_samples; ++i) {
          const auto flat = static_cast<std::size_t>(rng.below(full.size()));
          err = std::max(err, std::abs(std::log(dense_k[flat]) - std::log(full[flat])));
        }
        row.log_err_tt = err;
        row.flops_tt = s.flops;
        rep.converged = rep.converged && s.converged;
      }
    }
    rep.ranks.push_back(row);
  }
  return rep;
}

CostModel star_cost(const std::array<Matrix, 3>& sources, const Matrix& bary_points,
                    const std::array<double, 3>& lambda) {
  const auto n = static_cast<std::size_t>(bary_points.rows());
  double total = 0.0;
  for (double l : lambda) {
    if (!(l >= 0.0)) throw std::invalid_argument("star_cost: negative weight");
    total += l;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("star_cost: weights must sum to 1");
  std::vector<CostFactor> f;
  for (int k = 0; k < 3; ++k) {
    auto c = sqdist_cost(sources[static_cast<std::size_t>(k)], bary_points);
    for (double& v : c.values()) v *= lambda[static_cast<std::size_t>(k)];
    f.push_back({IndexTuple{k, 3}, std::move(c)});
  }
  return CostModel({static_cast<std::size_t>(sources[0].rows()), static_cast<std::size_t>(sources[1].rows()),
                    static_cast<std::size_t>(sources[2].rows()), n},
                   std::move(f));
}

BarycenterResult barycenter_star(MarginalOracle& oracle, double eps_stop, std::size_t max_iters) {
  const auto dims = oracle.mode_sizes();
  if (dims.size() != 4) throw DimensionError("barycenter_star: expected four modes");
  std::vector<Vector> targets = {uniform(dims[0]), uniform(dims[1]), uniform(dims[2]), {}};
  SinkhornConfig cfg;
  cfg.eps_stop = eps_stop;
  cfg.max_iters = max_iters;
  cfg.update_set = {0, 1, 2};
  BarycenterResult out{{}, solve(oracle, targets, cfg)};
  out.r_b = out.solve.marginals[3];
  for (double v : out.r_b)
    if (!(v > 0.0)) throw PositivityError("barycenter_star: nonpositive barycenter mass");
  return out;
}

namespace {

struct ColorRun {
  Vector r_b;
  Matrix xstar;
  std::uint64_t flops = 0;
  std::uint64_t sweep = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

ColorRun color_pipeline(const std::array<Matrix, 3>& src, const Matrix& target, const Matrix& xb,
                        const ColorConfig& cfg, std::size_t rank) {
  const auto n = static_cast<std::size_t>(xb.rows());
  const auto cost = star_cost(src, xb, cfg.lambda);
  std::vector<KernelFactor> sf;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& f = cost.factors()[k];
    sf.push_back(kernel_factor(f.alpha, gibbs_matrix(f.values.to_matrix(), cfg.eta), rank,
                               SvdMethod::Randomized, cfg.seed + k));
  }
  NetworkOracle star(build_network(KernelModel({n, n, n, n}, std::move(sf), cfg.eta)));
  auto bary = barycenter_star(star, cfg.eps_stop, cfg.max_iters);

  const Matrix k2 = gibbs_matrix(sqdist_cost(xb, target).to_matrix(), cfg.eta);
  auto f2 = kernel_factor(IndexTuple{0, 1}, k2, rank, SvdMethod::Randomized, cfg.seed + 3);
  NetworkOracle two(build_network(KernelModel({n, n}, {f2}, cfg.eta)));
  Vector rb = bary.r_b;
  const double mass = sum(rb);
  for (double& v : rb) v /= mass;
  SinkhornConfig scfg;
  scfg.eta = cfg.eta;
  scfg.eps_stop = cfg.eps_stop;
  scfg.max_iters = cfg.max_iters;
  auto res = solve(two, {rb, uniform(n)}, scfg);

  // x*_j = sum_i P_ij x^B_i / sum_i P_ij; the column scaling cancels.
  const auto& g1 = res.scalings.gamma(0);
  Matrix y(static_cast<Eigen::Index>(n), 4);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    y.row(ii).head(3) = g1[i] * xb.row(ii);
    y(ii, 3) = g1[i];
  }
  Matrix z;
  std::uint64_t map_flops = 0;
  if (f2.is_low_rank()) {
    const auto& lr = std::get<LowRankPair>(f2.form);
    const auto r = lr.rank();
    z = lr.v * (lr.u.transpose() * y);
    map_flops = 4 * (r * (2 * n - 1) + n * (2 * r - 1));
  } else {
    z = k2.transpose() * y;
    map_flops = 4 * n * (2 * n - 1);
  }
  ColorRun out;
  out.xstar.resize(static_cast<Eigen::Index>(n), 3);
  for (Eigen::Index j = 0; j < z.rows(); ++j)
    for (int c = 0; c < 3; ++c) out.xstar(j, c) = std::clamp(z(j, c) / z(j, 3), 0.0, 1.0);
  out.r_b = bary.r_b;
  out.flops = star.flops() + two.flops() + map_flops;
  out.sweep = eval_all_marginals(star.network(), Scalings({n, n, n, n})).flops +
              eval_all_marginals(two.network(), Scalings({n, n})).flops;
  out.iterations = bary.solve.iterations + res.iterations;
  out.converged = bary.solve.converged && res.converged;
  return out;
}

}  // namespace

ColorResult run_color_transfer(const std::array<ImageGrid, 4>& images, const ColorConfig& cfg) {
  const std::size_t n = images[0].size();
  for (const auto& im : images)
    if (im.size() != n) throw DimensionError("run_color_transfer: images differ in pixel count");
  std::array<Matrix, 3> src = {images[0].points(), images[1].points(), images[2].points()};
  const Matrix target = images[3].points();
  Matrix xb = Matrix::Zero(static_cast<Eigen::Index>(n), 3);
  for (std::size_t k = 0; k < 3; ++k) xb += cfg.lambda[k] * src[k];

  const auto t0 = Clock::now();
  auto run = color_pipeline(src, target, xb, cfg, cfg.rank);
  ColorResult out;
  out.metrics.seconds = seconds_since(t0);
  out.metrics.rank = cfg.rank;
  out.metrics.flops = run.flops;
  out.metrics.iterations = run.iterations;
  out.metrics.converged = run.converged;
  out.r_b = run.r_b;
  out.sweep_flops = run.sweep;

  if (cfg.compare_full || cfg.rank == 0 || cfg.rank >= n) {
    auto full = (cfg.rank == 0 || cfg.rank >= n) ? run : color_pipeline(src, target, xb, cfg, 0);
    out.full_sweep_flops = full.sweep;
    out.metrics.inf_error = (run.xstar - full.xstar).cwiseAbs().maxCoeff();
    out.metrics.converged = out.metrics.converged && full.converged;
  } else {
    // structure only: a sweep of the full-matrix networks on unit scalings
    std::vector<KernelFactor> ones;
    for (int k = 0; k < 3; ++k) ones.push_back({IndexTuple{k, 3}, DenseTensor({n, n}, 1.0)});
    out.full_sweep_flops =
        eval_all_marginals(build_network(KernelModel({n, n, n, n}, ones, cfg.eta)), Scalings({n, n, n, n})).flops +
        eval_all_marginals(build_network(KernelModel({n, n}, {{IndexTuple{0, 1}, DenseTensor({n, n}, 1.0)}}, cfg.eta)),
                           Scalings({n, n}))
            .flops;
  }

  std::vector<Rgb> px(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t c = 0; c < 3; ++c) px[j][c] = run.xstar(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
  out.image = ImageGrid(images[3].width(), images[3].height(), std::move(px));
  return out;
}

ImageGrid synthetic_image(std::size_t width, std::size_t height, std::uint64_t seed, double spread) {
  Rng rng(seed);
  Rgb base, dir, side;
  double norm = 0.0, snorm = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    base[c] = 0.35 + 0.3 * rng.uniform();
    dir[c] = rng.normal();
    side[c] = rng.normal();
    norm += dir[c] * dir[c];
  }
  norm = std::sqrt(norm);
  for (double& d : dir) d /= norm;
  double proj = 0.0;
  for (std::size_t c = 0; c < 3; ++c) proj += side[c] * dir[c];
  for (std::size_t c = 0; c < 3; ++c) {
    side[c] -= proj * dir[c];
    snorm += side[c] * side[c];
  }
  snorm = std::sqrt(snorm);
  for (double& d : side) d /= snorm;
  const double fx = 1.0 + rng.below(3), fy = 1.0 + rng.below(3);
  const double p1 = 2 * std::numbers::pi * rng.uniform(), p2 = 2 * std::numbers::pi * rng.uniform();
  std::vector<Rgb> px(width * height);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const double u = static_cast<double>(x) / static_cast<double>(width);
      const double v = static_cast<double>(y) / static_cast<double>(height);
      const double t = 0.5 * std::sin(2 * std::numbers::pi * fx * u + p1) + 0.5 * std::cos(2 * std::numbers::pi * fy * v + p2);
      const double w = 0.15 * (rng.uniform() - 0.5);
      auto& p = px[y * width + x];
      for (std::size_t c = 0; c < 3; ++c)
        p[c] = std::clamp(base[c] + 0.5 * spread * t * dir[c] + spread * w * side[c], 0.0, 1.0);
    }
  return ImageGrid(width, height, std::move(px));
}

BridgeGraph parse_bridge_graph(const std::string& name) {
  if (name == "chain") return BridgeGraph::Chain;
  if (name == "window") return BridgeGraph::Window;
  throw std::invalid_argument("unknown graph '" + name + "' (expected chain or window)");
}

std::vector<IndexTuple> bridge_edges(BridgeGraph g) {
  if (g == BridgeGraph::Chain) return {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  return {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 4}};
}

Matrix unit_grid(std::size_t side) {
  if (side < 2) throw std::invalid_argument("unit_grid: side must be at least 2");
  Matrix x(static_cast<Eigen::Index>(side * side), 2);
  const double h = 1.0 / static_cast<double>(side - 1);
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j) {
      const auto row = static_cast<Eigen::Index>(i * side + j);
      x(row, 0) = static_cast<double>(i) * h;
      x(row, 1) = static_cast<double>(j) * h;
    }
  return x;
}

Vector grid_blob(std::size_t side, double cx, double cy, double width) {
  const auto x = unit_grid(side);
  Vector v(side * side);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double d2 = (x(ii, 0) - cx) * (x(ii, 0) - cx) + (x(ii, 1) - cy) * (x(ii, 1) - cy);
    v[i] = std::exp(-d2 / (2 * width * width)) + 1e-6;
  }
  const double s = sum(v);
  for (double& e : v) e /= s;
  return v;
}

BridgeResult run_bridge(const Vector& r_first, const Vector& r_last, const BridgeConfig& cfg) {
  const std::size_t n = cfg.side * cfg.side;
  if (r_first.size() != n || r_last.size() != n) throw DimensionError("run_bridge: marginal size must be side^2");
  const Matrix k = gibbs_matrix(sqdist_cost(unit_grid(cfg.side), unit_grid(cfg.side)).to_matrix(), cfg.eta);
  const auto proto = kernel_factor(IndexTuple{0, 1}, k, cfg.rank, SvdMethod::Exact, 0);
  std::vector<KernelFactor> factors;
  for (const auto& e : bridge_edges(cfg.graph)) factors.push_back({e, proto.form});
  const std::vector<std::size_t> dims(5, n);
  NetworkOracle oracle(build_network(KernelModel(dims, std::move(factors), cfg.eta)));

  SinkhornConfig scfg;
  scfg.eta = cfg.eta;
  scfg.eps_stop = cfg.eps_stop;
  scfg.max_iters = cfg.max_iters;
  scfg.update_set = {0, 4};
  const auto t0 = Clock::now();
  auto res = solve(oracle, {r_first, {}, {}, {}, r_last}, scfg);
  BridgeResult out;
  out.metrics.seconds = seconds_since(t0);
  out.metrics.rank = cfg.rank;
  out.metrics.flops = oracle.flops();
  out.metrics.iterations = res.iterations;
  out.metrics.converged = res.converged;
  out.marginals = res.marginals;
  out.gammas = res.scalings.gammas();
  out.per_marginal_flops = eval_all_marginals(oracle.network(), Scalings(dims)).flops / 5;
  return out;
}

}  // namespace mmot
