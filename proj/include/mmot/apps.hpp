#pragma once

// End-to-end pipelines: chain proof of concept, color transfer through a
// star-shaped barycenter problem, and bridge marginals on a grid.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mmot/factor_model.hpp"
#include "mmot/sinkhorn.hpp"
#include "mmot/tensor.hpp"

namespace mmot {

using Rgb = std::array<double, 3>;

// Row-major RGB image with channels in [0, 1].
class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(std::size_t width, std::size_t height, std::vector<Rgb> pixels);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  const std::vector<Rgb>& pixels() const { return pixels_; }
  const Rgb& pixel(std::size_t i) const { return pixels_.at(i); }

  // n x 3 matrix of colors.
  Matrix points() const;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<Rgb> pixels_;
};

inline constexpr double kNotRun = std::numeric_limits<double>::quiet_NaN();

struct RankResult {
  std::size_t rank = 0;
  double cost_diff_svds = kNotRun;
  double cost_diff_tt = kNotRun;
  double log_err_svds = kNotRun;
  double log_err_tt = kNotRun;
  double inf_error = kNotRun;  // color transfer: ||x^r - x^*||_inf
  std::uint64_t flops = 0;     // low-rank factor branch, solve + rounding
  std::uint64_t flops_tt = 0;
  double seconds = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::string note;  // reason a branch was skipped
};

struct ExperimentReport {
  double reference_cost = kNotRun;
  std::uint64_t reference_flops = 0;
  double reference_seconds = 0.0;
  std::size_t reference_iterations = 0;
  bool converged = true;  // every solve that ran converged
  std::vector<RankResult> ranks;
};

struct PocConfig {
  std::size_t n = 420;
  std::vector<std::size_t> ranks;
  double eta = 1.0;
  double eps_stop = 1e-4;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100'000;
  std::size_t tt_budget = kDefaultBudget;  // the TT branch needs n^4 entries
  std::size_t log_samples = 1000;
};

// Four uniform point sets in [0,1]^2 with squared-distance chain costs.
CostModel poc_cost(std::size_t n, std::uint64_t seed);

ExperimentReport run_poc(const PocConfig& cfg);

// Star cost over modes 0..2 -> 3: factor (k,3) is lambda_k ||x^(k)_i - x^(B)_j||^2.
CostModel star_cost(const std::array<Matrix, 3>& sources, const Matrix& bary_points,
                    const std::array<double, 3>& lambda);

// r_4 of the plan that matches uniform marginals on modes 0..2 with the
// mode-3 scaling pinned to ones. The kernel must be the star model above.
struct BarycenterResult {
  Vector r_b;
  SinkhornResult solve;
};
BarycenterResult barycenter_star(MarginalOracle& oracle, double eps_stop,
                                 std::size_t max_iters = 100'000);

struct ColorConfig {
  std::array<double, 3> lambda{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::size_t rank = 50;  // 0 means full matrices
  double eta = 0.1;
  double eps_stop = 1e-4;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100'000;
  bool compare_full = false;
};

struct ColorResult {
  ImageGrid image;
  Vector r_b;
  RankResult metrics;
  // One uncached all-marginals sweep of the star network plus the
  // two-marginal network, for the chosen rank and for full matrices.
  std::uint64_t sweep_flops = 0;
  std::uint64_t full_sweep_flops = 0;
};

ColorResult run_color_transfer(const std::array<ImageGrid, 4>& images, const ColorConfig& cfg);

// Smooth synthetic image whose colors stay near a short segment of the RGB
// cube (a narrow palette), so low-rank Gibbs kernels stay positive.
ImageGrid synthetic_image(std::size_t width, std::size_t height, std::uint64_t seed,
                          double spread = 0.6);

enum class BridgeGraph { Chain, Window };

BridgeGraph parse_bridge_graph(const std::string& name);

struct BridgeConfig {
  BridgeGraph graph = BridgeGraph::Chain;
  std::size_t side = 8;  // n = side^2
  std::size_t rank = 10;  // 0 means full matrices
  double eta = 1.0;
  double eps_stop = 1e-4;
  std::size_t max_iters = 100'000;
};

struct BridgeResult {
  std::vector<Vector> marginals;  // r_1(P) .. r_5(P)
  std::vector<Vector> gammas;
  std::uint64_t per_marginal_flops = 0;  // uncached all-marginals sweep / m
  RankResult metrics;
};

// Edges of the five-mode bridge graph, zero-based.
std::vector<IndexTuple> bridge_edges(BridgeGraph g);

// Side x side grid rescaled to the unit square, row-major.
Matrix unit_grid(std::size_t side);

BridgeResult run_bridge(const Vector& r_first, const Vector& r_last, const BridgeConfig& cfg);

// Gaussian bump on the grid, normalized to a probability vector.
Vector grid_blob(std::size_t side, double cx, double cy, double width);

}  // namespace mmot
