#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mmot/apps.hpp"
#include "mmot/error.hpp"
#include "mmot/image_io.hpp"

using namespace mmot;

namespace {

std::string sci(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9e", x);
  return buf;
}

// "a:b" inclusive, or a comma list.
std::vector<std::size_t> parse_ranks(const std::string& spec) {
  std::vector<std::size_t> out;
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const auto a = std::stoul(spec.substr(0, colon));
    const auto b = std::stoul(spec.substr(colon + 1));
    if (a == 0 || b < a) throw CLI::ValidationError("--ranks", "expected a:b with 1 <= a <= b");
    for (auto r = a; r <= b; ++r) out.push_back(r);
    return out;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto r = std::stoul(tok);
    if (r == 0) throw CLI::ValidationError("--ranks", "ranks must be positive");
    out.push_back(r);
  }
  if (out.empty()) throw CLI::ValidationError("--ranks", "empty rank list");
  return out;
}

std::array<double, 3> parse_lambda(const std::vector<double>& v) {
  if (v.size() != 3) throw CLI::ValidationError("--lambda", "expected three weights a,b,c");
  double s = 0.0;
  for (double x : v) {
    if (x < 0.0) throw CLI::ValidationError("--lambda", "weights must be nonnegative");
    s += x;
  }
  if (std::abs(s - 1.0) > 1e-9) throw CLI::ValidationError("--lambda", "weights must sum to 1");
  return {v[0], v[1], v[2]};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

std::string with_suffix(const std::string& path, const std::string& suffix, const std::string& ext) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix + ext)).string();
}

Vector read_mass(const std::string& path, std::size_t side) {
  Vector v;
  if (std::filesystem::path(path).extension() == ".png") {
    std::size_t w = 0, h = 0;
    v = png_intensity(path, &w, &h);
    if (w != side || h != side) throw DimensionError(path + ": expected a " + std::to_string(side) + "x" + std::to_string(side) + " image");
  } else {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::string tok;
    while (f >> tok) {
      std::stringstream ss(tok);
      std::string cell;
      while (std::getline(ss, cell, ','))
        if (!cell.empty()) v.push_back(std::stod(cell));
    }
    if (v.size() != side * side) throw DimensionError(path + ": expected side^2 values");
  }
  double mx = 0.0;
  for (double x : v) {
    if (x < 0.0) throw std::invalid_argument(path + ": negative mass");
    mx = std::max(mx, x);
  }
  if (mx <= 0.0) throw std::invalid_argument(path + ": zero mass");
  // empty cells get a tiny floor so the targets stay strictly positive
  double s = 0.0;
  for (double& x : v) s += (x += 1e-9 * mx);
  for (double& x : v) x /= s;
  return v;
}

struct PocArgs {
  std::size_t n = 420;
  std::string ranks = "3:50";
  double eta = 1.0, eps_stop = 1e-4;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100'000;
  std::string out = "poc.csv";
  bool no_timing = false;
};

int cmd_poc(const PocArgs& a) {
  PocConfig cfg;
  cfg.n = a.n;
  cfg.ranks = parse_ranks(a.ranks);
  cfg.eta = a.eta;
  cfg.eps_stop = a.eps_stop;
  cfg.seed = a.seed;
  cfg.max_iters = a.max_iters;
  const auto rep = run_poc(cfg);
  auto f = open_out(a.out);
  f << "rank,cost_diff_svds,cost_diff_tt,log_err_svds,log_err_tt,flops,seconds\n";
  for (const auto& r : rep.ranks) {
    f << r.rank << ',' << sci(r.cost_diff_svds) << ',' << sci(r.cost_diff_tt) << ',' << sci(r.log_err_svds) << ','
      << sci(r.log_err_tt) << ',' << r.flops << ',' << sci(a.no_timing ? 0.0 : r.seconds) << '\n';
    if (!r.note.empty()) std::cerr << "rank " << r.rank << ": " << r.note << '\n';
  }
  if (!f.flush()) throw std::runtime_error("cannot write " + a.out);
  std::cout << "poc n=" << a.n << " reference_cost=" << sci(rep.reference_cost)
            << " iterations=" << rep.reference_iterations << " flops=" << rep.reference_flops
            << " converged=" << rep.converged << '\n';
  return rep.converged ? 0 : 3;
}

struct ColorArgs {
  std::vector<std::string> sources;
  std::string target;
  std::size_t synthetic = 0;
  std::vector<double> lambda{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::string ranks = "50";
  double eta = 0.1, eps_stop = 1e-4;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100'000;
  bool compare_full = false;
  std::string out = "color.png";
  std::string csv;
  bool no_timing = false;
};

int cmd_color(const ColorArgs& a) {
  std::array<ImageGrid, 4> im;
  if (a.synthetic > 0) {
    for (std::size_t k = 0; k < 4; ++k) im[k] = synthetic_image(a.synthetic, a.synthetic, a.seed + k + 1);
  } else {
    if (a.sources.size() != 3 || a.target.empty())
      throw CLI::ValidationError("color", "need three --sources and a --target, or --synthetic");
    for (std::size_t k = 0; k < 3; ++k) im[k] = read_png(a.sources[k]);
    im[3] = read_png(a.target);
  }
  ColorConfig cfg;
  cfg.lambda = parse_lambda(a.lambda);
  cfg.eta = a.eta;
  cfg.eps_stop = a.eps_stop;
  cfg.seed = a.seed;
  cfg.max_iters = a.max_iters;
  cfg.compare_full = a.compare_full;
  const auto ranks = parse_ranks(a.ranks);
  const std::string csv = a.csv.empty() ? with_suffix(a.out, "", ".csv") : a.csv;
  auto f = open_out(csv);
  f << "rank,inf_error_vs_full,seconds,flops\n";
  bool ok = true;
  for (std::size_t r : ranks) {
    cfg.rank = r;
    const auto res = run_color_transfer(im, cfg);
    ok = ok && res.metrics.converged;
    const std::string path = ranks.size() == 1 ? a.out : with_suffix(a.out, "_r" + std::to_string(r), ".png");
    write_png(path, res.image);
    f << r << ',' << sci(res.metrics.inf_error) << ',' << sci(a.no_timing ? 0.0 : res.metrics.seconds) << ','
      << res.metrics.flops << '\n';
    std::cout << "color rank=" << r << " image=" << path << " flops=" << res.metrics.flops
              << " sweep_flops=" << res.sweep_flops << " full_sweep_flops=" << res.full_sweep_flops
              << " converged=" << res.metrics.converged << '\n';
  }
  if (!f.flush()) throw std::runtime_error("cannot write " + csv);
  return ok ? 0 : 3;
}

struct BridgeArgs {
  std::string first, last;
  std::string graph = "chain";
  std::size_t rank = 10;
  double eta = 1.0, eps_stop = 1e-4;
  std::size_t side = 8;
  std::size_t max_iters = 100'000;
  std::string out = "bridge";
  bool no_timing = false;
};

int cmd_bridge(const BridgeArgs& a) {
  BridgeConfig cfg;
  cfg.graph = parse_bridge_graph(a.graph);
  cfg.side = a.side;
  cfg.rank = a.rank;
  cfg.eta = a.eta;
  cfg.eps_stop = a.eps_stop;
  cfg.max_iters = a.max_iters;
  const Vector r1 = a.first.empty() ? grid_blob(a.side, 0.25, 0.25, 0.12) : read_mass(a.first, a.side);
  const Vector r5 = a.last.empty() ? grid_blob(a.side, 0.75, 0.7, 0.18) : read_mass(a.last, a.side);
  const auto res = run_bridge(r1, r5, cfg);
  for (std::size_t k = 1; k + 1 < res.marginals.size(); ++k) {
    const std::string stem = a.out + "_r" + std::to_string(k + 1);
    write_gray_png(stem + ".png", res.marginals[k], a.side, a.side);
    auto f = open_out(stem + ".csv");
    for (std::size_t i = 0; i < a.side; ++i)
      for (std::size_t j = 0; j < a.side; ++j) f << sci(res.marginals[k][i * a.side + j]) << (j + 1 < a.side ? ',' : '\n');
    if (!f.flush()) throw std::runtime_error("cannot write " + stem + ".csv");
  }
  auto f = open_out(a.out + "_flops.csv");
  f << "graph,side,rank,per_marginal_flops,flops,iterations,seconds\n";
  f << a.graph << ',' << a.side << ',' << a.rank << ',' << res.per_marginal_flops << ',' << res.metrics.flops << ','
    << res.metrics.iterations << ',' << sci(a.no_timing ? 0.0 : res.metrics.seconds) << '\n';
  if (!f.flush()) throw std::runtime_error("cannot write " + a.out + "_flops.csv");
  std::cout << "bridge graph=" << a.graph << " side=" << a.side << " per_marginal_flops=" << res.per_marginal_flops
            << " converged=" << res.metrics.converged << '\n';
  return res.metrics.converged ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-marginal optimal transport experiments"};
  app.require_subcommand(1);

  PocArgs poc;
  auto* p = app.add_subcommand("poc", "chain proof of concept: rank sweep of low-rank kernels");
  p->add_option("--n", poc.n, "points per mode")->check(CLI::Range(std::size_t{2}, std::size_t{1'000'000}));
  p->add_option("--ranks", poc.ranks, "rank sweep a:b or a,b,c");
  p->add_option("--eta", poc.eta)->check(CLI::PositiveNumber);
  p->add_option("--eps-stop", poc.eps_stop)->check(CLI::PositiveNumber);
  p->add_option("--seed", poc.seed);
  p->add_option("--max-iters", poc.max_iters);
  p->add_option("--out", poc.out, "CSV path");
  p->add_flag("--no-timing", poc.no_timing, "write 0 in the seconds column");

  ColorArgs color;
  auto* c = app.add_subcommand("color", "color transfer through a barycenter");
  c->add_option("--sources", color.sources, "three source PNGs")->delimiter(',');
  c->add_option("--target", color.target, "target PNG");
  c->add_option("--synthetic", color.synthetic, "use generated side x side images instead");
  c->add_option("--lambda", color.lambda, "barycenter weights a,b,c")->delimiter(',');
  c->add_option("--ranks,--rank", color.ranks, "rank or sweep; 0 means full matrices");
  c->add_option("--eta", color.eta)->check(CLI::PositiveNumber);
  c->add_option("--eps-stop", color.eps_stop)->check(CLI::PositiveNumber);
  c->add_option("--seed", color.seed);
  c->add_option("--max-iters", color.max_iters);
  c->add_flag("--compare-full", color.compare_full, "also run with full matrices and report the error");
  c->add_option("--out", color.out, "output PNG");
  c->add_option("--csv", color.csv, "metrics CSV (default: next to --out)");
  c->add_flag("--no-timing", color.no_timing);

  BridgeArgs bridge;
  auto* b = app.add_subcommand("bridge", "bridge marginals on a grid");
  b->add_option("--first", bridge.first, "initial mass (PNG or CSV)");
  b->add_option("--last", bridge.last, "final mass (PNG or CSV)");
  b->add_option("--graph", bridge.graph, "chain or window");
  b->add_option("--rank", bridge.rank, "0 means full matrices");
  b->add_option("--eta", bridge.eta)->check(CLI::PositiveNumber);
  b->add_option("--eps-stop", bridge.eps_stop)->check(CLI::PositiveNumber);
  b->add_option("--grid-side", bridge.side)->check(CLI::Range(std::size_t{2}, std::size_t{400}));
  b->add_option("--max-iters", bridge.max_iters);
  b->add_option("--out", bridge.out, "output prefix");
  b->add_flag("--no-timing", bridge.no_timing);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (p->parsed()) return cmd_poc(poc);
    if (c->parsed()) return cmd_color(color);
    return cmd_bridge(bridge);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help();
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
