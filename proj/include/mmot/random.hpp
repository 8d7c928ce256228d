#pragma once

#include <cstdint>

namespace mmot {

// Counter-based generator: draw i is splitmix64(seed, i), so streams are
// reproducible across platforms and independent of call interleaving.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();
  // Uniform on [0, 1).
  double uniform();
  // Standard normal via Box-Muller.
  double normal();
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mmot
