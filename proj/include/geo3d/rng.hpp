#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace geo3d {

// mt19937_64 with hand-rolled distributions. The standard distribution
// objects are implementation-defined, which would break bit-exact
// reproducibility across standard libraries; these mappings are pinned.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // 53-bit mantissa uniform in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n) via rejection.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// k distinct indices drawn uniformly from [0, population), in draw order.
std::vector<std::size_t> sample_without_replacement(Rng& rng,
                                                    std::size_t population,
                                                    std::size_t k);

}  // namespace geo3d
