#include "geo3d/rng.hpp"

#include <limits>

namespace geo3d {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = next();
  } while (r >= limit);
  return r % n;
}

std::vector<std::size_t> sample_without_replacement(Rng& rng,
                                                    std::size_t population,
                                                    std::size_t k) {
  if (k > population) k = population;
  std::vector<std::size_t> indices(population);
  for (std::size_t i = 0; i < population; ++i) indices[i] = i;
  // Partial Fisher-Yates: only the first k slots are ever needed.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.below(population - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(k);
  return indices;
}

}  // namespace geo3d
