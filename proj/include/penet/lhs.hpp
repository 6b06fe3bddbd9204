// Latin hypercube sampling: n points in a d-dimensional box with exactly one
// point per equal-width stratum per dimension; stratum order is an
// independent seeded permutation per dimension, placement within a stratum
// is uniform.
#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "penet/rng.hpp"

namespace penet {

struct Interval {
  double lo;
  double hi;
};

inline std::vector<std::vector<double>> lhs_sample(std::size_t n,
                                                   std::span<const Interval> bounds,
                                                   std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("lhs_sample: n must be >= 1");
  for (const auto& b : bounds)
    if (!(b.lo < b.hi))
      throw std::invalid_argument("lhs_sample: each bound needs lo < hi");

  Rng rng(seed);
  std::vector<std::vector<double>> points(n, std::vector<double>(bounds.size()));
  for (std::size_t d = 0; d < bounds.size(); ++d) {
    auto strata = rng.permutation(n);
    for (std::size_t i = 0; i < n; ++i) {
      double u = (static_cast<double>(strata[i]) + rng.uniform01()) /
                 static_cast<double>(n);
      points[i][d] = bounds[d].lo + (bounds[d].hi - bounds[d].lo) * u;
    }
  }
  return points;
}

}  // namespace penet
