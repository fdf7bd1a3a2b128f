#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace augbench {

/// Splits `total` into integer parts proportional to `weights` by the
/// largest-remainder method. Parts sum to `total` exactly; remainder ties go
/// to the lower index.
inline std::vector<std::size_t> largest_remainder(std::span<const double> weights,
                                                  std::size_t total) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (weights.empty() || !(sum > 0.0)) {
    throw std::invalid_argument("largest_remainder: weights must have a positive sum");
  }
  std::vector<std::size_t> parts(weights.size());
  std::vector<double> remainders(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("largest_remainder: negative weight");
    const double quota = static_cast<double>(total) * weights[i] / sum;
    parts[i] = static_cast<std::size_t>(std::floor(quota));
    remainders[i] = quota - static_cast<double>(parts[i]);
    assigned += parts[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) parts[order[k % order.size()]] += 1;
  return parts;
}

}  // namespace augbench
