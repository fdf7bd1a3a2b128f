#pragma once

#include <algorithm>
#include <cstdint>

#include "augbench/gmm.hpp"
#include "support/oracles.hpp"

namespace emcheck {

using namespace augbench;

struct EmOutcome {
  double worst_decrease = 0.0;        // max over steps of LL[t-1] - LL[t]
  double worst_row_sum_error = 0.0;   // recomputed from a fresh E-step
  double worst_weight_sum_error = 0.0;
  std::size_t n = 0, d = 0, k = 0;
};

// Random data (n <= 200, d <= 4) from a random mixture, fitted with K <= 3.
inline EmOutcome run(std::uint64_t seed) {
  RngStream rng(seed);
  EmOutcome o;
  o.d = 1 + rng.below(4);
  o.k = 1 + rng.below(3);
  o.n = 10 + rng.below(191);
  const std::size_t true_k = 1 + rng.below(4);
  std::vector<std::vector<double>> centers(true_k, std::vector<double>(o.d));
  for (auto& c : centers)
    for (auto& v : c) v = 3.0 * rng.normal();
  Matrix x(o.n, o.d);
  for (std::size_t i = 0; i < o.n; ++i) {
    const auto& c = centers[rng.below(true_k)];
    const double spread = 0.2 + rng.uniform();
    for (std::size_t j = 0; j < o.d; ++j) x(i, j) = c[j] + spread * rng.normal();
  }
  const auto model = fit_gmm(x, o.k, GmmConfig{}, rng.derive("fit"));
  const auto& h = model.log_likelihood_history;
  for (std::size_t t = 1; t < h.size(); ++t) o.worst_decrease = std::max(o.worst_decrease, h[t - 1] - h[t]);
  const auto e = detail::gmm_e_step(model, x);
  for (std::size_t i = 0; i < o.n; ++i) {
    double s = 0.0;
    for (double r : e.responsibilities.row(i)) s += r;
    o.worst_row_sum_error = std::max(o.worst_row_sum_error, std::abs(s - 1.0));
  }
  double w = 0.0;
  for (double v : model.weights) w += v;
  o.worst_weight_sum_error = std::abs(w - 1.0);
  o.worst_row_sum_error = std::max(o.worst_row_sum_error, model.diagnostics.max_responsibility_sum_error);
  return o;
}

}  // namespace emcheck
