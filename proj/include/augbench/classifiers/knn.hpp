#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "augbench/classifiers/prediction.hpp"
#include "augbench/matrix.hpp"

namespace augbench {

enum class KnnWeighting { uniform, inverse_distance };

inline std::string_view to_string(KnnWeighting w) {
  return w == KnnWeighting::uniform ? "uniform" : "inverse_distance";
}

inline constexpr double kKnnDistanceEpsilon = 1e-9;

/// Euclidean k-nearest-neighbour vote. Distance ties resolve toward the lower
/// training index. Score is the (weighted) fraction of positive neighbours.
struct KnnModel {
  FeatureMatrix features;
  LabelVector labels;
  std::size_t k = 1;
  KnnWeighting weighting = KnnWeighting::inverse_distance;

  static constexpr double threshold = 0.5;
};

inline KnnModel fit_knn(const FeatureMatrix& x, const LabelVector& y, std::size_t k,
                        KnnWeighting weighting) {
  check_training_set(x, y, "fit_knn", false);
  if (k == 0) throw std::invalid_argument("fit_knn: k must be positive");
  return KnnModel{x, y, std::min(k, x.rows()), weighting};
}

inline std::vector<ScoredPrediction> predict(const KnnModel& model, const FeatureMatrix& x) {
  check_width(x, model.features.cols(), "knn predict");
  const std::size_t n = model.features.rows();
  const std::size_t k = std::min(model.k, n);
  std::vector<ScoredPrediction> out;
  out.reserve(x.rows());
  std::vector<double> dist(n);
  std::vector<std::size_t> order(n);
  for (std::size_t q = 0; q < x.rows(); ++q) {
    for (std::size_t i = 0; i < n; ++i) dist[i] = squared_distance(x.row(q), model.features.row(i));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                      });
    double pos = 0.0, total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = order[j];
      const double w = model.weighting == KnnWeighting::uniform
                           ? 1.0
                           : 1.0 / (std::sqrt(dist[i]) + kKnnDistanceEpsilon);
      total += w;
      if (model.labels[i] == 1) pos += w;
    }
    out.push_back(scored(pos / total, KnnModel::threshold));
  }
  return out;
}

}  // namespace augbench
