#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <numeric>
#include <vector>

#include "augbench/classifiers/prediction.hpp"
#include "augbench/matrix.hpp"

namespace augbench {

inline double gini(std::array<std::size_t, 2> counts) {
  const double n = static_cast<double>(counts[0] + counts[1]);
  if (n == 0.0) return 0.0;
  const double p0 = static_cast<double>(counts[0]) / n;
  const double p1 = static_cast<double>(counts[1]) / n;
  return 1.0 - (p0 * p0 + p1 * p1);
}

struct TreeConfig {
  int max_depth = -1;  // negative = unbounded
  std::size_t min_samples_split = 2;
};

struct TreeNode {
  bool leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  std::array<std::size_t, 2> counts{0, 0};

  double positive_fraction() const {
    return static_cast<double>(counts[1]) / static_cast<double>(counts[0] + counts[1]);
  }
};

/// CART classification tree with Gini splits. nodes[0] is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;
  std::size_t n_features = 0;
  int max_depth = -1;

  static constexpr double threshold = 0.5;

  int depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    int best = 0;
    while (!stack.empty()) {
      auto [i, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      if (!nodes[i].leaf) {
        stack.emplace_back(nodes[i].left, d + 1);
        stack.emplace_back(nodes[i].right, d + 1);
      }
    }
    return best;
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf; }));
  }
};

namespace detail {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;
};

// Best (feature, midpoint threshold) by weighted child Gini. Ties keep the
// first candidate in (feature, threshold ascending) order.
inline SplitChoice best_split(const FeatureMatrix& x, const LabelVector& y,
                              std::vector<std::size_t>& rows) {
  SplitChoice best;
  const double n = static_cast<double>(rows.size());
  std::array<std::size_t, 2> total{0, 0};
  for (auto r : rows) ++total[static_cast<std::size_t>(y[r])];
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::stable_sort(rows.begin(), rows.end(),
                     [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    std::array<std::size_t, 2> left{0, 0};
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      ++left[static_cast<std::size_t>(y[rows[i]])];
      const double v = x(rows[i], f);
      const double next = x(rows[i + 1], f);
      if (!(v < next)) continue;
      const std::array<std::size_t, 2> right{total[0] - left[0], total[1] - left[1]};
      const double nl = static_cast<double>(i + 1);
      const double impurity = (nl * gini(left) + (n - nl) * gini(right)) / n;
      if (!best.found || impurity < best.impurity) {
        double mid = v + (next - v) / 2.0;
        if (!(mid < next)) mid = v;
        best = {true, f, mid, impurity};
      }
    }
  }
  return best;
}

inline int grow(DecisionTree& tree, const FeatureMatrix& x, const LabelVector& y,
                std::vector<std::size_t> rows, int depth, const TreeConfig& cfg) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  for (auto r : rows) ++tree.nodes[id].counts[static_cast<std::size_t>(y[r])];
  const auto counts = tree.nodes[id].counts;
  const bool pure = counts[0] == 0 || counts[1] == 0;
  const bool depth_reached = cfg.max_depth >= 0 && depth >= cfg.max_depth;
  if (pure || depth_reached || rows.size() < cfg.min_samples_split) return id;

  const auto split = best_split(x, y, rows);
  if (!split.found) return id;
  std::vector<std::size_t> left_rows, right_rows;
  for (auto r : rows) (x(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
  std::sort(left_rows.begin(), left_rows.end());
  std::sort(right_rows.begin(), right_rows.end());
  const int l = grow(tree, x, y, std::move(left_rows), depth + 1, cfg);
  const int r = grow(tree, x, y, std::move(right_rows), depth + 1, cfg);
  auto& node = tree.nodes[id];
  node.leaf = false;
  node.feature = split.feature;
  node.threshold = split.threshold;
  node.left = l;
  node.right = r;
  return id;
}

}  // namespace detail

inline DecisionTree fit_decision_tree(const FeatureMatrix& x, const LabelVector& y,
                                      const TreeConfig& config) {
  check_training_set(x, y, "fit_decision_tree", false);
  DecisionTree tree;
  tree.n_features = x.cols();
  tree.max_depth = config.max_depth;
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  detail::grow(tree, x, y, std::move(rows), 0, config);
  return tree;
}

inline std::vector<ScoredPrediction> predict(const DecisionTree& tree, const FeatureMatrix& x) {
  check_width(x, tree.n_features, "decision tree predict");
  std::vector<ScoredPrediction> out;
  out.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    int i = 0;
    while (!tree.nodes[i].leaf) {
      const auto& n = tree.nodes[i];
      i = x(r, n.feature) <= n.threshold ? n.left : n.right;
    }
    out.push_back(scored(tree.nodes[i].positive_fraction(), DecisionTree::threshold));
  }
  return out;
}

}  // namespace augbench
