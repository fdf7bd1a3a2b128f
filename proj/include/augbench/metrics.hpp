#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <iomanip>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace augbench {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

inline ConfusionCounts confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("confusion: length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] == 1;
    const bool p = y_pred[i] == 1;
    if (t && p) ++c.tp;
    else if (!t && p) ++c.fp;
    else if (!t && !p) ++c.tn;
    else ++c.fn;
  }
  return c;
}

inline double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) throw std::invalid_argument("accuracy: no rows");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

// Positive-class F1; 0 whenever precision + recall is 0.
inline double f1(const ConfusionCounts& c) {
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  if (c.tp == 0 || denom == 0) return 0.0;
  return 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

inline double accuracy(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (y_true.empty()) throw std::invalid_argument("accuracy: empty input");
  return accuracy(confusion(y_true, y_pred));
}

inline double f1(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("f1: length mismatch");
  return f1(confusion(y_true, y_pred));
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.5;
};

/// ROC curve swept over distinct score thresholds (descending). Tied scores
/// form a single step, so the trapezoid area gives ties half credit and equals
/// the Mann-Whitney statistic.
inline RocCurve roc_auc(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size()) throw std::invalid_argument("roc_auc: length mismatch");
  std::size_t pos = 0;
  for (int y : y_true) pos += (y == 1);
  const std::size_t neg = y_true.size() - pos;
  if (pos == 0 || neg == 0) throw std::invalid_argument("AUC undefined: only one class present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  double area = 0.0;  // in units of (pos * neg)
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    const std::size_t tp0 = tp, fp0 = fp;
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      if (y_true[order[i]] == 1) ++tp;
      else ++fp;
    }
    area += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0) / 2.0;
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos)});
  }
  curve.auc = area / (static_cast<double>(pos) * static_cast<double>(neg));
  return curve;
}

inline void write_roc_csv(std::ostream& os, const RocCurve& curve) {
  os << "fpr,tpr\n" << std::setprecision(17);
  for (const auto& p : curve.points) os << p.fpr << ',' << p.tpr << '\n';
}

}  // namespace augbench
