#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "augbench/matrix.hpp"

namespace augbench {

/// Label plus a real-valued score where larger means "more positive". The
/// label is 1 exactly when the score reaches the model's threshold.
struct ScoredPrediction {
  int label = 0;
  double score = 0.0;
  bool operator==(const ScoredPrediction&) const = default;
};

inline ScoredPrediction scored(double score, double threshold) {
  return {score >= threshold ? 1 : 0, score};
}

inline LabelVector labels_of(const std::vector<ScoredPrediction>& preds) {
  LabelVector out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back(p.label);
  return out;
}

inline std::vector<double> scores_of(const std::vector<ScoredPrediction>& preds) {
  std::vector<double> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back(p.score);
  return out;
}

inline void check_width(const FeatureMatrix& x, std::size_t expected, const char* who) {
  if (x.cols() != expected) {
    throw std::invalid_argument(std::string(who) + ": feature width " + std::to_string(x.cols()) +
                                " does not match training width " + std::to_string(expected));
  }
}

inline void check_training_set(const FeatureMatrix& x, const LabelVector& y, const char* who,
                               bool need_both_classes) {
  if (x.rows() == 0) throw std::invalid_argument(std::string(who) + ": empty training set");
  if (x.rows() != y.size()) {
    throw std::invalid_argument(std::string(who) + ": features and labels differ in length");
  }
  if (need_both_classes) {
    bool has0 = false, has1 = false;
    for (int v : y) (v == 1 ? has1 : has0) = true;
    if (!has0 || !has1) throw std::invalid_argument(std::string(who) + ": single-class training set");
  }
}

}  // namespace augbench
