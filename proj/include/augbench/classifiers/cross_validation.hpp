#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "augbench/dataio.hpp"
#include "augbench/matrix.hpp"
#include "augbench/metrics.hpp"
#include "augbench/rng.hpp"

namespace augbench {

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Stratified k-fold partition: rows of each class are shuffled and dealt
/// round-robin, continuing the fold counter from one class to the next.
inline std::vector<Fold> stratified_folds(const LabelVector& y, std::size_t k, const RngStream& rng) {
  if (k < 2) throw std::invalid_argument("stratified_folds: need at least 2 folds");
  if (y.size() < k) {
    throw std::invalid_argument("stratified_folds: " + std::to_string(y.size()) +
                                " rows cannot fill " + std::to_string(k) + " folds");
  }
  std::vector<std::size_t> fold_of(y.size());
  std::size_t next = 0;
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == c) members.push_back(i);
    auto stream = rng.derive("class-" + std::to_string(c));
    stream.shuffle(members);
    for (auto i : members) fold_of[i] = next++ % k;
  }
  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f) (f == fold_of[i] ? folds[f].validation : folds[f].train).push_back(i);
  }
  return folds;
}

template <typename Hp>
struct CvResult {
  std::size_t best_index = 0;
  Hp best{};
  std::vector<std::vector<double>> fold_scores;  // [grid point][fold]
  std::vector<double> mean_scores;
};

inline constexpr double kCvTieTolerance = 1e-12;

/// Grid search by stratified k-fold accuracy. `grid` is ordered from the
/// simplest setting to the most complex; ties go to the earlier entry.
/// `evaluate(hp, x_train, y_train, x_val, rng)` returns predicted labels.
template <typename Hp, typename Evaluate>
CvResult<Hp> cross_validate(Evaluate&& evaluate, const FeatureMatrix& x, const LabelVector& y,
                            std::size_t folds, std::span<const Hp> grid, const RngStream& rng) {
  if (grid.empty()) throw std::invalid_argument("cross_validate: empty grid");
  if (x.rows() != y.size()) throw std::invalid_argument("cross_validate: length mismatch");

  std::vector<Fold> partition;
  constexpr int kAttempts = 5;
  for (int attempt = 0; attempt < kAttempts && partition.empty(); ++attempt) {
    auto candidate = stratified_folds(y, folds, rng.derive("folds-" + std::to_string(attempt)));
    bool ok = true;
    for (const auto& f : candidate) {
      const auto counts = class_counts(select_labels(y, f.train));
      ok = ok && counts[0] > 0 && counts[1] > 0;
    }
    if (ok) partition = std::move(candidate);
  }
  if (partition.empty()) {
    throw std::runtime_error("cross_validate: could not build folds whose training parts hold both classes");
  }

  CvResult<Hp> result;
  result.fold_scores.assign(grid.size(), std::vector<double>(folds, 0.0));
  result.mean_scores.assign(grid.size(), 0.0);
  for (std::size_t f = 0; f < folds; ++f) {
    const auto& fold = partition[f];
    const FeatureMatrix xt = x.select_rows(fold.train);
    const FeatureMatrix xv = x.select_rows(fold.validation);
    const LabelVector yt = select_labels(y, fold.train);
    const LabelVector yv = select_labels(y, fold.validation);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const LabelVector pred = evaluate(grid[g], xt, yt, xv, rng.derive("fold-" + std::to_string(f)));
      result.fold_scores[g][f] = accuracy(yv, pred);
    }
  }
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double s = 0.0;
    for (double v : result.fold_scores[g]) s += v;
    result.mean_scores[g] = s / static_cast<double>(folds);
    if (result.mean_scores[g] > result.mean_scores[result.best_index] + kCvTieTolerance) result.best_index = g;
  }
  result.best = grid[result.best_index];
  return result;
}

}  // namespace augbench
