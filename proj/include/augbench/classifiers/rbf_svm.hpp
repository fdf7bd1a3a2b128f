#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "augbench/classifiers/prediction.hpp"
#include "augbench/log.hpp"
#include "augbench/matrix.hpp"

namespace augbench {

struct RbfSvmConfig {
  double c = 1.0;
  double gamma = 0.0;  // <= 0 means 1 / n_features
  double tolerance = 1e-3;
  long max_iterations = 0;  // <= 0 means max(1e6, 100 n)
};

/// Kernel SVM f(x) = sum_i coef_i K(sv_i, x) + b with K = exp(-gamma ||a-b||^2)
/// and coef_i = alpha_i y_i (y in -1/+1). Score is f(x), threshold 0.
struct RbfSvmModel {
  FeatureMatrix support_vectors;
  std::vector<double> alpha;
  std::vector<int> sv_signs;  // -1 or +1
  double bias = 0.0;
  double gamma = 1.0;
  double c = 1.0;
  long iterations = 0;
  bool converged = false;

  static constexpr double threshold = 0.0;

  double decision(std::span<const double> x) const {
    double s = bias;
    for (std::size_t i = 0; i < alpha.size(); ++i)
      s += alpha[i] * sv_signs[i] * std::exp(-gamma * squared_distance(support_vectors.row(i), x));
    return s;
  }

  double dual_equality_residual() const {
    double s = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) s += alpha[i] * sv_signs[i];
    return s;
  }
};

/// Sequential minimal optimization on the SVM dual.
///
/// Each iteration takes the maximal violating pair: i in I_up with the
/// smallest error E_i = f(x_i) - y_i and j in I_low with the largest, i.e. the
/// admissible pair maximizing |E_i - E_j|. The pair is updated analytically
/// and clipped to the box [0, C]. Stops once E_j - E_i <= tolerance. The bias
/// is the mean of y_t - sum_s alpha_s y_s K_ts over free vectors, or the
/// midpoint of the feasible interval when none are free.
inline RbfSvmModel fit_rbf_svm(const FeatureMatrix& x, const LabelVector& labels,
                               const RbfSvmConfig& config) {
  check_training_set(x, labels, "fit_rbf_svm", true);
  if (!(config.c > 0.0)) throw std::invalid_argument("fit_rbf_svm: C must be positive");
  const std::size_t n = x.rows();
  const double gamma = config.gamma > 0.0 ? config.gamma : 1.0 / static_cast<double>(x.cols());
  const double c = config.c;
  const long max_iter =
      config.max_iterations > 0 ? config.max_iterations : std::max(1'000'000L, 100L * static_cast<long>(n));

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == 1 ? 1.0 : -1.0;
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) k(i, j) = k(j, i) = std::exp(-gamma * squared_distance(x.row(i), x.row(j)));
  }

  std::vector<double> alpha(n, 0.0);
  std::vector<double> f(n, 0.0);  // sum_s alpha_s y_s K_ts, without bias
  auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0); };
  auto in_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c); };

  long iter = 0;
  bool converged = false;
  for (; iter < max_iter; ++iter) {
    std::size_t i = n, j = n;
    double e_min = std::numeric_limits<double>::infinity();
    double e_max = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double e = f[t] - y[t];
      if (in_up(t) && e < e_min) e_min = e, i = t;
      if (in_low(t) && e > e_max) e_max = e, j = t;
    }
    if (i == n || j == n || e_max - e_min <= config.tolerance) {
      converged = true;
      break;
    }
    const double eta = std::max(k(i, i) + k(j, j) - 2.0 * k(i, j), 1e-12);
    const double s = y[i] * y[j];
    double lo, hi;
    if (s < 0) {
      lo = std::max(0.0, alpha[j] - alpha[i]);
      hi = std::min(c, c + alpha[j] - alpha[i]);
    } else {
      lo = std::max(0.0, alpha[i] + alpha[j] - c);
      hi = std::min(c, alpha[i] + alpha[j]);
    }
    const double ei = f[i] - y[i];
    const double ej = f[j] - y[j];
    // Values within snap of a bound are set onto it; rounding residue like
    // 1e-17 would otherwise leave a pair that can no longer move.
    const double snap = 1e-12 * c;
    auto to_bound = [&](double a) { return a < snap ? 0.0 : (a > c - snap ? c : a); };
    const double aj = to_bound(std::clamp(alpha[j] + y[j] * (ei - ej) / eta, lo, hi));
    const double ai = to_bound(std::clamp(alpha[i] + s * (alpha[j] - aj), 0.0, c));
    const double di = (ai - alpha[i]) * y[i];
    const double dj = (aj - alpha[j]) * y[j];
    if (di == 0.0 && dj == 0.0) {
      converged = false;
      warn("rbf svm: SMO stalled on pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      break;
    }
    alpha[i] = ai;
    alpha[j] = aj;
    for (std::size_t t = 0; t < n; ++t) f[t] += di * k(t, i) + dj * k(t, j);
  }
  if (!converged && iter >= max_iter) {
    warn("rbf svm: no convergence after " + std::to_string(max_iter) +
         " iterations, returning last iterate");
  }

  double b_sum = 0.0;
  std::size_t free_count = 0;
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    const double target = y[t] - f[t];
    if (alpha[t] > 0.0 && alpha[t] < c) {
      b_sum += target;
      ++free_count;
    } else {
      // alpha = 0 needs y (f + b) >= 1, alpha = C needs y (f + b) <= 1
      const bool lower = (alpha[t] == 0.0) == (y[t] > 0);
      if (lower) lb = std::max(lb, target); else ub = std::min(ub, target);
    }
  }
  RbfSvmModel model;
  if (free_count > 0) {
    model.bias = b_sum / static_cast<double>(free_count);
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    model.bias = (ub + lb) / 2.0;
  } else {
    model.bias = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
  }
  model.gamma = gamma;
  model.c = c;
  model.iterations = iter;
  model.converged = converged;
  model.support_vectors = FeatureMatrix(0, x.cols());
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0.0) continue;
    model.support_vectors.append_row(x.row(t));
    model.alpha.push_back(alpha[t]);
    model.sv_signs.push_back(y[t] > 0 ? 1 : -1);
  }
  return model;
}

inline std::vector<ScoredPrediction> predict(const RbfSvmModel& model, const FeatureMatrix& x) {
  check_width(x, model.support_vectors.cols(), "rbf svm predict");
  std::vector<ScoredPrediction> out;
  out.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r)
    out.push_back(scored(model.decision(x.row(r)), RbfSvmModel::threshold));
  return out;
}

}  // namespace augbench
