#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "augbench/classifiers/prediction.hpp"
#include "augbench/matrix.hpp"
#include "augbench/mlp.hpp"

namespace augbench {

enum class LinearKind { logistic, linear_svm };

/// w.x + b scorer shared by logistic regression (score = sigmoid, threshold
/// 0.5) and the linear SVM (score = margin, threshold 0).
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  LinearKind kind = LinearKind::logistic;
  double lambda = 0.0;
  std::vector<double> loss_history;

  double threshold() const { return kind == LinearKind::logistic ? 0.5 : 0.0; }
  double margin(std::span<const double> x) const { return dot(weights, x) + bias; }
};

inline std::vector<ScoredPrediction> predict(const LinearModel& model, const FeatureMatrix& x) {
  check_width(x, model.weights.size(), "linear predict");
  std::vector<ScoredPrediction> out;
  out.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double m = model.margin(x.row(r));
    out.push_back(scored(model.kind == LinearKind::logistic ? sigmoid(m) : m, model.threshold()));
  }
  return out;
}

struct LossGradient {
  double loss = 0.0;
  std::vector<double> weight_gradient;
  double bias_gradient = 0.0;
};

// log(1 + exp(m)) without overflow
inline double softplus(double m) { return m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m)); }

/// Mean cross-entropy plus lambda/2 ||w||^2 (bias unregularized).
inline LossGradient logistic_loss(std::span<const double> w, double b, const FeatureMatrix& x,
                                  const LabelVector& y, double lambda) {
  const double n = static_cast<double>(x.rows());
  LossGradient out;
  out.weight_gradient.assign(w.size(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    const double m = dot(w, row) + b;
    // -[y log s(m) + (1-y) log(1-s(m))] = softplus(m) - y m
    out.loss += (softplus(m) - y[r] * m) / n;
    const double g = (sigmoid(m) - y[r]) / n;
    for (std::size_t j = 0; j < w.size(); ++j) out.weight_gradient[j] += g * row[j];
    out.bias_gradient += g;
  }
  for (std::size_t j = 0; j < w.size(); ++j) {
    out.loss += 0.5 * lambda * w[j] * w[j];
    out.weight_gradient[j] += lambda * w[j];
  }
  return out;
}

struct LogisticConfig {
  double lambda = 0.0;
  int epochs = 1000;
  double learning_rate = 0.01;
};

/// Full-batch Adam on the regularized cross-entropy, starting from zero.
inline LinearModel fit_logistic(const FeatureMatrix& x, const LabelVector& y,
                                const LogisticConfig& config) {
  check_training_set(x, y, "fit_logistic", true);
  const std::size_t d = x.cols();
  std::vector<double> params(d + 1, 0.0);  // weights then bias
  AdamState adam(d + 1, AdamConfig{.learning_rate = config.learning_rate});
  LinearModel model;
  model.kind = LinearKind::logistic;
  model.lambda = config.lambda;
  std::vector<double> grad(d + 1);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto lg = logistic_loss(std::span<const double>(params).first(d), params[d], x, y, config.lambda);
    model.loss_history.push_back(lg.loss);
    std::copy(lg.weight_gradient.begin(), lg.weight_gradient.end(), grad.begin());
    grad[d] = lg.bias_gradient;
    adam_update(params, grad, adam);
  }
  model.weights.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(d));
  model.bias = params[d];
  model.loss_history.push_back(logistic_loss(model.weights, model.bias, x, y, config.lambda).loss);
  return model;
}

/// lambda/2 ||w||^2 + mean hinge loss with labels mapped to -1/+1.
inline double svm_objective(std::span<const double> w, double b, const FeatureMatrix& x,
                            const LabelVector& y, double lambda) {
  double hinge = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double s = y[r] == 1 ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - s * (dot(w, x.row(r)) + b));
  }
  return 0.5 * lambda * dot(w, w) + hinge / static_cast<double>(x.rows());
}

struct LinearSvmConfig {
  double lambda = 1e-2;
  int epochs = 2000;
};

/// Full-batch subgradient descent with step 1/(lambda t). Returns the iterate
/// with the lowest objective seen; loss_history holds that running minimum.
inline LinearModel fit_linear_svm(const FeatureMatrix& x, const LabelVector& y,
                                  const LinearSvmConfig& config) {
  check_training_set(x, y, "fit_linear_svm", true);
  if (!(config.lambda > 0.0)) throw std::invalid_argument("fit_linear_svm: lambda must be positive");
  const std::size_t d = x.cols();
  const double n = static_cast<double>(x.rows());
  std::vector<double> w(d, 0.0), gw(d);
  double b = 0.0;
  LinearModel best;
  best.kind = LinearKind::linear_svm;
  best.lambda = config.lambda;
  best.weights = w;
  double best_obj = svm_objective(w, b, x, y, config.lambda);
  best.loss_history.push_back(best_obj);
  for (int t = 1; t <= config.epochs; ++t) {
    const double eta = 1.0 / (config.lambda * t);
    for (std::size_t j = 0; j < d; ++j) gw[j] = config.lambda * w[j];
    double gb = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double s = y[r] == 1 ? 1.0 : -1.0;
      auto row = x.row(r);
      if (s * (dot(w, row) + b) < 1.0) {
        for (std::size_t j = 0; j < d; ++j) gw[j] -= s * row[j] / n;
        gb -= s / n;
      }
    }
    for (std::size_t j = 0; j < d; ++j) w[j] -= eta * gw[j];
    b -= eta * gb;
    const double obj = svm_objective(w, b, x, y, config.lambda);
    if (obj < best_obj) {
      best_obj = obj;
      best.weights = w;
      best.bias = b;
    }
    best.loss_history.push_back(best_obj);
  }
  return best;
}

}  // namespace augbench
