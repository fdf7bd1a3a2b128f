#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "augbench/classifiers/prediction.hpp"
#include "augbench/matrix.hpp"
#include "augbench/mlp.hpp"
#include "augbench/rng.hpp"

namespace augbench {

struct DenseNetConfig {
  std::vector<std::size_t> hidden{16, 8};
  int epochs = 500;
  double learning_rate = 1e-3;
};

struct DenseNetModel {
  MlpParams network;  // ReLU hidden layers, single sigmoid output
  std::vector<double> loss_history;

  static constexpr double threshold = 0.5;
};

struct BceResult {
  double loss = 0.0;
  Matrix output_gradient;
};

// Mean binary cross-entropy of sigmoid outputs, probabilities clamped to
// [1e-7, 1 - 1e-7]; the clamp passes no gradient.
inline BceResult binary_cross_entropy(const Matrix& probabilities, const LabelVector& y) {
  constexpr double eps = 1e-7;
  const double n = static_cast<double>(y.size());
  BceResult out{0.0, Matrix(probabilities.rows(), 1)};
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = probabilities(i, 0);
    const double pc = std::clamp(p, eps, 1.0 - eps);
    out.loss -= (y[i] == 1 ? std::log(pc) : std::log(1.0 - pc)) / n;
    if (p >= eps && p <= 1.0 - eps) out.output_gradient(i, 0) = y[i] == 1 ? -1.0 / (n * p) : 1.0 / (n * (1.0 - p));
  }
  return out;
}

inline DenseNetModel fit_dense_net(const FeatureMatrix& x, const LabelVector& y,
                                   const DenseNetConfig& config, const RngStream& rng) {
  check_training_set(x, y, "fit_dense_net", true);
  std::vector<std::size_t> widths{x.cols()};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(1);
  std::vector<Activation> acts(config.hidden.size(), Activation::relu);
  acts.push_back(Activation::sigmoid);
  auto init = rng.derive("init");
  DenseNetModel model{mlp_init(widths, acts, init), {}};
  AdamState adam(model.network.parameter_count(), AdamConfig{.learning_rate = config.learning_rate});
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto pass = mlp_forward(model.network, x);
    const auto bce = binary_cross_entropy(pass.output(), y);
    if (!std::isfinite(bce.loss)) {
      throw std::runtime_error("fit_dense_net: non-finite loss at epoch " + std::to_string(epoch));
    }
    model.loss_history.push_back(bce.loss);
    adam_step(model.network, mlp_backward(model.network, pass, bce.output_gradient), adam);
  }
  model.loss_history.push_back(binary_cross_entropy(mlp_predict(model.network, x), y).loss);
  return model;
}

inline std::vector<ScoredPrediction> predict(const DenseNetModel& model, const FeatureMatrix& x) {
  check_width(x, model.network.input_size(), "dense net predict");
  const Matrix p = mlp_predict(model.network, x);
  std::vector<ScoredPrediction> out;
  out.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out.push_back(scored(p(r, 0), DenseNetModel::threshold));
  return out;
}

}  // namespace augbench
