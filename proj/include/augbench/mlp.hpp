#pragma once

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "augbench/matrix.hpp"
#include "augbench/rng.hpp"

namespace augbench {

enum class Activation { relu, sigmoid, tanh, identity };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "?";
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double activate(Activation a, double x) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::sigmoid: return sigmoid(x);
    case Activation::tanh: return std::tanh(x);
    case Activation::identity: return x;
  }
  return x;
}

// Derivative expressed through the post-activation value y. ReLU'(0) = 0.
inline double activation_derivative(Activation a, double y) {
  switch (a) {
    case Activation::relu: return y > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: return y * (1.0 - y);
    case Activation::tanh: return 1.0 - y * y;
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

/// One fully connected layer: y = act(x W + b) with W stored fan_in x fan_out.
struct DenseLayer {
  Matrix weight;
  std::vector<double> bias;
  Activation activation = Activation::identity;

  std::size_t fan_in() const { return weight.rows(); }
  std::size_t fan_out() const { return weight.cols(); }
  bool operator==(const DenseLayer&) const = default;
};

struct MlpParams {
  std::vector<DenseLayer> layers;

  std::size_t input_size() const { return layers.empty() ? 0 : layers.front().fan_in(); }
  std::size_t output_size() const { return layers.empty() ? 0 : layers.back().fan_out(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
  }

  // Adjacent layers must chain and every bias must match its layer width.
  void validate() const {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].bias.size() != layers[i].fan_out()) {
        throw std::invalid_argument("MlpParams: bias size mismatch in layer " + std::to_string(i));
      }
      if (i + 1 < layers.size() && layers[i].fan_out() != layers[i + 1].fan_in()) {
        throw std::invalid_argument("MlpParams: layer " + std::to_string(i) +
                                    " output does not chain into layer " + std::to_string(i + 1));
      }
    }
  }

  bool operator==(const MlpParams&) const = default;
};

/// Builds an MLP with widths[0] inputs and one layer per activation. Weights
/// are uniform in +-sqrt(6 / (fan_in + fan_out)); biases start at zero.
inline MlpParams mlp_init(std::span<const std::size_t> widths,
                          std::span<const Activation> activations, RngStream& rng) {
  if (widths.size() < 2 || activations.size() != widths.size() - 1) {
    throw std::invalid_argument("mlp_init: need one activation per layer");
  }
  MlpParams p;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const std::size_t fan_in = widths[i];
    const std::size_t fan_out = widths[i + 1];
    if (fan_in == 0 || fan_out == 0) throw std::invalid_argument("mlp_init: zero-width layer");
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer{Matrix(fan_in, fan_out), std::vector<double>(fan_out, 0.0), activations[i]};
    for (auto& w : layer.weight.values()) w = rng.uniform(-limit, limit);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

inline MlpParams mlp_init(std::initializer_list<std::size_t> widths,
                          std::initializer_list<Activation> activations, RngStream& rng) {
  return mlp_init(std::span<const std::size_t>(widths.begin(), widths.size()),
                  std::span<const Activation>(activations.begin(), activations.size()), rng);
}

/// Cached forward pass: the input plus every layer's post-activation output.
struct ForwardPass {
  Matrix input;
  std::vector<Matrix> activations;

  const Matrix& output() const { return activations.empty() ? input : activations.back(); }
};

inline ForwardPass mlp_forward(const MlpParams& params, const Matrix& input) {
  if (input.cols() != params.input_size()) {
    throw std::invalid_argument("mlp_forward: input has " + std::to_string(input.cols()) +
                                " columns, network expects " +
                                std::to_string(params.input_size()));
  }
  ForwardPass pass{input, {}};
  pass.activations.reserve(params.layers.size());
  const Matrix* x = &pass.input;
  for (const auto& layer : params.layers) {
    Matrix z = matmul(*x, layer.weight);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      auto row = z.row(r);
      for (std::size_t c = 0; c < row.size(); ++c)
        row[c] = activate(layer.activation, row[c] + layer.bias[c]);
    }
    pass.activations.push_back(std::move(z));
    x = &pass.activations.back();
  }
  return pass;
}

inline Matrix mlp_predict(const MlpParams& params, const Matrix& input) {
  return std::move(mlp_forward(params, input).activations.back());
}

/// Gradients mirroring MlpParams, plus the gradient with respect to the input
/// batch (needed when networks are chained).
struct MlpGradients {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;
  Matrix input;

  static MlpGradients zeros_like(const MlpParams& p) {
    MlpGradients g;
    for (const auto& l : p.layers) {
      g.weight.emplace_back(l.weight.rows(), l.weight.cols());
      g.bias.emplace_back(l.bias.size(), 0.0);
    }
    return g;
  }

  void accumulate(const MlpGradients& other) {
    for (std::size_t i = 0; i < weight.size(); ++i) {
      auto dst = weight[i].values();
      auto src = other.weight[i].values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      for (std::size_t k = 0; k < bias[i].size(); ++k) bias[i][k] += other.bias[i][k];
    }
  }
};

/// Backpropagates dLoss/dOutput through a cached forward pass.
inline MlpGradients mlp_backward(const MlpParams& params, const ForwardPass& pass,
                                 const Matrix& output_gradient) {
  const std::size_t n_layers = params.layers.size();
  if (pass.activations.size() != n_layers) {
    throw std::invalid_argument("mlp_backward: forward pass does not match network depth");
  }
  const Matrix& out = pass.output();
  if (output_gradient.rows() != out.rows() || output_gradient.cols() != out.cols()) {
    throw std::invalid_argument("mlp_backward: output gradient shape " +
                                shape_string(output_gradient) + " != output shape " +
                                shape_string(out));
  }
  MlpGradients grads;
  grads.weight.resize(n_layers);
  grads.bias.resize(n_layers);

  Matrix delta = output_gradient;
  for (std::size_t li = n_layers; li-- > 0;) {
    const auto& layer = params.layers[li];
    const Matrix& y = pass.activations[li];
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      auto d = delta.row(r);
      auto yr = y.row(r);
      for (std::size_t c = 0; c < d.size(); ++c) d[c] *= activation_derivative(layer.activation, yr[c]);
    }
    const Matrix& x = li == 0 ? pass.input : pass.activations[li - 1];
    grads.weight[li] = matmul_tn(x, delta);
    grads.bias[li].assign(layer.fan_out(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      auto d = delta.row(r);
      for (std::size_t c = 0; c < d.size(); ++c) grads.bias[li][c] += d[c];
    }
    delta = matmul_nt(delta, layer.weight);
  }
  grads.input = std::move(delta);
  return grads;
}

inline std::vector<double> flatten(const MlpParams& p) {
  std::vector<double> out;
  out.reserve(p.parameter_count());
  for (const auto& l : p.layers) {
    auto w = l.weight.values();
    out.insert(out.end(), w.begin(), w.end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

inline std::vector<double> flatten(const MlpGradients& g) {
  std::vector<double> out;
  for (std::size_t i = 0; i < g.weight.size(); ++i) {
    auto w = g.weight[i].values();
    out.insert(out.end(), w.begin(), w.end());
    out.insert(out.end(), g.bias[i].begin(), g.bias[i].end());
  }
  return out;
}

inline void unflatten(std::span<const double> flat, MlpParams& p) {
  if (flat.size() != p.parameter_count()) throw std::invalid_argument("unflatten: size mismatch");
  std::size_t k = 0;
  for (auto& l : p.layers) {
    for (auto& w : l.weight.values()) w = flat[k++];
    for (auto& b : l.bias) b = flat[k++];
  }
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam moments over a flat parameter vector.
struct AdamState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;

  AdamState() = default;
  AdamState(std::size_t n, AdamConfig cfg) : config(cfg), m(n, 0.0), v(n, 0.0) {
    if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
      throw std::invalid_argument("AdamState: betas must lie in [0, 1)");
    }
  }
};

inline void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || state.m.size() != params.size()) {
    throw std::invalid_argument("adam_update: shape mismatch");
  }
  if (!all_finite(grads)) throw std::domain_error("adam_update: non-finite gradient");
  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

inline void adam_step(MlpParams& params, const MlpGradients& grads, AdamState& state) {
  std::vector<double> flat = flatten(params);
  const std::vector<double> g = flatten(grads);
  adam_update(flat, g, state);
  unflatten(flat, params);
}

// Debug dump: one line per parameter (layer, kind, row, col, value).
inline void write_mlp_csv(std::ostream& os, const MlpParams& p) {
  os << "layer,kind,row,col,value\n" << std::setprecision(17);
  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    const auto& l = p.layers[li];
    for (std::size_t r = 0; r < l.weight.rows(); ++r)
      for (std::size_t c = 0; c < l.weight.cols(); ++c)
        os << li << ",weight," << r << ',' << c << ',' << l.weight(r, c) << '\n';
    for (std::size_t c = 0; c < l.bias.size(); ++c)
      os << li << ",bias,0," << c << ',' << l.bias[c] << '\n';
  }
}

}  // namespace augbench
