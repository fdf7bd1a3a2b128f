#pragma once

// Random gradient-check instances shared by the unit tests and the
// acceptance binary. Each returns the worst relative error between the
// analytic gradient and central differences (step 1e-5).

#include <cstdint>
#include <string>
#include <vector>

#include "augbench/classifiers/linear.hpp"
#include "augbench/gan.hpp"
#include "augbench/mlp.hpp"
#include "augbench/vae.hpp"
#include "support/oracles.hpp"

namespace gradcheck {

using namespace augbench;

inline Activation pick_activation(RngStream& rng) {
  constexpr Activation all[] = {Activation::relu, Activation::sigmoid, Activation::tanh, Activation::identity};
  return all[rng.below(4)];
}

// Random net with at most 3 layers and widths at most 8; loss = sum(out * G).
inline double mlp_instance(std::uint64_t seed) {
  RngStream rng(seed);
  const std::size_t depth = 1 + rng.below(3);
  std::vector<std::size_t> widths{1 + rng.below(8)};
  std::vector<Activation> acts;
  for (std::size_t l = 0; l < depth; ++l) {
    widths.push_back(1 + rng.below(8));
    acts.push_back(pick_activation(rng));
  }
  auto init = rng.derive("init");
  MlpParams net = mlp_init(widths, acts, init);
  for (auto& l : net.layers)
    for (auto& b : l.bias) b = 0.1 * rng.normal();
  const Matrix x = oracle::random_matrix(1 + rng.below(5), widths.front(), rng);
  const Matrix g = oracle::random_matrix(x.rows(), widths.back(), rng);

  auto loss = [&](const std::vector<double>& flat) {
    MlpParams p = net;
    unflatten(flat, p);
    const Matrix out = mlp_predict(p, x);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out.values()[i] * g.values()[i];
    return s;
  };
  const auto analytic = flatten(mlp_backward(net, mlp_forward(net, x), g));
  return oracle::max_relative_error(analytic, oracle::central_differences(loss, flatten(net)));
}

// Width-4 toy VAE with frozen reparameterization noise.
inline double vae_instance(std::uint64_t seed) {
  RngStream rng(seed);
  const std::size_t d = 1 + rng.below(4);
  VaeConfig cfg{.hidden = 4, .latent_dim = 1 + rng.below(3)};
  VaeModel model = vae_init(d, cfg, rng.derive("init"));
  const Matrix batch = oracle::random_matrix(2 + rng.below(4), d, rng);
  const Matrix noise = oracle::random_matrix(batch.rows(), cfg.latent_dim, rng);
  auto loss = [&](const std::vector<double>& flat) {
    VaeModel m = model;
    detail::vae_unflatten(flat, m);
    return vae_loss(m, batch, noise).loss;
  };
  const auto analytic = detail::vae_flatten(vae_loss(model, batch, noise).gradients);
  return oracle::max_relative_error(analytic, oracle::central_differences(loss, detail::vae_flatten(model)));
}

// Width-4 discriminator on random real and fake batches.
inline double discriminator_instance(std::uint64_t seed) {
  RngStream rng(seed);
  const std::size_t d = 1 + rng.below(4);
  MlpParams disc = discriminator_init(d, {4}, rng.derive("init"));
  const Matrix real = oracle::random_matrix(1 + rng.below(4), d, rng);
  const Matrix fake = oracle::random_matrix(1 + rng.below(4), d, rng);
  auto loss = [&](const std::vector<double>& flat) {
    MlpParams p = disc;
    unflatten(flat, p);
    return discriminator_loss(p, real, fake).loss;
  };
  const auto analytic = flatten(discriminator_loss(disc, real, fake).gradients);
  return oracle::max_relative_error(analytic, oracle::central_differences(loss, flatten(disc)));
}

// Regularized logistic loss with respect to (w, b).
inline double logistic_instance(std::uint64_t seed) {
  RngStream rng(seed);
  const std::size_t d = 1 + rng.below(5);
  const std::size_t n = 2 + rng.below(10);
  const Matrix x = oracle::random_matrix(n, d, rng);
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(rng.below(2));
  const double lambda = rng.uniform(0.0, 1.0);
  std::vector<double> params(d + 1);
  for (auto& p : params) p = rng.normal();
  auto split = [d](const std::vector<double>& p) {
    return std::pair{std::vector<double>(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(d)), p[d]};
  };
  auto loss = [&](const std::vector<double>& p) {
    auto [w, b] = split(p);
    return logistic_loss(w, b, x, y, lambda).loss;
  };
  auto [w, b] = split(params);
  const auto lg = logistic_loss(w, b, x, y, lambda);
  std::vector<double> analytic = lg.weight_gradient;
  analytic.push_back(lg.bias_gradient);
  return oracle::max_relative_error(analytic, oracle::central_differences(loss, params));
}

}  // namespace gradcheck
