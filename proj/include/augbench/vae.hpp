#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "augbench/log.hpp"
#include "augbench/matrix.hpp"
#include "augbench/mlp.hpp"
#include "augbench/rng.hpp"

namespace augbench {

struct VaeConfig {
  std::size_t hidden = 16;
  std::size_t latent_dim = 4;
  int epochs = 500;
  double learning_rate = 1e-3;
  double beta = 1.0;
  std::size_t batch_size = 0;  // 0 = full batch
  double logvar_clamp = 10.0;
};

struct EpochLoss {
  int epoch = 0;
  double loss = 0.0;
  bool operator==(const EpochLoss&) const = default;
};

/// Encoder trunk d -> hidden (ReLU) feeding two linear heads (mean and log
/// variance of the latent posterior); decoder latent -> hidden (ReLU) -> d.
struct VaeModel {
  MlpParams encoder_trunk;
  MlpParams mean_head;
  MlpParams logvar_head;
  MlpParams decoder;
  std::size_t latent_dim = 0;
  int class_label = 0;
  double beta = 1.0;
  double logvar_clamp = 10.0;
  std::vector<EpochLoss> loss_history;

  std::size_t input_dim() const { return encoder_trunk.input_size(); }
  std::size_t output_dim() const { return decoder.output_size(); }
};

inline VaeModel vae_init(std::size_t d, const VaeConfig& config, const RngStream& rng) {
  if (d == 0) throw std::invalid_argument("vae: feature dimension must be positive");
  if (config.latent_dim == 0 || config.hidden == 0) {
    throw std::invalid_argument("vae: latent and hidden widths must be positive");
  }
  VaeModel m;
  auto enc = rng.derive("encoder");
  auto mu = rng.derive("mean-head");
  auto lv = rng.derive("logvar-head");
  auto dec = rng.derive("decoder");
  m.encoder_trunk = mlp_init({d, config.hidden}, {Activation::relu}, enc);
  m.mean_head = mlp_init({config.hidden, config.latent_dim}, {Activation::identity}, mu);
  m.logvar_head = mlp_init({config.hidden, config.latent_dim}, {Activation::identity}, lv);
  m.decoder = mlp_init({config.latent_dim, config.hidden, d},
                       {Activation::relu, Activation::identity}, dec);
  m.latent_dim = config.latent_dim;
  m.beta = config.beta;
  m.logvar_clamp = config.logvar_clamp;
  return m;
}

struct VaeGradients {
  MlpGradients encoder_trunk;
  MlpGradients mean_head;
  MlpGradients logvar_head;
  MlpGradients decoder;
};

struct VaeLossResult {
  double loss = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
  std::size_t clamped_entries = 0;
  VaeGradients gradients;
};

// KL(N(mu, exp(logvar)) || N(0, 1)) for one coordinate.
inline double gaussian_kl(double mu, double logvar) {
  return 0.5 * (mu * mu + std::exp(logvar) - 1.0 - logvar);
}

// z = mu + exp(logvar / 2) * eps
inline Matrix reparameterize(const Matrix& mu, const Matrix& logvar, const Matrix& noise) {
  Matrix z(mu.rows(), mu.cols());
  for (std::size_t i = 0; i < z.size(); ++i)
    z.values()[i] = mu.values()[i] + std::exp(0.5 * logvar.values()[i]) * noise.values()[i];
  return z;
}

/// Negative ELBO for a batch with explicit reparameterization noise:
///   (1/n) sum_rows [ ||decode(z) - x||^2 + beta * KL ].
/// log-variance outputs are clamped to +-logvar_clamp; clamped entries pass no
/// gradient.
inline VaeLossResult vae_loss(const VaeModel& model, const FeatureMatrix& batch,
                              const Matrix& noise) {
  if (batch.cols() != model.input_dim()) {
    throw std::invalid_argument("vae_loss: batch has " + std::to_string(batch.cols()) +
                                " columns, model expects " + std::to_string(model.input_dim()));
  }
  if (batch.rows() == 0) throw std::invalid_argument("vae_loss: empty batch");
  if (noise.rows() != batch.rows() || noise.cols() != model.latent_dim) {
    throw std::invalid_argument("vae_loss: noise shape mismatch");
  }
  const double n = static_cast<double>(batch.rows());
  const std::size_t latent = model.latent_dim;

  const auto trunk = mlp_forward(model.encoder_trunk, batch);
  const auto mu_pass = mlp_forward(model.mean_head, trunk.output());
  const auto lv_pass = mlp_forward(model.logvar_head, trunk.output());
  const Matrix& mu = mu_pass.output();
  Matrix logvar = lv_pass.output();
  std::vector<bool> clamped(logvar.size(), false);
  VaeLossResult out;
  for (std::size_t i = 0; i < logvar.size(); ++i) {
    double& v = logvar.values()[i];
    if (v > model.logvar_clamp || v < -model.logvar_clamp || !std::isfinite(v)) {
      v = std::isnan(v) ? 0.0 : std::clamp(v, -model.logvar_clamp, model.logvar_clamp);
      clamped[i] = true;
      ++out.clamped_entries;
    }
  }
  const Matrix z = reparameterize(mu, logvar, noise);
  const auto dec = mlp_forward(model.decoder, z);
  const Matrix& recon = dec.output();

  Matrix d_recon(recon.rows(), recon.cols());
  for (std::size_t i = 0; i < recon.size(); ++i) {
    const double diff = recon.values()[i] - batch.values()[i];
    out.reconstruction += diff * diff;
    d_recon.values()[i] = 2.0 * diff / n;
  }
  for (std::size_t i = 0; i < mu.size(); ++i) out.kl += gaussian_kl(mu.values()[i], logvar.values()[i]);
  out.reconstruction /= n;
  out.kl /= n;
  out.loss = out.reconstruction + model.beta * out.kl;
  if (!std::isfinite(out.loss)) throw std::domain_error("vae_loss: non-finite loss");

  out.gradients.decoder = mlp_backward(model.decoder, dec, d_recon);
  const Matrix& dz = out.gradients.decoder.input;
  Matrix d_mu(mu.rows(), latent);
  Matrix d_lv(mu.rows(), latent);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double m = mu.values()[i];
    const double lv = logvar.values()[i];
    const double sd = std::exp(0.5 * lv);
    d_mu.values()[i] = dz.values()[i] + model.beta * m / n;
    d_lv.values()[i] = clamped[i] ? 0.0
                                  : dz.values()[i] * noise.values()[i] * 0.5 * sd +
                                        model.beta * 0.5 * (std::exp(lv) - 1.0) / n;
  }
  out.gradients.mean_head = mlp_backward(model.mean_head, mu_pass, d_mu);
  out.gradients.logvar_head = mlp_backward(model.logvar_head, lv_pass, d_lv);
  Matrix d_trunk = out.gradients.mean_head.input;
  for (std::size_t i = 0; i < d_trunk.size(); ++i)
    d_trunk.values()[i] += out.gradients.logvar_head.input.values()[i];
  out.gradients.encoder_trunk = mlp_backward(model.encoder_trunk, trunk, d_trunk);
  return out;
}

inline Matrix standard_normal(std::size_t rows, std::size_t cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (auto& v : m.values()) v = rng.normal();
  return m;
}

inline VaeLossResult vae_loss(const VaeModel& model, const FeatureMatrix& batch, RngStream& rng) {
  return vae_loss(model, batch, standard_normal(batch.rows(), model.latent_dim, rng));
}

namespace detail {

inline std::vector<double> vae_flatten(const VaeModel& m) {
  std::vector<double> out;
  for (const MlpParams* p : {&m.encoder_trunk, &m.mean_head, &m.logvar_head, &m.decoder}) {
    auto f = flatten(*p);
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

inline std::vector<double> vae_flatten(const VaeGradients& g) {
  std::vector<double> out;
  for (const MlpGradients* p : {&g.encoder_trunk, &g.mean_head, &g.logvar_head, &g.decoder}) {
    auto f = flatten(*p);
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

inline void vae_unflatten(std::span<const double> flat, VaeModel& m) {
  std::size_t k = 0;
  for (MlpParams* p : {&m.encoder_trunk, &m.mean_head, &m.logvar_head, &m.decoder}) {
    const std::size_t n = p->parameter_count();
    unflatten(flat.subspan(k, n), *p);
    k += n;
  }
}

// Row batches for one epoch: a single full batch, or a shuffled partition.
inline std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                           RngStream& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (batch_size == 0 || batch_size >= n) return {order};
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t s = 0; s < n; s += batch_size)
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(s),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n, s + batch_size)));
  return batches;
}

}  // namespace detail

/// Adam-trains a VAE. loss_history[0] is the loss at initialization (epoch 0);
/// entry e is the mean batch loss seen during epoch e.
inline VaeModel train_vae(const FeatureMatrix& data, const VaeConfig& config, const RngStream& rng) {
  if (data.cols() == 0) throw std::invalid_argument("train_vae: data has zero features");
  if (data.rows() < 2) throw std::invalid_argument("train_vae: need at least 2 rows");
  if (config.epochs < 0) throw std::invalid_argument("train_vae: epochs must be nonnegative");
  VaeModel model = vae_init(data.cols(), config, rng.derive("init"));
  auto noise_rng = rng.derive("noise");
  auto batch_rng = rng.derive("batches");
  std::size_t clamped = 0;

  model.loss_history.push_back({0, vae_loss(model, data, noise_rng).loss});
  auto flat = detail::vae_flatten(model);
  AdamState adam(flat.size(), AdamConfig{.learning_rate = config.learning_rate});
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double total = 0.0;
    const auto batches = detail::epoch_batches(data.rows(), config.batch_size, batch_rng);
    for (const auto& idx : batches) {
      const Matrix batch = batches.size() == 1 ? data : data.select_rows(idx);
      auto res = vae_loss(model, batch, noise_rng);
      clamped += res.clamped_entries;
      total += res.loss;
      adam_update(flat, detail::vae_flatten(res.gradients), adam);
      detail::vae_unflatten(flat, model);
    }
    model.loss_history.push_back({epoch, total / static_cast<double>(batches.size())});
  }
  if (clamped > 0) {
    warn("vae: log-variance clamped to +-" + std::to_string(config.logvar_clamp) + " in " +
         std::to_string(clamped) + " entries during training");
  }
  return model;
}

/// Draws z ~ N(0, I) and decodes. Only the decoder is used.
inline FeatureMatrix decode_prior_samples(const MlpParams& decoder, std::size_t latent_dim,
                                          std::int64_t n, const RngStream& rng) {
  if (n < 0) throw std::invalid_argument("sample: n must be nonnegative");
  if (n == 0) return FeatureMatrix(0, decoder.output_size());
  RngStream stream = rng;
  const Matrix z = standard_normal(static_cast<std::size_t>(n), latent_dim, stream);
  return mlp_predict(decoder, z);
}

inline FeatureMatrix sample_vae(const VaeModel& model, std::int64_t n, const RngStream& rng) {
  return decode_prior_samples(model.decoder, model.latent_dim, n, rng);
}

inline void write_loss_history_csv(std::ostream& os, const std::vector<EpochLoss>& history) {
  os << "epoch,loss\n" << std::setprecision(17);
  for (const auto& h : history) os << h.epoch << ',' << h.loss << '\n';
}

}  // namespace augbench
