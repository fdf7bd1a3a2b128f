#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "augbench/matrix.hpp"
#include "augbench/mlp.hpp"
#include "augbench/rng.hpp"
#include "augbench/vae.hpp"

namespace augbench {

inline constexpr double kProbabilityClamp = 1e-7;

struct GanConfig {
  VaeConfig generator;  // architecture; generator.epochs is ignored
  int pretrain_epochs = 200;
  int epochs = 2000;
  double learning_rate = 1e-3;
  std::size_t batch_size = 0;  // 0 = full batch
  std::vector<std::size_t> discriminator_hidden{16, 8};
};

struct GanEpochLoss {
  int epoch = 0;
  double generator_loss = 0.0;
  double discriminator_loss = 0.0;
  bool operator==(const GanEpochLoss&) const = default;
};

/// Generator is a VAE whose decoder maps z ~ N(0, I) to feature space; the
/// encoder only takes part in reconstruction pretraining.
struct GanModel {
  VaeModel generator;
  MlpParams discriminator;
  int class_label = 0;
  std::vector<GanEpochLoss> loss_history;
  int discriminator_updates = 0;
  int generator_updates = 0;
};

inline MlpParams discriminator_init(std::size_t d, const std::vector<std::size_t>& hidden,
                                    const RngStream& rng) {
  std::vector<std::size_t> widths{d};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  std::vector<Activation> acts(hidden.size(), Activation::relu);
  acts.push_back(Activation::sigmoid);
  auto stream = rng;
  return mlp_init(widths, acts, stream);
}

struct DiscriminatorLoss {
  double loss = 0.0;
  MlpGradients gradients;  // w.r.t. discriminator parameters
};

namespace detail {

inline double clamp_probability(double p) {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

// dLoss/dp contribution of one row of -log(p) (target 1) or -log(1-p)
// (target 0); zero when p sits outside the clamp interval.
inline double bce_probability_gradient(double p, int target, double scale) {
  if (p < kProbabilityClamp || p > 1.0 - kProbabilityClamp) return 0.0;
  return target == 1 ? -scale / p : scale / (1.0 - p);
}

}  // namespace detail

/// Binary cross-entropy averaged over all real (target 1) and fake (target 0)
/// rows, with probabilities clamped to [1e-7, 1 - 1e-7] before the log.
inline DiscriminatorLoss discriminator_loss(const MlpParams& disc, const FeatureMatrix& real,
                                            const FeatureMatrix& fake) {
  if (real.rows() == 0 || fake.rows() == 0) {
    throw std::invalid_argument("discriminator_loss: empty real or fake batch");
  }
  if (real.cols() != disc.input_size() || fake.cols() != disc.input_size()) {
    throw std::invalid_argument("discriminator_loss: batch width does not match discriminator");
  }
  Matrix both = real;
  both.append_rows(fake);
  const auto pass = mlp_forward(disc, both);
  const Matrix& p = pass.output();
  const double n = static_cast<double>(both.rows());
  DiscriminatorLoss out;
  Matrix grad(both.rows(), 1);
  for (std::size_t i = 0; i < both.rows(); ++i) {
    const int target = i < real.rows() ? 1 : 0;
    const double pc = detail::clamp_probability(p(i, 0));
    out.loss -= (target == 1 ? std::log(pc) : std::log(1.0 - pc)) / n;
    grad(i, 0) = detail::bce_probability_gradient(p(i, 0), target, 1.0 / n);
  }
  out.gradients = mlp_backward(disc, pass, grad);
  return out;
}

struct GeneratorLoss {
  double loss = 0.0;
  Matrix fake_gradient;  // dLoss/dFake, same shape as the fake batch
};

// Non-saturating generator objective: mean of -log D(fake).
inline GeneratorLoss generator_adversarial_loss(const MlpParams& disc, const FeatureMatrix& fake) {
  if (fake.rows() == 0) throw std::invalid_argument("generator loss: empty fake batch");
  const auto pass = mlp_forward(disc, fake);
  const Matrix& p = pass.output();
  const double n = static_cast<double>(fake.rows());
  GeneratorLoss out;
  Matrix grad(fake.rows(), 1);
  for (std::size_t i = 0; i < fake.rows(); ++i) {
    out.loss -= std::log(detail::clamp_probability(p(i, 0))) / n;
    grad(i, 0) = detail::bce_probability_gradient(p(i, 0), 1, 1.0 / n);
  }
  out.fake_gradient = mlp_backward(disc, pass, grad).input;
  return out;
}

/// Reconstruction-pretrains the generator VAE, then alternates one
/// discriminator step and one generator (decoder) step per epoch.
inline GanModel train_gan(const FeatureMatrix& data, const GanConfig& config, const RngStream& rng) {
  if (data.rows() < 2) throw std::invalid_argument("train_gan: need at least 2 rows");
  if (config.epochs < 0 || config.pretrain_epochs < 0) {
    throw std::invalid_argument("train_gan: epoch counts must be nonnegative");
  }
  GanModel model;
  VaeConfig pre = config.generator;
  pre.epochs = config.pretrain_epochs;
  model.generator = train_vae(data, pre, rng.derive("pretrain"));
  model.discriminator =
      discriminator_init(data.cols(), config.discriminator_hidden, rng.derive("discriminator"));

  auto& decoder = model.generator.decoder;
  const std::size_t latent = model.generator.latent_dim;
  AdamConfig adam_cfg{.learning_rate = config.learning_rate};
  AdamState disc_adam(model.discriminator.parameter_count(), adam_cfg);
  AdamState gen_adam(decoder.parameter_count(), adam_cfg);
  auto batch_rng = rng.derive("real-batches");
  auto noise_rng = rng.derive("latent-noise");
  const std::size_t batch =
      config.batch_size == 0 ? data.rows() : std::min(config.batch_size, data.rows());

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Matrix real;
    if (batch == data.rows()) {
      real = data;
    } else {
      std::vector<std::size_t> idx(batch);
      for (auto& i : idx) i = static_cast<std::size_t>(batch_rng.below(data.rows()));
      real = data.select_rows(idx);
    }

    const Matrix fake = mlp_predict(decoder, standard_normal(batch, latent, noise_rng));
    const auto d = discriminator_loss(model.discriminator, real, fake);
    adam_step(model.discriminator, d.gradients, disc_adam);
    ++model.discriminator_updates;

    const Matrix z = standard_normal(batch, latent, noise_rng);
    const auto gen_pass = mlp_forward(decoder, z);
    const auto g = generator_adversarial_loss(model.discriminator, gen_pass.output());
    adam_step(decoder, mlp_backward(decoder, gen_pass, g.fake_gradient), gen_adam);
    ++model.generator_updates;

    if (!std::isfinite(d.loss) || !std::isfinite(g.loss)) {
      throw std::runtime_error("train_gan: non-finite loss at epoch " + std::to_string(epoch) +
                               " (generator " + std::to_string(g.loss) + ", discriminator " +
                               std::to_string(d.loss) + ")");
    }
    model.loss_history.push_back({epoch, g.loss, d.loss});
  }
  return model;
}

inline FeatureMatrix sample_gan(const GanModel& model, std::int64_t n, const RngStream& rng) {
  return decode_prior_samples(model.generator.decoder, model.generator.latent_dim, n, rng);
}

inline void write_loss_history_csv(std::ostream& os, const std::vector<GanEpochLoss>& history) {
  os << "epoch,generator_loss,discriminator_loss\n" << std::setprecision(17);
  for (const auto& h : history)
    os << h.epoch << ',' << h.generator_loss << ',' << h.discriminator_loss << '\n';
}

}  // namespace augbench
