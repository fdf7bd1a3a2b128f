#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "augbench/apportion.hpp"
#include "augbench/dataio.hpp"
#include "augbench/gan.hpp"
#include "augbench/gmm.hpp"
#include "augbench/matrix.hpp"
#include "augbench/rng.hpp"
#include "augbench/vae.hpp"

namespace augbench {

enum class Generator { none, gmm, vae, gan };

inline std::string_view to_string(Generator g) {
  switch (g) {
    case Generator::none: return "none";
    case Generator::gmm: return "gmm";
    case Generator::vae: return "vae";
    case Generator::gan: return "gan";
  }
  return "?";
}

inline Generator parse_generator(std::string_view s) {
  if (s == "none") return Generator::none;
  if (s == "gmm") return Generator::gmm;
  if (s == "vae") return Generator::vae;
  if (s == "gan") return Generator::gan;
  throw std::invalid_argument("unknown generator '" + std::string(s) + "'");
}

inline constexpr std::size_t kSyntheticRow = std::numeric_limits<std::size_t>::max();

/// Where each row of an augmented training set came from. `source_row` indexes
/// the original training set, or is kSyntheticRow for generated rows.
struct RowOrigin {
  std::size_t source_row = kSyntheticRow;
  bool synthetic() const { return source_row == kSyntheticRow; }
  bool operator==(const RowOrigin&) const = default;
};

struct SyntheticBatch {
  Generator generator = Generator::none;
  std::size_t original_rows = 0;
  std::array<std::size_t, 2> synthetic_per_class{0, 0};
  std::vector<RowOrigin> origins;

  std::size_t synthetic_rows() const { return synthetic_per_class[0] + synthetic_per_class[1]; }
};

struct AugmentedData {
  FeatureMatrix features;
  LabelVector labels;
  SyntheticBatch provenance;
  std::array<std::vector<EpochLoss>, 2> vae_loss_history;
  std::array<std::vector<GanEpochLoss>, 2> gan_loss_history;
};

// Fits a generator on the rows of one class and draws `count` rows.
using ClassSampler = std::function<FeatureMatrix(const FeatureMatrix& class_rows, int label,
                                                 std::size_t count, const RngStream& rng,
                                                 AugmentedData& out)>;

/// Shared per-class augmentation: synthetic counts proportional to the class
/// frequencies (largest remainder, exact total), synthetic rows appended after
/// the originals, class 0 first.
inline AugmentedData augment_per_class(const FeatureMatrix& features, const LabelVector& labels,
                                       std::int64_t n_synthetic, Generator generator,
                                       const ClassSampler& sampler, const RngStream& rng) {
  if (features.rows() != labels.size()) {
    throw std::invalid_argument("augment: features and labels differ in length");
  }
  if (n_synthetic < 0) throw std::invalid_argument("augment: n_synthetic must be nonnegative");
  const auto counts = class_counts(labels);
  if (counts[0] == 0 || counts[1] == 0) {
    throw std::invalid_argument("augment: both classes must be present");
  }

  AugmentedData out;
  out.features = features;
  out.labels = labels;
  out.provenance.generator = generator;
  out.provenance.original_rows = features.rows();
  out.provenance.origins.reserve(features.rows() + static_cast<std::size_t>(n_synthetic));
  for (std::size_t i = 0; i < features.rows(); ++i) out.provenance.origins.push_back({i});
  if (n_synthetic == 0) return out;

  const std::array<double, 2> weights{static_cast<double>(counts[0]), static_cast<double>(counts[1])};
  const auto per_class = largest_remainder(weights, static_cast<std::size_t>(n_synthetic));
  for (int c = 0; c < 2; ++c) {
    if (per_class[c] == 0) continue;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) idx.push_back(i);
    const FeatureMatrix rows = features.select_rows(idx);
    const FeatureMatrix synth =
        sampler(rows, c, per_class[c], rng.derive("class-" + std::to_string(c)), out);
    if (synth.rows() != per_class[c] || synth.cols() != features.cols() || !all_finite(synth)) {
      throw std::runtime_error("augment: generator produced an invalid batch for class " +
                               std::to_string(c));
    }
    out.features.append_rows(synth);
    out.labels.insert(out.labels.end(), per_class[c], c);
    out.provenance.origins.insert(out.provenance.origins.end(), per_class[c], RowOrigin{});
    out.provenance.synthetic_per_class[c] = per_class[c];
  }
  return out;
}

inline AugmentedData augment_with_gmm(const FeatureMatrix& features, const LabelVector& labels,
                                      std::int64_t n_synthetic, std::size_t components,
                                      const GmmConfig& config, const RngStream& rng) {
  ClassSampler sampler = [&](const FeatureMatrix& rows, int label, std::size_t count,
                             const RngStream& r, AugmentedData&) {
    std::size_t k = components;
    if (rows.rows() < k) {
      warn("gmm: class " + std::to_string(label) + " has " + std::to_string(rows.rows()) +
           " rows, reducing K to " + std::to_string(rows.rows()));
      k = rows.rows();
    }
    auto model = fit_gmm(rows, k, config, r.derive("fit"));
    model.class_label = label;
    return sample_gmm(model, static_cast<std::int64_t>(count), r.derive("sample"));
  };
  return augment_per_class(features, labels, n_synthetic, Generator::gmm, sampler, rng);
}

inline AugmentedData augment_with_vae(const FeatureMatrix& features, const LabelVector& labels,
                                      std::int64_t n_synthetic, const VaeConfig& config,
                                      const RngStream& rng) {
  ClassSampler sampler = [&](const FeatureMatrix& rows, int label, std::size_t count,
                             const RngStream& r, AugmentedData& out) {
    auto model = train_vae(rows, config, r.derive("fit"));
    model.class_label = label;
    out.vae_loss_history[static_cast<std::size_t>(label)] = model.loss_history;
    return sample_vae(model, static_cast<std::int64_t>(count), r.derive("sample"));
  };
  return augment_per_class(features, labels, n_synthetic, Generator::vae, sampler, rng);
}

inline AugmentedData augment_with_gan(const FeatureMatrix& features, const LabelVector& labels,
                                      std::int64_t n_synthetic, const GanConfig& config,
                                      const RngStream& rng) {
  ClassSampler sampler = [&](const FeatureMatrix& rows, int label, std::size_t count,
                             const RngStream& r, AugmentedData& out) {
    auto model = train_gan(rows, config, r.derive("fit"));
    model.class_label = label;
    out.gan_loss_history[static_cast<std::size_t>(label)] = model.loss_history;
    return sample_gan(model, static_cast<std::int64_t>(count), r.derive("sample"));
  };
  return augment_per_class(features, labels, n_synthetic, Generator::gan, sampler, rng);
}

}  // namespace augbench
