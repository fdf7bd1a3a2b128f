#include <gtest/gtest.h>

#include <cmath>

#include "augbench/augment.hpp"

using namespace augbench;

namespace {

// Rows of class c are filled with c + 10 so their origin is visible.
ClassSampler marker_sampler() {
  return [](const FeatureMatrix& rows, int label, std::size_t count, const RngStream&, AugmentedData&) {
    FeatureMatrix out(count, rows.cols());
    for (auto& v : out.values()) v = label + 10.0;
    return out;
  };
}

void make_data(std::size_t zeros, std::size_t ones, FeatureMatrix& x, LabelVector& y) {
  x = FeatureMatrix(zeros + ones, 2);
  y.assign(zeros, 0);
  y.insert(y.end(), ones, 1);
  for (std::size_t i = 0; i < x.rows(); ++i) x(i, 0) = static_cast<double>(i), x(i, 1) = -1.0;
}

}  // namespace

TEST(Augment, GeneratorNamesRoundTrip) {
  for (auto g : {Generator::none, Generator::gmm, Generator::vae, Generator::gan})
    EXPECT_EQ(parse_generator(to_string(g)), g);
  EXPECT_THROW(parse_generator("smote"), std::invalid_argument);
}

TEST(Augment, ZeroSyntheticRowsIsTheIdentity) {
  FeatureMatrix x;
  LabelVector y;
  make_data(7, 5, x, y);
  const auto out = augment_per_class(x, y, 0, Generator::gmm, marker_sampler(), RngStream(1));
  EXPECT_EQ(out.features, x);
  EXPECT_EQ(out.labels, y);
  EXPECT_EQ(out.provenance.synthetic_rows(), 0u);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(out.provenance.origins[i].source_row, i);
}

TEST(Augment, CountsAreProportionalAndExact) {
  RngStream rng(12);
  for (int t = 0; t < 200; ++t) {
    const std::size_t zeros = 1 + rng.below(150), ones = 1 + rng.below(150);
    const auto n = static_cast<std::int64_t>(rng.below(400));
    FeatureMatrix x;
    LabelVector y;
    make_data(zeros, ones, x, y);
    const auto out = augment_per_class(x, y, n, Generator::vae, marker_sampler(), RngStream(t));
    const auto& per = out.provenance.synthetic_per_class;
    EXPECT_EQ(per[0] + per[1], static_cast<std::size_t>(n));
    const double share = static_cast<double>(n) * zeros / static_cast<double>(zeros + ones);
    EXPECT_LT(std::abs(static_cast<double>(per[0]) - share), 1.0);
    const auto counts = class_counts(out.labels);
    EXPECT_EQ(counts[0], zeros + per[0]);
    EXPECT_EQ(counts[1], ones + per[1]);
  }
}

TEST(Augment, OriginalsFirstThenClassZeroThenClassOne) {
  FeatureMatrix x;
  LabelVector y;
  make_data(180, 120, x, y);
  const auto out = augment_per_class(x, y, 200, Generator::gan, marker_sampler(), RngStream(1));
  ASSERT_EQ(out.features.rows(), 500u);
  EXPECT_EQ(out.provenance.original_rows, 300u);
  EXPECT_EQ(out.provenance.synthetic_per_class[0], 120u);
  EXPECT_EQ(out.provenance.synthetic_per_class[1], 80u);
  for (std::size_t i = 0; i < 300; ++i) {
    EXPECT_EQ(out.provenance.origins[i].source_row, i);
    EXPECT_EQ(out.features(i, 0), x(i, 0));
  }
  for (std::size_t i = 300; i < 500; ++i) {
    const int c = i < 420 ? 0 : 1;
    EXPECT_TRUE(out.provenance.origins[i].synthetic());
    EXPECT_EQ(out.labels[i], c);
    EXPECT_EQ(out.features(i, 0), c + 10.0);
  }
}

TEST(Augment, SamplerSeesOnlyItsClassAndADerivedStream) {
  FeatureMatrix x;
  LabelVector y;
  make_data(4, 6, x, y);
  std::vector<std::string> paths;
  ClassSampler spy = [&](const FeatureMatrix& rows, int label, std::size_t count, const RngStream& r,
                         AugmentedData&) {
    for (std::size_t i = 0; i < rows.rows(); ++i) EXPECT_EQ(y[static_cast<std::size_t>(rows(i, 0))], label);
    EXPECT_EQ(rows.rows(), label == 0 ? 4u : 6u);
    paths.push_back(r.path_string());
    return FeatureMatrix(count, rows.cols());
  };
  augment_per_class(x, y, 10, Generator::gmm, spy, RngStream(3));
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_NE(paths[0], paths[1]);
  EXPECT_NE(paths[0].find("class-0"), std::string::npos);
}

TEST(Augment, InvalidInputsAndBatches) {
  FeatureMatrix x;
  LabelVector y;
  make_data(4, 6, x, y);
  EXPECT_THROW(augment_per_class(x, y, -1, Generator::gmm, marker_sampler(), RngStream(1)), std::invalid_argument);
  LabelVector short_y(y.begin(), y.end() - 1);
  EXPECT_THROW(augment_per_class(x, short_y, 5, Generator::gmm, marker_sampler(), RngStream(1)),
               std::invalid_argument);
  LabelVector one_class(y.size(), 1);
  EXPECT_THROW(augment_per_class(x, one_class, 5, Generator::gmm, marker_sampler(), RngStream(1)),
               std::invalid_argument);
  ClassSampler wrong = [](const FeatureMatrix& rows, int, std::size_t count, const RngStream&, AugmentedData&) {
    return FeatureMatrix(count + 1, rows.cols());
  };
  EXPECT_THROW(augment_per_class(x, y, 5, Generator::gmm, wrong, RngStream(1)), std::runtime_error);
  ClassSampler nan = [](const FeatureMatrix& rows, int, std::size_t count, const RngStream&, AugmentedData&) {
    FeatureMatrix out(count, rows.cols());
    out.values()[0] = std::nan("");
    return out;
  };
  EXPECT_THROW(augment_per_class(x, y, 5, Generator::gmm, nan, RngStream(1)), std::runtime_error);
}

TEST(Augment, NeuralGeneratorsKeepTheirLossHistories) {
  RngStream rng(5);
  FeatureMatrix x(40, 2);
  for (auto& v : x.values()) v = rng.normal();
  LabelVector y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = static_cast<int>(i % 2);
  VaeConfig vcfg;
  vcfg.epochs = 5;
  const auto v = augment_with_vae(x, y, 10, vcfg, RngStream(1));
  EXPECT_EQ(v.vae_loss_history[0].size(), 6u);
  EXPECT_EQ(v.vae_loss_history[1].size(), 6u);
  EXPECT_EQ(v.provenance.generator, Generator::vae);
  GanConfig gcfg;
  gcfg.pretrain_epochs = 2;
  gcfg.epochs = 4;
  const auto g = augment_with_gan(x, y, 10, gcfg, RngStream(1));
  EXPECT_EQ(g.gan_loss_history[0].size(), 4u);
  EXPECT_EQ(g.features.rows(), 50u);
  EXPECT_EQ(augment_with_gan(x, y, 10, gcfg, RngStream(1)).features, g.features);
}
