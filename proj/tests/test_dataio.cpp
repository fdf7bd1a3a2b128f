#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "augbench/dataio.hpp"
#include "augbench/log.hpp"
#include "support/temp_dir.hpp"

using namespace augbench;

namespace {

TableSchema ads_schema() {
  return {{{"User ID", ColumnKind::identifier},
           {"Gender", ColumnKind::categorical},
           {"Age", ColumnKind::numeric},
           {"EstimatedSalary", ColumnKind::numeric},
           {"Purchased", ColumnKind::label}}};
}

TableSchema small_schema() {
  return {{{"g", ColumnKind::categorical}, {"x", ColumnKind::numeric}, {"y", ColumnKind::label}}};
}

RawTable make_table(std::vector<std::vector<std::string>> rows) {
  RawTable t;
  t.column_names = {"g", "x", "y"};
  t.column_kinds = {ColumnKind::categorical, ColumnKind::numeric, ColumnKind::label};
  t.rows = std::move(rows);
  return t;
}

LabelVector labels_with(std::size_t zeros, std::size_t ones) {
  LabelVector y(zeros, 0);
  y.insert(y.end(), ones, 1);
  return y;
}

}  // namespace

TEST(LoadTable, FixtureHas400RowsAndNoDrops) {
  const auto t = load_table(testutil::fixture_path(), ads_schema());
  EXPECT_EQ(t.rows.size(), 400u);
  EXPECT_EQ(t.dropped_row_count, 0u);
  EXPECT_EQ(t.label_column(), 4u);
}

TEST(LoadTable, BlankNumericCellDropsTheRow) {
  testutil::TempDir dir;
  const auto path = dir.write("t.csv", "g,x,y\nA,1,0\nB,2,1\nA,,0\nB,4,1\n");
  const auto t = load_table(path, small_schema());
  EXPECT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.dropped_row_count, 1u);
}

TEST(LoadTable, DropsUndeclaredLabelsWrongArityAndBlankCategories) {
  testutil::TempDir dir;
  const auto path = dir.write("t.csv", "g,x,y\nA,1,0\nA,2,yes\nA,3\n,4,1\nB,abc,1\nB,5,1\n");
  const auto t = load_table(path, small_schema());
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.dropped_row_count, 4u);
}

TEST(LoadTable, DroppedPlusKeptEqualsDataLines) {
  testutil::TempDir dir;
  std::string text = "g,x,y\n";
  int lines = 0;
  for (int i = 0; i < 57; ++i, ++lines) text += (i % 7 == 3 ? "A,nan-ish,1\n" : "B," + std::to_string(i) + ",0\n");
  const auto t = load_table(dir.write("t.csv", text), small_schema());
  EXPECT_EQ(t.rows.size() + t.dropped_row_count, static_cast<std::size_t>(lines));
}

TEST(LoadTable, Errors) {
  testutil::TempDir dir;
  try {
    load_table(dir.write("e.csv", "g,x,y\n"), small_schema());
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("zero usable rows"), std::string::npos);
  }
  const std::string missing = (dir.path() / "nope.csv").string();
  try {
    load_table(missing, small_schema());
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find(missing), std::string::npos);
  }
  EXPECT_THROW(load_table(dir.write("h.csv", "g,z,y\nA,1,0\n"), small_schema()), std::invalid_argument);
  EXPECT_THROW(load_table(dir.write("w.csv", "g,x\nA,1\n"), small_schema()), std::invalid_argument);
  auto two = small_schema();
  two.columns[0].kind = ColumnKind::label;
  EXPECT_THROW(load_table(dir.write("ok.csv", "g,x,y\n0,1,0\n"), two), std::invalid_argument);
}

TEST(Preprocess, PopulationStdAndFirstAppearanceCategories) {
  const auto t = make_table({{"Male", "0", "0"}, {"Female", "10", "1"}, {"Male", "10", "1"}});
  auto two_point = make_table({{"Male", "0", "0"}, {"Female", "10", "1"}});
  const auto plan = fit_preprocess(two_point);
  ASSERT_EQ(plan.feature_order.size(), 2u);
  EXPECT_DOUBLE_EQ(plan.feature_order[1].mean, 5.0);
  EXPECT_DOUBLE_EQ(plan.feature_order[1].stddev, 5.0);
  const auto plan3 = fit_preprocess(t);
  EXPECT_EQ(plan3.feature_order[0].categories, (std::vector<std::string>{"Male", "Female"}));
  EXPECT_EQ(plan3.n_features(), 3u);
  EXPECT_EQ(plan3.feature_names(), (std::vector<std::string>{"g=Male", "g=Female", "x"}));
}

TEST(Preprocess, ConstantColumnIsExcludedAndReported) {
  ScopedWarningCapture cap;
  const auto plan = fit_preprocess(make_table({{"A", "7", "0"}, {"B", "7", "1"}, {"A", "7", "1"}}));
  EXPECT_EQ(plan.excluded_columns, (std::vector<std::string>{"x"}));
  EXPECT_EQ(plan.n_features(), 2u);
  EXPECT_TRUE(cap.contains("zero variance"));
  EXPECT_THROW(fit_preprocess(make_table({{"A", "7", "0"}, {"A", "7", "1"}})), std::invalid_argument);
}

TEST(Preprocess, ApplyZScoresAndOneHots) {
  const auto plan = fit_preprocess(make_table({{"Male", "0", "0"}, {"Female", "10", "1"}}));
  ScopedWarningCapture cap;
  const auto d = apply_preprocess(make_table({{"Male", "10", "1"}, {"Other", "5", "0"}, {"Other", "0", "0"}}), plan);
  EXPECT_EQ(d.features(0, 0), 1.0);
  EXPECT_EQ(d.features(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(d.features(0, 2), 1.0);
  EXPECT_EQ(d.features(1, 0), 0.0);
  EXPECT_EQ(d.features(1, 1), 0.0);
  EXPECT_EQ(d.labels, (LabelVector{1, 0, 0}));
  EXPECT_EQ(cap.messages().size(), 1u);
  EXPECT_TRUE(cap.contains("Other"));

  auto other = make_table({{"Male", "1", "0"}});
  other.column_names[1] = "renamed";
  EXPECT_THROW(apply_preprocess(other, plan), std::invalid_argument);
}

TEST(Preprocess, FittingRowsAreStandardizedAndOneHotRowsSumToOne) {
  RngStream rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<std::string>> rows;
    const std::size_t n = 5 + rng.below(60);
    const char* cats[] = {"a", "b", "c"};
    for (std::size_t i = 0; i < n; ++i)
      rows.push_back({cats[i < 2 ? i : rng.below(3)], std::to_string(rng.normal() * 40 + 3), std::to_string(i % 2)});
    const auto table = make_table(rows);
    const auto plan = fit_preprocess(table);
    const auto d = apply_preprocess(table, plan);
    const auto& num = plan.feature_order.back();
    double s = 0.0, ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += d.features(r, num.offset);
    for (std::size_t r = 0; r < n; ++r) ss += std::pow(d.features(r, num.offset) - s / n, 2);
    EXPECT_NEAR(s / n, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(ss / n), 1.0, 1e-9);
    const auto& cat = plan.feature_order.front();
    for (std::size_t r = 0; r < n; ++r) {
      double block = 0.0;
      for (std::size_t k = 0; k < cat.width(); ++k) block += d.features(r, cat.offset + k);
      EXPECT_EQ(block, 1.0);
    }
  }
}

TEST(Split, SixtyFortyGivesFifteenTen) {
  const auto y = labels_with(60, 40);
  const auto s = stratified_split(y, 0.25, RngStream(1));
  const auto test_counts = class_counts(select_labels(y, s.test_indices));
  EXPECT_EQ(test_counts[0], 15u);
  EXPECT_EQ(test_counts[1], 10u);
  const auto again = stratified_split(y, 0.25, RngStream(1));
  EXPECT_EQ(s.train_indices, again.train_indices);
  EXPECT_EQ(s.test_indices, again.test_indices);
  EXPECT_NE(s.test_indices, stratified_split(y, 0.25, RngStream(2)).test_indices);
}

TEST(Split, FixtureSplitsThreeHundredToOneHundred) {
  // Independent count: round(0.25 * 400) = 100 test rows, the rest train.
  const auto t = load_table(testutil::fixture_path(), ads_schema());
  const auto s = stratified_split(table_labels(t), 0.25, RngStream(42));
  EXPECT_EQ(s.test_indices.size(), 100u);
  EXPECT_EQ(s.train_indices.size(), 300u);
}

TEST(Split, RandomTablesKeepInvariants) {
  RngStream rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t zeros = 2 + rng.below(80), ones = 2 + rng.below(80);
    LabelVector y = labels_with(zeros, ones);
    rng.shuffle(y);
    const double frac = rng.uniform(0.2, 0.5);
    SplitPair s;
    try {
      s = stratified_split(y, frac, rng.derive("t" + std::to_string(trial)));
    } catch (const std::invalid_argument&) {
      continue;  // a class got no train or no test row
    }
    std::set<std::size_t> all(s.train_indices.begin(), s.train_indices.end());
    for (auto i : s.test_indices) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), y.size());
    const auto tc = class_counts(select_labels(y, s.test_indices));
    const double n_test = static_cast<double>(s.test_indices.size());
    const double global = static_cast<double>(ones) / static_cast<double>(y.size());
    EXPECT_LE(std::abs(tc[1] / n_test - global), 1.0 / n_test + 1e-12);
    EXPECT_LT(std::abs(tc[1] - global * n_test), 1.0);
  }
}

TEST(Split, Errors) {
  EXPECT_THROW(stratified_split(labels_with(10, 1), 0.25, RngStream(1)), std::invalid_argument);
  EXPECT_THROW(stratified_split(labels_with(10, 10), 1.0, RngStream(1)), std::invalid_argument);
  EXPECT_THROW(stratified_split(labels_with(10, 10), 0.01, RngStream(1)), std::invalid_argument);
  EXPECT_THROW(stratified_split(FeatureMatrix(3, 1), labels_with(10, 10), 0.25, RngStream(1)),
               std::invalid_argument);
}

TEST(FeatureCsv, RoundsOneHotBlocksOnExport) {
  const auto plan = fit_preprocess(make_table({{"Male", "0", "0"}, {"Female", "10", "1"}}));
  const FeatureMatrix x = FeatureMatrix::from_rows({{0.3, 0.6, 1.5}});
  std::ostringstream rounded, raw;
  write_feature_csv(rounded, x, {1}, plan);
  write_feature_csv(raw, x, {1}, plan, false);
  EXPECT_EQ(rounded.str(), "g=Male,g=Female,x,y\n0,1,1.5,1\n");
  EXPECT_EQ(raw.str(), "g=Male,g=Female,x,y\n0.29999999999999999,0.59999999999999998,1.5,1\n");
}
