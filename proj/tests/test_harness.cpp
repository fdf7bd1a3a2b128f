#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "augbench/augbench.hpp"
#include "support/temp_dir.hpp"

using namespace augbench;
using nlohmann::json;

namespace {

// Fixture config with small training budgets so a full grid runs quickly.
json quick_json(const std::string& out_dir) {
  return json{
      {"dataset", testutil::fixture_path()},
      {"columns",
       json::array({{{"name", "User ID"}, {"kind", "identifier"}},
                    {{"name", "Gender"}, {"kind", "categorical"}},
                    {{"name", "Age"}, {"kind", "numeric"}},
                    {{"name", "EstimatedSalary"}, {"kind", "numeric"}},
                    {{"name", "Purchased"}, {"kind", "label"}}})},
      {"label_values", {"0", "1"}},
      {"seed", 7},
      {"n_synthetic", 60},
      {"output_dir", out_dir},
      {"cv_folds", 3},
      {"vae", {{"hidden", 8}, {"epochs", 20}, {"learning_rate", 0.01}}},
      {"gan", {{"pretrain_epochs", 10}, {"epochs", 20}, {"discriminator_hidden", {8}}}},
      {"logistic", {{"epochs", 100}}},
      {"svm_linear", {{"epochs", 100}}},
      {"dense_net", {{"hidden", {8}}, {"epochs", 30}, {"learning_rate", 0.01}}},
  };
}

ExperimentConfig quick_config(const std::string& out_dir) { return parse_config(quick_json(out_dir)); }

std::string write_config(const testutil::TempDir& dir, const json& j, const std::string& name = "cfg.json") {
  return dir.write(name, j.dump(2));
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Config, ParsesFieldsAndResolvesPathsAgainstTheConfigFile) {
  testutil::TempDir dir;
  auto j = quick_json("out");
  j["dataset"] = "data.csv";
  j["augmenters"] = {"gan", "none"};
  j["classifiers"] = {"knn"};
  j["knn"] = {{"ks", {1, 5}}, {"weighting", "uniform"}};
  const auto cfg = load_config(write_config(dir, j));
  EXPECT_EQ(cfg.dataset, (dir.path() / "data.csv").string());
  EXPECT_EQ(cfg.output_dir, (dir.path() / "out").string());
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.n_synthetic, 60);
  EXPECT_EQ(cfg.augmenters, (std::vector<Generator>{Generator::gan, Generator::none}));
  EXPECT_EQ(cfg.classifiers, (std::vector<ClassifierKind>{ClassifierKind::knn}));
  EXPECT_EQ(cfg.classifier_settings.knn_ks, (std::vector<std::size_t>{1, 5}));
  EXPECT_EQ(cfg.classifier_settings.knn_weighting, KnnWeighting::uniform);
  EXPECT_EQ(cfg.vae.hidden, 8u);
  EXPECT_EQ(cfg.gan.generator.hidden, 8u);
  EXPECT_EQ(cfg.gan.epochs, 20);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  auto expect_error = [](json j, const std::string& needle) {
    try {
      parse_config(j);
      ADD_FAILURE() << "accepted: " << j.dump();
    } catch (const std::exception& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  auto j = quick_json("o");
  j["vae"]["epoch"] = 3;
  expect_error(j, "unknown key 'vae.epoch'");
  j = quick_json("o");
  j["sed"] = 1;
  expect_error(j, "unknown key 'sed'");
  j = quick_json("o");
  j["seed"] = "x";
  expect_error(j, "'seed' has the wrong type");
  j = quick_json("o");
  j["augmenters"] = {"gmm", "gmm"};
  expect_error(j, "duplicate augmenter");
  j = quick_json("o");
  j["test_fraction"] = 1.0;
  expect_error(j, "test_fraction");
  j = quick_json("o");
  j["classifiers"] = {"forest"};
  expect_error(j, "forest");
  testutil::TempDir dir;
  EXPECT_THROW(load_config(dir.write("bad.json", "{not json")), std::invalid_argument);
}

TEST(Config, DigestTracksEffectiveSettingsOnly) {
  const auto a = quick_config("one");
  auto b = quick_config("two");
  b.workers = 8;
  EXPECT_EQ(config_digest(a), config_digest(b));
  b.seed = 8;
  EXPECT_NE(config_digest(a), config_digest(b));
  EXPECT_EQ(config_digest(a).size(), 16u);
  EXPECT_EQ(parse_config(to_json(a)).classifier_settings.tree_depths, a.classifier_settings.tree_depths);
}

TEST(Config, SeedFlagBeatsEnvironmentBeatsFile) {
  auto cfg = quick_config("o");
  ::unsetenv("AUGBENCH_SEED");
  apply_seed_override(cfg, std::nullopt);
  EXPECT_EQ(cfg.seed, 7u);
  ::setenv("AUGBENCH_SEED", "99", 1);
  apply_seed_override(cfg, std::nullopt);
  EXPECT_EQ(cfg.seed, 99u);
  apply_seed_override(cfg, 5u);
  EXPECT_EQ(cfg.seed, 5u);
  ::setenv("AUGBENCH_SEED", "12abc", 1);
  EXPECT_THROW(apply_seed_override(cfg, std::nullopt), std::invalid_argument);
  ::unsetenv("AUGBENCH_SEED");
}

TEST(Results, CsvRoundTripsIncludingFailuresAndQuoting) {
  ReportBundle b;
  EvalResult ok;
  ok.augmenter = Generator::gmm;
  ok.classifier = ClassifierKind::knn;
  ok.test_acc = 0.1 + 0.2;
  ok.test_f1 = 2.0 / 3.0;
  ok.test_auc = 0.75;
  ok.train_acc = 1.0;
  ok.hyperparameters = "k=3;weighting=\"uniform\",x";
  ok.duration_ms = 12.5;
  EvalResult bad;
  bad.augmenter = Generator::gan;
  bad.classifier = ClassifierKind::dense_net;
  bad.error = "train_gan: non-finite loss";
  b.cells = {ok, bad};
  std::istringstream in(render_results_csv(b));
  const auto back = parse_results_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].test_acc, ok.test_acc);
  EXPECT_EQ(back[0].test_f1, ok.test_f1);
  EXPECT_EQ(back[0].hyperparameters, ok.hyperparameters);
  EXPECT_EQ(back[0].duration_ms, 12.5);
  EXPECT_FALSE(back[0].failed());
  EXPECT_TRUE(back[1].failed());
  EXPECT_EQ(*back[1].error, *bad.error);
  EXPECT_EQ(back[1].classifier, ClassifierKind::dense_net);
  std::istringstream wrong("a,b\n");
  EXPECT_THROW(parse_results_csv(wrong), std::invalid_argument);
}

TEST(Experiment, ReportMatchesTheConfiguredGrid) {
  testutil::TempDir dir;
  auto j = quick_json((dir.path() / "out").string());
  j["augmenters"] = {"none", "gmm"};
  j["classifiers"] = {"decision_tree", "logistic"};
  j["dump_models"] = true;
  j["export_synthetic"] = true;
  const auto cfg = parse_config(j);
  const auto b = run_experiment(cfg);
  ASSERT_EQ(b.cells.size(), 4u);
  EXPECT_EQ(b.failed_count(), 0u);
  EXPECT_FALSE(b.meta.contamination_detected);
  EXPECT_EQ(b.meta.train_rows + b.meta.test_rows, 400u);
  emit_report(b, cfg.output_dir, {cfg.export_synthetic, cfg.dump_models});
  const auto out = dir.path() / "out";
  const auto md = testutil::read_file(out / "report.md");
  EXPECT_NE(md.find("| Boost Option | Decision Tree Acc | Decision Tree F1 | Logistic Regression Acc |"),
            std::string::npos)
      << md;
  EXPECT_NE(md.find("| No boost |"), std::string::npos);
  EXPECT_NE(md.find("| GMM |"), std::string::npos);
  EXPECT_EQ(md.find("| VAE |"), std::string::npos);
  EXPECT_EQ(md.find("KNN"), std::string::npos);
  std::ifstream csv(out / "results.csv");
  const auto rows = parse_results_csv(csv);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].augmenter, Generator::none);
  EXPECT_EQ(rows[1].classifier, ClassifierKind::logistic);
  EXPECT_EQ(rows[2].augmenter, Generator::gmm);
  for (const auto& r : rows) EXPECT_EQ(r.duration_ms, 0.0);
  EXPECT_TRUE(std::filesystem::exists(out / "roc_gmm_logistic.csv"));
  EXPECT_TRUE(std::filesystem::exists(out / "models" / "none_decision_tree.txt"));
  EXPECT_EQ(count_lines(testutil::read_file(out / "synthetic_gmm.csv")), 61u);
  const auto meta = json::parse(testutil::read_file(out / "run_meta.json"));
  EXPECT_EQ(meta["rows_loaded"], 400);
  EXPECT_EQ(meta["synthetic_rows"]["gmm"], 60);
}

TEST(Experiment, NoBoostCellEqualsTrainingOnTheSplitDirectly) {
  testutil::TempDir dir;
  auto j = quick_json(dir.path().string());
  j["augmenters"] = {"none"};
  j["classifiers"] = {"knn", "decision_tree"};
  const auto cfg = parse_config(j);
  const auto b = run_experiment(cfg);
  const RngStream root(cfg.seed);
  const auto data = prepare_data(cfg, root);
  for (auto k : cfg.classifiers) {
    const auto fitted = fit_classifier(k, data.train.features, data.train.labels, cfg.classifier_settings,
                                       cell_stream(root, Generator::none, k));
    const auto pred = predict(fitted.model, data.test.features);
    const auto& c = b.cell(Generator::none, k);
    EXPECT_EQ(c.test_acc, accuracy(data.test.labels, labels_of(pred)));
    EXPECT_EQ(c.test_auc, roc_auc(data.test.labels, scores_of(pred)).auc);
    EXPECT_EQ(c.hyperparameters, fitted.hyperparameters);
  }
}

TEST(Experiment, ResultsAreIdenticalAcrossRunsAndWorkerCounts) {
  testutil::TempDir dir;
  auto cfg = quick_config((dir.path() / "a").string());
  cfg.workers = 1;
  emit_report(run_experiment(cfg), cfg.output_dir);
  auto again = cfg;
  again.output_dir = (dir.path() / "b").string();
  again.workers = 3;
  emit_report(run_experiment(again), again.output_dir);
  for (const char* f : {"results.csv", "report.md", "roc_gan_svm_rbf.csv"}) {
    EXPECT_EQ(testutil::read_file(dir.path() / "a" / f), testutil::read_file(dir.path() / "b" / f)) << f;
  }
}

TEST(Experiment, GeneratorFailureMarksItsCellsAndTheRestSurvive) {
  testutil::TempDir dir;
  auto j = quick_json((dir.path() / "out").string());
  j["augmenters"] = {"none", "vae"};
  j["classifiers"] = {"knn", "logistic"};
  j["vae"]["learning_rate"] = 1e300;
  const auto b = run_experiment(parse_config(j));
  EXPECT_EQ(b.failed_count(), 2u);
  EXPECT_FALSE(b.cell(Generator::none, ClassifierKind::knn).failed());
  EXPECT_TRUE(b.cell(Generator::vae, ClassifierKind::logistic).failed());
  const auto md = render_report_md(b);
  EXPECT_NE(md.find("n/a"), std::string::npos);
  EXPECT_NE(md.find("augmentation failed"), std::string::npos);
  const auto csv = render_results_csv(b);
  EXPECT_NE(csv.find("vae,knn,,,,,error=augmentation failed"), std::string::npos) << csv;

  const auto path = write_config(dir, j);
  const auto r = cli({"run", "--config", path});
  EXPECT_EQ(r.code, kExitPartial);
  EXPECT_NE(r.err.find("2 of 4 cells failed"), std::string::npos);
}

TEST(Experiment, MultiSeedWritesPerSeedAndMeanReports) {
  testutil::TempDir dir;
  auto j = quick_json((dir.path() / "out").string());
  j["augmenters"] = {"none", "gmm"};
  j["classifiers"] = {"decision_tree"};
  j["seeds"] = 3;
  const auto path = write_config(dir, j);
  const auto r = cli({"run", "--config", path});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto out = dir.path() / "out";
  for (int s : {7, 8, 9}) EXPECT_TRUE(std::filesystem::exists(out / ("seed-" + std::to_string(s)) / "results.csv"));
  EXPECT_EQ(count_lines(testutil::read_file(out / "results_by_seed.csv")), 7u);
  std::ifstream mean_csv(out / "results.csv");
  const auto mean = parse_results_csv(mean_csv);
  ASSERT_EQ(mean.size(), 2u);
  double sum = 0.0;
  for (int s : {7, 8, 9}) {
    std::ifstream one(out / ("seed-" + std::to_string(s)) / "results.csv");
    sum += parse_results_csv(one)[1].test_acc;
  }
  EXPECT_NEAR(mean[1].test_acc, sum / 3.0, 1e-12);
  EXPECT_NE(testutil::read_file(out / "report.md").find("Seeds: 7..9 (mean of 3 runs)"), std::string::npos);
}

TEST(Cli, ValidateReportsTheDatasetShape) {
  testutil::TempDir dir;
  const auto r = cli({"validate", "--config", write_config(dir, quick_json("o"))});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("config ok: 400 rows (0 dropped), 4 features, 4 x 6 cells"), std::string::npos) << r.out;
}

TEST(Cli, MissingConfigIsAOneLineError) {
  const auto r = cli({"validate", "--config", "/nonexistent/cfg.json"});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_EQ(count_lines(r.err), 1u);
  EXPECT_NE(r.err.find("/nonexistent/cfg.json"), std::string::npos);
  testutil::TempDir dir;
  auto j = quick_json("o");
  j["dataset"] = "/nonexistent/data.csv";
  const auto d = cli({"validate", "--config", write_config(dir, j)});
  EXPECT_EQ(d.code, kExitFailure);
  EXPECT_NE(d.err.find("/nonexistent/data.csv"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"run", "--config", "x.json", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({"run"}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"run", "--config", "x.json", "--workers", "0"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, AugmentWritesExactlyTheRequestedRows) {
  testutil::TempDir dir;
  auto j = quick_json((dir.path() / "aug").string());
  j["n_synthetic"] = 37;
  const auto path = write_config(dir, j);
  const auto r = cli({"augment", "--config", path, "--generator", "gmm"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("wrote 37 synthetic rows"), std::string::npos);
  const auto text = testutil::read_file(dir.path() / "aug" / "synthetic_gmm.csv");
  EXPECT_EQ(count_lines(text), 38u);
  EXPECT_EQ(text.substr(0, text.find('\n')), "Gender=Female,Gender=Male,Age,EstimatedSalary,Purchased");
  EXPECT_EQ(cli({"augment", "--config", path, "--generator", "none"}).code, kExitFailure);
  EXPECT_EQ(cli({"augment", "--config", path, "--generator", "smote"}).code, kExitFailure);
  const auto seeded = cli({"augment", "--config", path, "--generator", "gmm", "--seed", "8"});
  EXPECT_NE(testutil::read_file(dir.path() / "aug" / "synthetic_gmm.csv"), text);
  EXPECT_EQ(seeded.code, kExitOk);
}

TEST(Cli, BinaryRunsEndToEnd) {
  testutil::TempDir dir;
  auto j = quick_json((dir.path() / "bin").string());
  j["augmenters"] = {"none"};
  j["classifiers"] = {"knn"};
  const auto path = write_config(dir, j);
  const std::string cmd = std::string(AUGBENCH_CLI_PATH) + " run --config '" + path + "' > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "bin" / "report.md"));
  const std::string bad = std::string(AUGBENCH_CLI_PATH) + " run --nope 2> /dev/null";
  const int status = std::system(bad.c_str());
  EXPECT_EQ(WEXITSTATUS(status), kExitUsage);
}
