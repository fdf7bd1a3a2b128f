#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "augbench/augment.hpp"
#include "augbench/classifiers/classifier.hpp"
#include "augbench/dataio.hpp"
#include "augbench/harness/config.hpp"
#include "augbench/log.hpp"
#include "augbench/metrics.hpp"
#include "augbench/rng.hpp"

namespace augbench {

struct EvalResult {
  Generator augmenter = Generator::none;
  ClassifierKind classifier = ClassifierKind::decision_tree;
  double test_acc = 0.0;
  double test_f1 = 0.0;
  double test_auc = 0.0;
  double train_acc = 0.0;  // on the original (non-synthetic) training rows
  std::string hyperparameters;
  double duration_ms = 0.0;  // 0 unless timings are recorded
  std::optional<std::string> error;
  RocCurve roc;
  ConfusionCounts test_confusion;
  std::string model_summary;

  bool failed() const { return error.has_value(); }
};

struct RunMetadata {
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;  // more than one entry for aggregated bundles
  std::string config_digest;
  std::string started_at;
  std::string finished_at;
  std::string dataset;
  std::size_t rows_loaded = 0;
  std::size_t rows_dropped = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::array<std::size_t, 2> train_class_counts{0, 0};
  std::array<std::size_t, 2> test_class_counts{0, 0};
  std::vector<std::string> feature_names;
  std::vector<std::string> excluded_columns;
  bool contamination_detected = false;
  std::vector<std::string> warnings;
  std::map<std::string, double> wall_ms;  // "augment/<gen>" and "cell/<gen>/<clf>"
};

struct ReportBundle {
  std::vector<Generator> augmenters;
  std::vector<ClassifierKind> classifiers;
  std::vector<EvalResult> cells;  // augmenter-major
  RunMetadata meta;
  PreprocessPlan plan;
  std::map<Generator, AugmentedData> augmented;
  std::map<Generator, std::string> augment_errors;

  const EvalResult& cell(Generator g, ClassifierKind k) const {
    for (const auto& c : cells)
      if (c.augmenter == g && c.classifier == k) return c;
    throw std::out_of_range("no cell " + std::string(to_string(g)) + "/" + std::string(to_string(k)));
  }
  std::size_t failed_count() const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const EvalResult& c) { return c.failed(); }));
  }
};

/// Loaded table, shared split, and the preprocessed train/test sets. The
/// preprocessing plan is fitted on the training rows only.
struct PreparedData {
  RawTable table;
  SplitPair split;
  PreprocessPlan plan;
  Dataset train;
  Dataset test;
};

inline PreparedData prepare_data(const ExperimentConfig& config, const RngStream& root) {
  PreparedData p;
  p.table = load_table(config.dataset, config.schema);
  p.split = stratified_split(table_labels(p.table), config.test_fraction, root.derive("split"));
  const auto train_table = select_table_rows(p.table, p.split.train_indices);
  p.plan = fit_preprocess(train_table);
  p.train = apply_preprocess(train_table, p.plan);
  p.test = apply_preprocess(select_table_rows(p.table, p.split.test_indices), p.plan);
  return p;
}

inline AugmentedData augment_training_set(Generator g, const Dataset& train, const ExperimentConfig& config,
                                          const RngStream& rng) {
  switch (g) {
    case Generator::none:
      return augment_per_class(train.features, train.labels, 0, Generator::none, {}, rng);
    case Generator::gmm:
      return augment_with_gmm(train.features, train.labels, config.n_synthetic, config.gmm_components,
                              config.gmm, rng);
    case Generator::vae:
      return augment_with_vae(train.features, train.labels, config.n_synthetic, config.vae, rng);
    case Generator::gan:
      return augment_with_gan(train.features, train.labels, config.n_synthetic, config.gan, rng);
  }
  throw std::logic_error("unreachable generator");
}

inline RngStream augment_stream(const RngStream& root, Generator g) {
  return root.derive("augment").derive(to_string(g));
}

inline RngStream cell_stream(const RngStream& root, Generator g, ClassifierKind k) {
  return root.derive("cell").derive(to_string(g)).derive(to_string(k));
}

/// True when the split overlaps or an augmented set carries an original row
/// that does not come from the training side.
inline bool test_contamination(const SplitPair& split, std::size_t test_rows_evaluated,
                               const std::map<Generator, AugmentedData>& augmented) {
  std::set<std::size_t> test(split.test_indices.begin(), split.test_indices.end());
  for (auto i : split.train_indices)
    if (test.count(i)) return true;
  if (test_rows_evaluated != split.test_indices.size()) return true;
  for (const auto& [g, data] : augmented) {
    const auto& prov = data.provenance;
    if (prov.origins.size() != data.features.rows()) return true;
    for (const auto& o : prov.origins) {
      if (o.synthetic()) continue;
      if (o.source_row >= split.train_indices.size()) return true;
      if (test.count(split.train_indices[o.source_row])) return true;
    }
  }
  return false;
}

namespace detail {

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Runs task(i) for i in [0, n) on up to `workers` threads. Each task writes
// only its own slot, so the result does not depend on scheduling.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& task) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

class WarningRecorder {
 public:
  WarningRecorder() {
    previous_ = set_warning_sink([this](std::string_view m) {
      messages_.emplace_back(m);
      if (previous_) previous_(m);
      else std::cerr << "augbench: warning: " << m << '\n';
    });
  }
  ~WarningRecorder() { set_warning_sink(std::move(previous_)); }
  WarningRecorder(const WarningRecorder&) = delete;
  WarningRecorder& operator=(const WarningRecorder&) = delete;

  std::vector<std::string> sorted() const {
    auto out = messages_;
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<std::string> messages_;
  WarningSink previous_;
};

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

inline EvalResult evaluate_cell(Generator g, ClassifierKind k, const AugmentedData& train_set,
                                const Dataset& original_train, const Dataset& test,
                                const ExperimentConfig& config, const RngStream& rng) {
  EvalResult r;
  r.augmenter = g;
  r.classifier = k;
  const auto fitted = fit_classifier(k, train_set.features, train_set.labels, config.classifier_settings, rng);
  r.hyperparameters = fitted.hyperparameters;
  if (config.dump_models) r.model_summary = model_summary(fitted);

  const auto test_pred = predict(fitted.model, test.features);
  const auto test_labels = labels_of(test_pred);
  const auto test_scores = scores_of(test_pred);
  r.test_confusion = confusion(test.labels, test_labels);
  r.test_acc = accuracy(r.test_confusion);
  r.test_f1 = f1(r.test_confusion);
  r.roc = roc_auc(test.labels, test_scores);
  r.test_auc = r.roc.auc;
  r.train_acc = accuracy(original_train.labels, labels_of(predict(fitted.model, original_train.features)));
  return r;
}

/// One seed of the full augmenter x classifier grid. Failures are attached to
/// their cells; dataset-level failures (unloadable file, bad split) throw.
inline ReportBundle run_experiment(const ExperimentConfig& config) {
  config.validate();
  detail::WarningRecorder recorder;
  ReportBundle bundle;
  bundle.augmenters = config.augmenters;
  bundle.classifiers = config.classifiers;
  auto& meta = bundle.meta;
  meta.seed = config.seed;
  meta.seeds = {config.seed};
  meta.config_digest = config_digest(config);
  meta.started_at = detail::utc_timestamp();
  meta.dataset = config.dataset;

  const RngStream root(config.seed);
  const auto data = prepare_data(config, root);
  bundle.plan = data.plan;
  meta.rows_loaded = data.table.rows.size();
  meta.rows_dropped = data.table.dropped_row_count;
  meta.train_rows = data.train.labels.size();
  meta.test_rows = data.test.labels.size();
  meta.train_class_counts = class_counts(data.train.labels);
  meta.test_class_counts = class_counts(data.test.labels);
  meta.feature_names = data.plan.feature_names();
  meta.excluded_columns = data.plan.excluded_columns;

  const auto& gens = config.augmenters;
  std::vector<std::optional<AugmentedData>> aug(gens.size());
  std::vector<std::string> aug_error(gens.size());
  std::vector<double> aug_ms(gens.size(), 0.0);
  detail::parallel_for(gens.size(), config.workers, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    try {
      aug[i] = augment_training_set(gens[i], data.train, config, augment_stream(root, gens[i]));
    } catch (const std::exception& e) {
      aug_error[i] = e.what();
    }
    aug_ms[i] = detail::elapsed_ms(start);
  });
  for (std::size_t i = 0; i < gens.size(); ++i) {
    meta.wall_ms["augment/" + std::string(to_string(gens[i]))] = aug_ms[i];
    if (aug[i]) bundle.augmented.emplace(gens[i], std::move(*aug[i]));
    else bundle.augment_errors.emplace(gens[i], "augmentation failed: " + aug_error[i]);
  }

  const auto& clfs = config.classifiers;
  bundle.cells.resize(gens.size() * clfs.size());
  std::vector<double> cell_ms(bundle.cells.size(), 0.0);
  detail::parallel_for(bundle.cells.size(), config.workers, [&](std::size_t i) {
    const Generator g = gens[i / clfs.size()];
    const ClassifierKind k = clfs[i % clfs.size()];
    auto& slot = bundle.cells[i];
    const auto start = std::chrono::steady_clock::now();
    auto it = bundle.augmented.find(g);
    if (it == bundle.augmented.end()) {
      slot.augmenter = g;
      slot.classifier = k;
      slot.error = bundle.augment_errors.at(g);
      return;
    }
    try {
      slot = evaluate_cell(g, k, it->second, data.train, data.test, config, cell_stream(root, g, k));
    } catch (const std::exception& e) {
      slot = EvalResult{};
      slot.augmenter = g;
      slot.classifier = k;
      slot.error = e.what();
    }
    cell_ms[i] = detail::elapsed_ms(start);
  });
  for (std::size_t i = 0; i < bundle.cells.size(); ++i) {
    auto& c = bundle.cells[i];
    meta.wall_ms["cell/" + std::string(to_string(c.augmenter)) + "/" + std::string(to_string(c.classifier))] =
        cell_ms[i];
    if (config.record_timings) c.duration_ms = cell_ms[i];
  }

  meta.contamination_detected = test_contamination(data.split, data.test.features.rows(), bundle.augmented);
  if (meta.contamination_detected) warn("test-set contamination detected");
  meta.finished_at = detail::utc_timestamp();
  meta.warnings = recorder.sorted();
  return bundle;
}

/// Seeds seed, seed+1, ..., seed+config.seeds-1.
inline std::vector<ReportBundle> run_experiment_seeds(const ExperimentConfig& config) {
  std::vector<ReportBundle> out;
  for (int s = 0; s < config.seeds; ++s) {
    auto c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(s);
    out.push_back(run_experiment(c));
  }
  return out;
}

/// Cell-wise mean over the successful seeds. A cell fails only when it failed
/// under every seed. Hyperparameters collapse to one value when all seeds
/// agree and to "varies" otherwise. No ROC curves are carried.
inline ReportBundle aggregate_bundles(const std::vector<ReportBundle>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate_bundles: no runs");
  ReportBundle out;
  out.augmenters = runs.front().augmenters;
  out.classifiers = runs.front().classifiers;
  out.plan = runs.front().plan;
  out.meta = runs.front().meta;
  out.meta.seeds.clear();
  out.meta.wall_ms.clear();
  out.meta.warnings.clear();
  for (const auto& r : runs) {
    out.meta.seeds.push_back(r.meta.seed);
    out.meta.contamination_detected = out.meta.contamination_detected || r.meta.contamination_detected;
    out.meta.finished_at = r.meta.finished_at;
  }
  for (std::size_t i = 0; i < runs.front().cells.size(); ++i) {
    EvalResult agg;
    agg.augmenter = runs.front().cells[i].augmenter;
    agg.classifier = runs.front().cells[i].classifier;
    std::size_t ok = 0;
    std::set<std::string> hps;
    for (const auto& r : runs) {
      const auto& c = r.cells.at(i);
      if (c.failed()) {
        if (!agg.error) agg.error = "seed " + std::to_string(r.meta.seed) + ": " + *c.error;
        continue;
      }
      ++ok;
      agg.test_acc += c.test_acc;
      agg.test_f1 += c.test_f1;
      agg.test_auc += c.test_auc;
      agg.train_acc += c.train_acc;
      agg.duration_ms += c.duration_ms;
      hps.insert(c.hyperparameters);
    }
    if (ok > 0) {
      const double n = static_cast<double>(ok);
      agg.test_acc /= n;
      agg.test_f1 /= n;
      agg.test_auc /= n;
      agg.train_acc /= n;
      agg.duration_ms /= n;
      agg.hyperparameters = hps.size() == 1 ? *hps.begin() : "varies";
      agg.error.reset();
    }
    out.cells.push_back(std::move(agg));
  }
  return out;
}

}  // namespace augbench
