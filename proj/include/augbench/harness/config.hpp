#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "augbench/augment.hpp"
#include "augbench/classifiers/classifier.hpp"
#include "augbench/dataio.hpp"
#include "augbench/gan.hpp"
#include "augbench/gmm.hpp"
#include "augbench/vae.hpp"

namespace augbench {

/// Everything one benchmark run needs. Relative paths in the config file are
/// resolved against the directory holding the file.
struct ExperimentConfig {
  std::string dataset;
  TableSchema schema;
  std::uint64_t seed = 42;
  double test_fraction = 0.25;
  std::vector<Generator> augmenters{Generator::none, Generator::gmm, Generator::vae, Generator::gan};
  std::int64_t n_synthetic = 200;
  std::vector<ClassifierKind> classifiers{kAllClassifiers.begin(), kAllClassifiers.end()};
  std::string output_dir = "augbench-out";
  std::size_t workers = 1;
  int seeds = 1;
  bool record_timings = false;
  bool dump_models = false;
  bool export_synthetic = false;

  std::size_t gmm_components = 3;
  GmmConfig gmm;
  VaeConfig vae;
  GanConfig gan;
  ClassifierSettings classifier_settings;

  void validate() const {
    if (dataset.empty()) throw std::invalid_argument("config: 'dataset' is required");
    if (schema.columns.empty()) throw std::invalid_argument("config: 'columns' is required");
    if (augmenters.empty()) throw std::invalid_argument("config: 'augmenters' must not be empty");
    if (classifiers.empty()) throw std::invalid_argument("config: 'classifiers' must not be empty");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
      throw std::invalid_argument("config: 'test_fraction' must lie in (0, 1)");
    }
    if (n_synthetic < 0) throw std::invalid_argument("config: 'n_synthetic' must be nonnegative");
    if (workers < 1) throw std::invalid_argument("config: 'workers' must be at least 1");
    if (seeds < 1) throw std::invalid_argument("config: 'seeds' must be at least 1");
    if (gmm_components < 1) throw std::invalid_argument("config: 'gmm.components' must be at least 1");
    if (classifier_settings.cv_folds < 2) throw std::invalid_argument("config: 'cv_folds' must be at least 2");
    std::set<Generator> ga(augmenters.begin(), augmenters.end());
    std::set<ClassifierKind> cs(classifiers.begin(), classifiers.end());
    if (ga.size() != augmenters.size()) throw std::invalid_argument("config: duplicate augmenter");
    if (cs.size() != classifiers.size()) throw std::invalid_argument("config: duplicate classifier");
  }
};

namespace detail {

using json = nlohmann::json;

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw std::invalid_argument("config: '" + path_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config: '" + qualified(key) + "' has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw std::invalid_argument("config: unknown key '" + qualified(k) + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::ObjectReader;
  ExperimentConfig cfg;
  ObjectReader top(j, "");
  top.read("dataset", cfg.dataset);
  if (!cfg.dataset.empty() && std::filesystem::path(cfg.dataset).is_relative() && !base_dir.empty()) {
    cfg.dataset = (base_dir / cfg.dataset).lexically_normal().string();
  }
  if (const auto* cols = top.child("columns")) {
    if (!cols->is_array()) throw std::invalid_argument("config: 'columns' must be an array");
    for (const auto& c : *cols) {
      ObjectReader r(c, "columns[]");
      ColumnSpec spec;
      std::string kind;
      r.read("name", spec.name);
      r.read("kind", kind);
      r.finish();
      if (spec.name.empty()) throw std::invalid_argument("config: column without a name");
      spec.kind = parse_column_kind(kind);
      cfg.schema.columns.push_back(spec);
    }
  }
  top.read("label_values", cfg.schema.label_values);
  top.read("seed", cfg.seed);
  top.read("test_fraction", cfg.test_fraction);
  top.read("n_synthetic", cfg.n_synthetic);
  top.read("output_dir", cfg.output_dir);
  if (!cfg.output_dir.empty() && std::filesystem::path(cfg.output_dir).is_relative() && !base_dir.empty()) {
    cfg.output_dir = (base_dir / cfg.output_dir).lexically_normal().string();
  }
  top.read("workers", cfg.workers);
  top.read("seeds", cfg.seeds);
  top.read("record_timings", cfg.record_timings);
  top.read("dump_models", cfg.dump_models);
  top.read("export_synthetic", cfg.export_synthetic);
  top.read("cv_folds", cfg.classifier_settings.cv_folds);

  std::vector<std::string> names;
  if (top.child("augmenters")) {
    top.read("augmenters", names);
    cfg.augmenters.clear();
    for (const auto& n : names) cfg.augmenters.push_back(parse_generator(n));
  }
  if (top.child("classifiers")) {
    names.clear();
    top.read("classifiers", names);
    cfg.classifiers.clear();
    for (const auto& n : names) cfg.classifiers.push_back(parse_classifier(n));
  }

  if (const auto* g = top.child("gmm")) {
    ObjectReader r(*g, "gmm");
    r.read("components", cfg.gmm_components);
    r.read("covariance_floor", cfg.gmm.covariance_floor);
    r.read("tolerance", cfg.gmm.tolerance);
    r.read("max_iterations", cfg.gmm.max_iterations);
    r.read("bic_max_components", cfg.gmm.bic_max_components);
    r.finish();
  }
  if (const auto* v = top.child("vae")) {
    ObjectReader r(*v, "vae");
    r.read("hidden", cfg.vae.hidden);
    r.read("latent_dim", cfg.vae.latent_dim);
    r.read("epochs", cfg.vae.epochs);
    r.read("learning_rate", cfg.vae.learning_rate);
    r.read("beta", cfg.vae.beta);
    r.read("batch_size", cfg.vae.batch_size);
    r.read("logvar_clamp", cfg.vae.logvar_clamp);
    r.finish();
  }
  cfg.gan.generator = cfg.vae;
  if (const auto* g = top.child("gan")) {
    ObjectReader r(*g, "gan");
    r.read("pretrain_epochs", cfg.gan.pretrain_epochs);
    r.read("epochs", cfg.gan.epochs);
    r.read("learning_rate", cfg.gan.learning_rate);
    r.read("batch_size", cfg.gan.batch_size);
    r.read("discriminator_hidden", cfg.gan.discriminator_hidden);
    r.finish();
  }
  auto& cs = cfg.classifier_settings;
  if (const auto* t = top.child("decision_tree")) {
    ObjectReader r(*t, "decision_tree");
    r.read("depths", cs.tree_depths);
    r.finish();
  }
  if (const auto* k = top.child("knn")) {
    ObjectReader r(*k, "knn");
    std::string weighting = std::string(to_string(cs.knn_weighting));
    r.read("ks", cs.knn_ks);
    r.read("weighting", weighting);
    r.finish();
    if (weighting == "uniform") cs.knn_weighting = KnnWeighting::uniform;
    else if (weighting == "inverse_distance") cs.knn_weighting = KnnWeighting::inverse_distance;
    else throw std::invalid_argument("config: 'knn.weighting' must be uniform or inverse_distance");
  }
  if (const auto* l = top.child("logistic")) {
    ObjectReader r(*l, "logistic");
    r.read("lambdas", cs.logistic_lambdas);
    r.read("epochs", cs.logistic.epochs);
    r.read("learning_rate", cs.logistic.learning_rate);
    r.finish();
  }
  if (const auto* l = top.child("svm_linear")) {
    ObjectReader r(*l, "svm_linear");
    r.read("lambdas", cs.svm_linear_lambdas);
    r.read("epochs", cs.svm_linear.epochs);
    r.finish();
  }
  if (const auto* s = top.child("svm_rbf")) {
    ObjectReader r(*s, "svm_rbf");
    r.read("cs", cs.svm_rbf_cs);
    r.read("gamma", cs.svm_rbf.gamma);
    r.read("tolerance", cs.svm_rbf.tolerance);
    r.read("max_iterations", cs.svm_rbf.max_iterations);
    r.finish();
  }
  if (const auto* d = top.child("dense_net")) {
    ObjectReader r(*d, "dense_net");
    r.read("hidden", cs.dense.hidden);
    r.read("epochs", cs.dense.epochs);
    r.read("learning_rate", cs.dense.learning_rate);
    r.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

/// Canonical JSON of the effective configuration (sorted keys). The digest
/// covers everything that influences results, so output_dir and workers are
/// left out.
inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["dataset"] = std::filesystem::path(c.dataset).filename().string();
  for (const auto& col : c.schema.columns)
    j["columns"].push_back({{"name", col.name}, {"kind", std::string(to_string(col.kind))}});
  j["label_values"] = c.schema.label_values;
  j["seed"] = c.seed;
  j["test_fraction"] = c.test_fraction;
  j["n_synthetic"] = c.n_synthetic;
  j["seeds"] = c.seeds;
  for (auto g : c.augmenters) j["augmenters"].push_back(std::string(to_string(g)));
  for (auto k : c.classifiers) j["classifiers"].push_back(std::string(to_string(k)));
  j["gmm"] = {{"components", c.gmm_components},
              {"covariance_floor", c.gmm.covariance_floor},
              {"tolerance", c.gmm.tolerance},
              {"max_iterations", c.gmm.max_iterations},
              {"bic_max_components", c.gmm.bic_max_components}};
  j["vae"] = {{"hidden", c.vae.hidden},         {"latent_dim", c.vae.latent_dim},
              {"epochs", c.vae.epochs},         {"learning_rate", c.vae.learning_rate},
              {"beta", c.vae.beta},             {"batch_size", c.vae.batch_size},
              {"logvar_clamp", c.vae.logvar_clamp}};
  j["gan"] = {{"pretrain_epochs", c.gan.pretrain_epochs},
              {"epochs", c.gan.epochs},
              {"learning_rate", c.gan.learning_rate},
              {"batch_size", c.gan.batch_size},
              {"discriminator_hidden", c.gan.discriminator_hidden}};
  const auto& s = c.classifier_settings;
  j["cv_folds"] = s.cv_folds;
  j["decision_tree"] = {{"depths", s.tree_depths}};
  j["knn"] = {{"ks", s.knn_ks}, {"weighting", std::string(to_string(s.knn_weighting))}};
  j["logistic"] = {{"lambdas", s.logistic_lambdas},
                   {"epochs", s.logistic.epochs},
                   {"learning_rate", s.logistic.learning_rate}};
  j["svm_linear"] = {{"lambdas", s.svm_linear_lambdas}, {"epochs", s.svm_linear.epochs}};
  j["svm_rbf"] = {{"cs", s.svm_rbf_cs},
                  {"gamma", s.svm_rbf.gamma},
                  {"tolerance", s.svm_rbf.tolerance},
                  {"max_iterations", s.svm_rbf.max_iterations}};
  j["dense_net"] = {{"hidden", s.dense.hidden},
                    {"epochs", s.dense.epochs},
                    {"learning_rate", s.dense.learning_rate}};
  return j;
}

inline std::string config_digest(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(detail::fnv1a64(to_json(c).dump())));
  return buf;
}

}  // namespace augbench
