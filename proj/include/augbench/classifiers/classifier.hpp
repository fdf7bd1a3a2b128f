#pragma once

#include <array>
#include <cstddef>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "augbench/classifiers/cross_validation.hpp"
#include "augbench/classifiers/dense_net.hpp"
#include "augbench/classifiers/knn.hpp"
#include "augbench/classifiers/linear.hpp"
#include "augbench/classifiers/prediction.hpp"
#include "augbench/classifiers/rbf_svm.hpp"
#include "augbench/classifiers/tree.hpp"

namespace augbench {

enum class ClassifierKind { decision_tree, knn, logistic, svm_rbf, svm_linear, dense_net };

inline constexpr std::array<ClassifierKind, 6> kAllClassifiers{
    ClassifierKind::decision_tree, ClassifierKind::knn,        ClassifierKind::logistic,
    ClassifierKind::svm_rbf,       ClassifierKind::svm_linear, ClassifierKind::dense_net};

inline std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::decision_tree: return "decision_tree";
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::logistic: return "logistic";
    case ClassifierKind::svm_rbf: return "svm_rbf";
    case ClassifierKind::svm_linear: return "svm_linear";
    case ClassifierKind::dense_net: return "dense_net";
  }
  return "?";
}

inline std::string_view display_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::decision_tree: return "Decision Tree";
    case ClassifierKind::knn: return "KNN";
    case ClassifierKind::logistic: return "Logistic Regression";
    case ClassifierKind::svm_rbf: return "SVM (RBF)";
    case ClassifierKind::svm_linear: return "SVM Linear";
    case ClassifierKind::dense_net: return "Dense Network";
  }
  return "?";
}

inline ClassifierKind parse_classifier(std::string_view s) {
  for (auto k : kAllClassifiers)
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown classifier '" + std::string(s) + "'");
}

using ClassifierModel = std::variant<DecisionTree, KnnModel, LinearModel, RbfSvmModel, DenseNetModel>;

inline std::vector<ScoredPrediction> predict(const ClassifierModel& model, const FeatureMatrix& x) {
  return std::visit([&](const auto& m) { return predict(m, x); }, model);
}

inline double model_threshold(const ClassifierModel& model) {
  return std::visit(
      [](const auto& m) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LinearModel>) {
          return m.threshold();
        } else {
          return std::decay_t<decltype(m)>::threshold;
        }
      },
      model);
}

/// Tuning grids, each ordered from the simplest setting to the most complex
/// (cross-validation ties resolve toward the front).
struct ClassifierSettings {
  std::size_t cv_folds = 5;
  std::vector<int> tree_depths{2, 3, 4, 5, 6, 8, -1};
  std::vector<std::size_t> knn_ks{1, 3, 5, 7, 9, 11};
  KnnWeighting knn_weighting = KnnWeighting::inverse_distance;
  std::vector<double> logistic_lambdas{1.0, 0.1, 0.01, 0.0};
  LogisticConfig logistic;
  std::vector<double> svm_linear_lambdas{1.0, 0.1, 0.01, 0.001};
  LinearSvmConfig svm_linear;
  std::vector<double> svm_rbf_cs{0.1, 1.0, 10.0};
  RbfSvmConfig svm_rbf;
  DenseNetConfig dense;
};

struct FittedClassifier {
  ClassifierKind kind = ClassifierKind::decision_tree;
  ClassifierModel model;
  std::string hyperparameters;  // "key=value;key=value"
  std::string cv_table;
};

namespace detail {

inline std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

template <typename Hp, typename Fmt>
std::string cv_table(const CvResult<Hp>& cv, std::span<const Hp> grid, Fmt&& fmt) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    os << (g == cv.best_index ? "* " : "  ") << fmt(grid[g]) << "  mean=" << cv.mean_scores[g]
       << "  folds=[";
    for (std::size_t f = 0; f < cv.fold_scores[g].size(); ++f) os << (f ? " " : "") << cv.fold_scores[g][f];
    os << "]\n";
  }
  return os.str();
}

}  // namespace detail

/// Fits one classifier, choosing its tuned hyperparameter by stratified CV
/// (the dense network has no grid and is fitted directly).
inline FittedClassifier fit_classifier(ClassifierKind kind, const FeatureMatrix& x,
                                       const LabelVector& y, const ClassifierSettings& s,
                                       const RngStream& rng) {
  FittedClassifier out;
  out.kind = kind;
  const auto cv_rng = rng.derive("cv");
  using detail::format_number;
  switch (kind) {
    case ClassifierKind::decision_tree: {
      std::span<const int> grid(s.tree_depths);
      auto cv = cross_validate<int>(
          [](int depth, const FeatureMatrix& xt, const LabelVector& yt, const FeatureMatrix& xv, const RngStream&) {
            return labels_of(predict(fit_decision_tree(xt, yt, {.max_depth = depth}), xv));
          },
          x, y, s.cv_folds, grid, cv_rng);
      auto depth_text = [](int d) { return "max_depth=" + (d < 0 ? std::string("unbounded") : std::to_string(d)); };
      out.model = fit_decision_tree(x, y, {.max_depth = cv.best});
      out.hyperparameters = depth_text(cv.best);
      out.cv_table = detail::cv_table(cv, grid, depth_text);
      break;
    }
    case ClassifierKind::knn: {
      std::span<const std::size_t> grid(s.knn_ks);
      const auto w = s.knn_weighting;
      auto cv = cross_validate<std::size_t>(
          [w](std::size_t k, const FeatureMatrix& xt, const LabelVector& yt, const FeatureMatrix& xv,
              const RngStream&) { return labels_of(predict(fit_knn(xt, yt, k, w), xv)); },
          x, y, s.cv_folds, grid, cv_rng);
      out.model = fit_knn(x, y, cv.best, w);
      out.hyperparameters = "k=" + std::to_string(cv.best) + ";weighting=" + std::string(to_string(w));
      out.cv_table = detail::cv_table(cv, grid, [](std::size_t k) { return "k=" + std::to_string(k); });
      break;
    }
    case ClassifierKind::logistic: {
      std::span<const double> grid(s.logistic_lambdas);
      const auto base = s.logistic;
      auto cv = cross_validate<double>(
          [base](double lambda, const FeatureMatrix& xt, const LabelVector& yt, const FeatureMatrix& xv,
                 const RngStream&) {
            auto cfg = base;
            cfg.lambda = lambda;
            return labels_of(predict(fit_logistic(xt, yt, cfg), xv));
          },
          x, y, s.cv_folds, grid, cv_rng);
      auto cfg = base;
      cfg.lambda = cv.best;
      out.model = fit_logistic(x, y, cfg);
      out.hyperparameters = "lambda=" + format_number(cv.best);
      out.cv_table = detail::cv_table(cv, grid, [](double l) { return "lambda=" + format_number(l); });
      break;
    }
    case ClassifierKind::svm_rbf: {
      std::span<const double> grid(s.svm_rbf_cs);
      const auto base = s.svm_rbf;
      auto cv = cross_validate<double>(
          [base](double c, const FeatureMatrix& xt, const LabelVector& yt, const FeatureMatrix& xv,
                 const RngStream&) {
            auto cfg = base;
            cfg.c = c;
            return labels_of(predict(fit_rbf_svm(xt, yt, cfg), xv));
          },
          x, y, s.cv_folds, grid, cv_rng);
      auto cfg = base;
      cfg.c = cv.best;
      auto model = fit_rbf_svm(x, y, cfg);
      out.hyperparameters = "C=" + format_number(cv.best) + ";gamma=" + format_number(model.gamma);
      out.model = std::move(model);
      out.cv_table = detail::cv_table(cv, grid, [](double c) { return "C=" + format_number(c); });
      break;
    }
    case ClassifierKind::svm_linear: {
      std::span<const double> grid(s.svm_linear_lambdas);
      const auto base = s.svm_linear;
      auto cv = cross_validate<double>(
          [base](double lambda, const FeatureMatrix& xt, const LabelVector& yt, const FeatureMatrix& xv,
                 const RngStream&) {
            auto cfg = base;
            cfg.lambda = lambda;
            return labels_of(predict(fit_linear_svm(xt, yt, cfg), xv));
          },
          x, y, s.cv_folds, grid, cv_rng);
      auto cfg = base;
      cfg.lambda = cv.best;
      out.model = fit_linear_svm(x, y, cfg);
      out.hyperparameters = "lambda=" + format_number(cv.best);
      out.cv_table = detail::cv_table(cv, grid, [](double l) { return "lambda=" + format_number(l); });
      break;
    }
    case ClassifierKind::dense_net: {
      out.model = fit_dense_net(x, y, s.dense, rng.derive("fit"));
      std::string widths;
      for (auto h : s.dense.hidden) widths += (widths.empty() ? "" : "-") + std::to_string(h);
      out.hyperparameters = "hidden=" + widths + ";epochs=" + std::to_string(s.dense.epochs) +
                            ";lr=" + format_number(s.dense.learning_rate);
      out.cv_table = "  (no grid)\n";
      break;
    }
  }
  return out;
}

inline std::string model_summary(const FittedClassifier& fc) {
  std::ostringstream os;
  os << "classifier: " << to_string(fc.kind) << '\n'
     << "hyperparameters: " << fc.hyperparameters << '\n';
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DecisionTree>) {
          os << "depth: " << m.depth() << "\nleaves: " << m.leaf_count() << '\n';
        } else if constexpr (std::is_same_v<M, RbfSvmModel>) {
          os << "support_vectors: " << m.alpha.size() << "\nsmo_iterations: " << m.iterations
             << "\nconverged: " << (m.converged ? "yes" : "no") << '\n';
        } else if constexpr (std::is_same_v<M, LinearModel>) {
          os << std::setprecision(6) << "bias: " << m.bias << "\nweights:";
          for (double w : m.weights) os << ' ' << w;
          os << '\n';
        } else if constexpr (std::is_same_v<M, KnnModel>) {
          os << "stored_rows: " << m.features.rows() << '\n';
        } else {
          os << std::setprecision(6) << "final_loss: "
             << (m.loss_history.empty() ? 0.0 : m.loss_history.back()) << '\n';
        }
      },
      fc.model);
  os << "cross-validation:\n" << fc.cv_table;
  return os.str();
}

}  // namespace augbench
