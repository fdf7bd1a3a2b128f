#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "augbench/harness/experiment.hpp"

namespace augbench {

inline std::string_view boost_label(Generator g) {
  switch (g) {
    case Generator::none: return "No boost";
    case Generator::gmm: return "GMM";
    case Generator::vae: return "VAE";
    case Generator::gan: return "GAN";
  }
  return "?";
}

namespace detail {

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r' || c == '|') c = ' ';
  return s;
}

// Splits one CSV record, honouring double-quoted fields.
inline std::vector<std::string> parse_csv_record(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace detail

/// Markdown report: Acc/F1 column pairs per classifier with one row per boost
/// option, then AUC and train-accuracy tables and a table of failed cells.
inline std::string render_report_md(const ReportBundle& b) {
  std::ostringstream os;
  os << "# Augmentation benchmark\n\n";
  os << "Seed";
  if (b.meta.seeds.size() > 1) {
    os << "s: " << b.meta.seeds.front() << ".." << b.meta.seeds.back() << " (mean of " << b.meta.seeds.size()
       << " runs)";
  } else {
    os << ": " << b.meta.seed;
  }
  os << ". Config digest: `" << b.meta.config_digest << "`. Train rows: " << b.meta.train_rows
     << ", test rows: " << b.meta.test_rows << ".\n\n";

  auto cell_text = [&](const EvalResult& c, double EvalResult::*field) {
    return c.failed() ? std::string("n/a") : detail::fixed2(c.*field);
  };

  os << "## Classification accuracy and F1 score\n\n| Boost Option |";
  for (auto k : b.classifiers) os << ' ' << display_name(k) << " Acc | " << display_name(k) << " F1 |";
  os << "\n|---|";
  for (std::size_t i = 0; i < b.classifiers.size(); ++i) os << "---:|---:|";
  os << '\n';
  for (auto g : b.augmenters) {
    os << "| " << boost_label(g) << " |";
    for (auto k : b.classifiers) {
      const auto& c = b.cell(g, k);
      os << ' ' << cell_text(c, &EvalResult::test_acc) << " | " << cell_text(c, &EvalResult::test_f1) << " |";
    }
    os << '\n';
  }

  auto single_table = [&](const char* title, double EvalResult::*field) {
    os << "\n## " << title << "\n\n| Boost Option |";
    for (auto k : b.classifiers) os << ' ' << display_name(k) << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < b.classifiers.size(); ++i) os << "---:|";
    os << '\n';
    for (auto g : b.augmenters) {
      os << "| " << boost_label(g) << " |";
      for (auto k : b.classifiers) os << ' ' << cell_text(b.cell(g, k), field) << " |";
      os << '\n';
    }
  };
  single_table("Test AUC", &EvalResult::test_auc);
  single_table("Train accuracy (original training rows)", &EvalResult::train_acc);

  os << "\n## Failed cells\n\n";
  if (b.failed_count() == 0) {
    os << "None.\n";
  } else {
    os << "| Boost Option | Classifier | Error |\n|---|---|---|\n";
    for (const auto& c : b.cells)
      if (c.failed())
        os << "| " << boost_label(c.augmenter) << " | " << display_name(c.classifier) << " | "
           << detail::one_line(*c.error) << " |\n";
  }
  if (b.meta.contamination_detected) os << "\n**Test-set contamination detected.**\n";
  return os.str();
}

inline constexpr const char* kResultsHeader =
    "augmenter,classifier,test_acc,test_f1,test_auc,train_acc,hyperparams,duration_ms";

// Failed cells leave the metric fields empty and carry "error=<message>" in
// the hyperparams field.
inline std::string render_results_row(const EvalResult& c) {
  std::string row = std::string(to_string(c.augmenter)) + "," + std::string(to_string(c.classifier)) + ",";
  if (c.failed()) {
    row += ",,,," + detail::csv_field("error=" + detail::one_line(*c.error)) + ",";
  } else {
    row += detail::exact(c.test_acc) + "," + detail::exact(c.test_f1) + "," + detail::exact(c.test_auc) + "," +
           detail::exact(c.train_acc) + "," + detail::csv_field(c.hyperparameters) + ",";
  }
  return row + detail::exact(c.duration_ms);
}

inline std::string render_results_csv(const ReportBundle& b) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& c : b.cells) out += render_results_row(c) + "\n";
  return out;
}

inline std::vector<EvalResult> parse_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw std::invalid_argument("results.csv: unexpected header");
  }
  std::vector<EvalResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::parse_csv_record(line);
    if (f.size() != 8) throw std::invalid_argument("results.csv: expected 8 fields in '" + line + "'");
    EvalResult r;
    r.augmenter = parse_generator(f[0]);
    r.classifier = parse_classifier(f[1]);
    if (f[2].empty()) {
      r.error = f[6].rfind("error=", 0) == 0 ? f[6].substr(6) : f[6];
    } else {
      r.test_acc = std::stod(f[2]);
      r.test_f1 = std::stod(f[3]);
      r.test_auc = std::stod(f[4]);
      r.train_acc = std::stod(f[5]);
      r.hyperparameters = f[6];
    }
    r.duration_ms = std::stod(f[7]);
    out.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::json run_meta_json(const ReportBundle& b) {
  const auto& m = b.meta;
  nlohmann::json j;
  j["seed"] = m.seed;
  j["seeds"] = m.seeds;
  j["config_digest"] = m.config_digest;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["dataset"] = m.dataset;
  j["rows_loaded"] = m.rows_loaded;
  j["rows_dropped"] = m.rows_dropped;
  j["train_rows"] = m.train_rows;
  j["test_rows"] = m.test_rows;
  j["train_class_counts"] = m.train_class_counts;
  j["test_class_counts"] = m.test_class_counts;
  j["feature_names"] = m.feature_names;
  j["excluded_columns"] = m.excluded_columns;
  j["contamination_detected"] = m.contamination_detected;
  j["warnings"] = m.warnings;
  j["wall_ms"] = m.wall_ms;
  j["cells"] = b.cells.size();
  j["failed_cells"] = b.failed_count();
  for (const auto& [g, data] : b.augmented) {
    j["synthetic_rows"][std::string(to_string(g))] = data.provenance.synthetic_rows();
  }
  return j;
}

struct EmitOptions {
  bool export_synthetic = false;
  bool dump_models = false;
};

inline void write_synthetic_files(const std::filesystem::path& dir, Generator g, const AugmentedData& data,
                                  const PreprocessPlan& plan) {
  const std::string name(to_string(g));
  const auto first = data.provenance.original_rows;
  std::vector<std::size_t> idx;
  for (std::size_t i = first; i < data.features.rows(); ++i) idx.push_back(i);
  std::ostringstream os;
  write_feature_csv(os, data.features.select_rows(idx), select_labels(data.labels, idx), plan);
  detail::write_text(dir / ("synthetic_" + name + ".csv"), os.str());
  for (int c = 0; c < 2; ++c) {
    const auto suffix = "_class" + std::to_string(c) + ".csv";
    if (!data.vae_loss_history[c].empty()) {
      std::ostringstream ls;
      write_loss_history_csv(ls, data.vae_loss_history[c]);
      detail::write_text(dir / ("loss_" + name + suffix), ls.str());
    }
    if (!data.gan_loss_history[c].empty()) {
      std::ostringstream ls;
      write_loss_history_csv(ls, data.gan_loss_history[c]);
      detail::write_text(dir / ("loss_" + name + suffix), ls.str());
    }
  }
}

/// Writes report.md, results.csv, one roc_<augmenter>_<classifier>.csv per
/// successful cell with a curve, and run_meta.json.
inline void emit_report(const ReportBundle& b, const std::filesystem::path& dir, const EmitOptions& opts = {}) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
  }
  detail::write_text(dir / "report.md", render_report_md(b));
  detail::write_text(dir / "results.csv", render_results_csv(b));
  for (const auto& c : b.cells) {
    if (c.failed() || c.roc.points.empty()) continue;
    std::ostringstream os;
    write_roc_csv(os, c.roc);
    detail::write_text(dir / ("roc_" + std::string(to_string(c.augmenter)) + "_" +
                              std::string(to_string(c.classifier)) + ".csv"),
                       os.str());
  }
  if (opts.dump_models) {
    std::filesystem::create_directories(dir / "models");
    for (const auto& c : b.cells) {
      if (c.model_summary.empty()) continue;
      detail::write_text(dir / "models" /
                             (std::string(to_string(c.augmenter)) + "_" + std::string(to_string(c.classifier)) +
                              ".txt"),
                         c.model_summary);
    }
  }
  if (opts.export_synthetic) {
    for (const auto& [g, data] : b.augmented)
      if (g != Generator::none) write_synthetic_files(dir, g, data, b.plan);
  }
  detail::write_text(dir / "run_meta.json", run_meta_json(b).dump(2) + "\n");
}

/// Multi-seed layout: per-seed reports under seed-<S>/, the cell-wise mean at
/// the top level, and every per-seed row in results_by_seed.csv.
inline void emit_multi_seed_report(const std::vector<ReportBundle>& runs, const std::filesystem::path& dir,
                                   const EmitOptions& opts = {}) {
  for (const auto& r : runs) emit_report(r, dir / ("seed-" + std::to_string(r.meta.seed)), opts);
  emit_report(aggregate_bundles(runs), dir, {});
  std::string by_seed = "seed," + std::string(kResultsHeader) + "\n";
  for (const auto& r : runs)
    for (const auto& c : r.cells) by_seed += std::to_string(r.meta.seed) + "," + render_results_row(c) + "\n";
  detail::write_text(dir / "results_by_seed.csv", by_seed);
}

}  // namespace augbench
