#pragma once

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "augbench/harness/config.hpp"
#include "augbench/harness/experiment.hpp"
#include "augbench/harness/report.hpp"

namespace augbench {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitPartial = 3;  // run finished but some cells failed

/// Seed precedence: --seed flag, then AUGBENCH_SEED, then the config file.
inline void apply_seed_override(ExperimentConfig& config, std::optional<std::uint64_t> flag) {
  if (flag) {
    config.seed = *flag;
    return;
  }
  if (const char* env = std::getenv("AUGBENCH_SEED"); env && *env) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(env, &used, 10);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != std::string(env).size()) {
      throw std::invalid_argument(std::string("AUGBENCH_SEED is not an unsigned integer: '") + env + "'");
    }
    config.seed = v;
  }
}

inline int cli_main(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Tabular augmentation benchmark: GMM, VAE and GAN boosts across six classifiers", "augbench"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int seeds = 0;
  std::size_t workers = 0;
  std::string generator;

  auto* run = app.add_subcommand("run", "Run the full augmenter x classifier grid and write reports");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seed", seed, "Override the root seed");
  run->add_option("--out", out_dir, "Output directory (overrides the config)");
  run->add_option("--seeds", seeds, "Repeat over N consecutive seeds and report the mean")->check(CLI::PositiveNumber);
  run->add_option("--workers", workers, "Parallel worker threads")->check(CLI::PositiveNumber);

  auto* augment = app.add_subcommand("augment", "Write synthetic rows for one generator");
  augment->add_option("--config", config_path, "Experiment config (JSON)")->required();
  augment->add_option("--generator", generator, "gmm, vae or gan")->required();
  augment->add_option("--seed", seed, "Override the root seed");
  augment->add_option("--out", out_dir, "Output directory (overrides the config)");

  auto* validate = app.add_subcommand("validate", "Check the config and dataset without training");
  validate->add_option("--config", config_path, "Experiment config (JSON)")->required();

  std::vector<const char*> argv{"augbench"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "augbench: error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  try {
    auto config = load_config(config_path);
    apply_seed_override(config, seed);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (seeds > 0) config.seeds = seeds;
    if (workers > 0) config.workers = workers;
    config.validate();

    if (*validate) {
      const auto data = prepare_data(config, RngStream(config.seed));
      out << "config ok: " << data.table.rows.size() << " rows (" << data.table.dropped_row_count
          << " dropped), " << data.plan.n_features() << " features, " << config.augmenters.size() << " x "
          << config.classifiers.size() << " cells, digest " << config_digest(config) << '\n';
      return kExitOk;
    }

    if (*augment) {
      const Generator g = parse_generator(generator);
      if (g == Generator::none) throw std::invalid_argument("--generator must be gmm, vae or gan");
      const RngStream root(config.seed);
      const auto data = prepare_data(config, root);
      const auto aug = augment_training_set(g, data.train, config, augment_stream(root, g));
      std::filesystem::create_directories(config.output_dir);
      write_synthetic_files(config.output_dir, g, aug, data.plan);
      out << "wrote " << aug.provenance.synthetic_rows() << " synthetic rows to "
          << (std::filesystem::path(config.output_dir) / ("synthetic_" + generator + ".csv")).string() << '\n';
      return kExitOk;
    }

    const EmitOptions opts{config.export_synthetic, config.dump_models};
    std::size_t failed = 0;
    std::size_t cells = 0;
    if (config.seeds > 1) {
      const auto runs = run_experiment_seeds(config);
      emit_multi_seed_report(runs, config.output_dir, opts);
      for (const auto& r : runs) {
        failed += r.failed_count();
        cells += r.cells.size();
      }
    } else {
      const auto bundle = run_experiment(config);
      emit_report(bundle, config.output_dir, opts);
      failed = bundle.failed_count();
      cells = bundle.cells.size();
    }
    out << "wrote report for " << cells << " cells to " << config.output_dir << '\n';
    if (failed > 0) {
      err << "augbench: error: " << failed << " of " << cells << " cells failed; see report.md\n";
      return kExitPartial;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "augbench: error: " << detail::one_line(e.what()) << '\n';
    return kExitFailure;
  }
}

inline int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args);
}

}  // namespace augbench
