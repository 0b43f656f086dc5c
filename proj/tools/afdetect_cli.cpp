// afdetect: synth | run | features | preprocess --dump
//
// Exit codes: 0 ok, 1 config, 2 I/O, 3 data, 4 numeric.
// Log verbosity comes from AFDETECT_LOG_LEVEL (trace, debug, info, warn, error, off).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "afdetect/error.hpp"
#include "afdetect/eval.hpp"
#include "afdetect/pipeline.hpp"

namespace fs = std::filesystem;
using namespace afdetect;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("afdetect");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("AFDETECT_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(env));
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool dump = false;
  std::size_t segment = 0;
};

pipeline::PipelineConfig resolve(const Options& o) {
  auto cfg = pipeline::load_config(o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.synth.seed = *o.seed;
  }
  if (o.out) cfg.output_dir = *o.out;
  spdlog::debug("config hash {} seed {}", pipeline::config_hash(cfg), cfg.seed);
  return cfg;
}

int cmd_synth(const Options& o) {
  const auto cfg = resolve(o);
  if (cfg.manifest) throw Error(ErrorKind::BadConfig, "synth needs synthetic input settings, not a manifest");
  const auto n = pipeline::write_synthetic(cfg, cfg.output_dir);
  spdlog::info("wrote {} segments and manifest.csv to {}", n, cfg.output_dir.string());
  return 0;
}

int cmd_run(const Options& o) {
  const auto cfg = resolve(o);
  const auto result = pipeline::run(cfg, cfg.output_dir);
  spdlog::info("cleaning kept {} AF + {} NAF, discarded {}", result.cleaning.kept.af, result.cleaning.kept.naf,
               result.cleaning.discarded.size());
  for (const auto& r : result.reports) {
    for (const auto& w : r.warnings) spdlog::warn("{}: {}", r.model_name, w);
  }
  std::cout << eval::reports_to_table(result.reports);
  spdlog::info("reports written to {}", cfg.output_dir.string());
  return 0;
}

int cmd_features(const Options& o) {
  const auto cfg = resolve(o);
  const auto table = pipeline::write_features(cfg, cfg.output_dir);
  spdlog::info("wrote {} feature rows to {}", table.rows(), (cfg.output_dir / "features.csv").string());
  return 0;
}

int cmd_preprocess(const Options& o) {
  if (!o.dump) throw Error(ErrorKind::BadConfig, "preprocess currently supports only --dump");
  const auto cfg = resolve(o);
  const auto path = pipeline::dump_preprocess(cfg, o.segment, cfg.output_dir);
  spdlog::info("wrote {}", path.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"AF detection from PPG + ECG segments"};
  app.require_subcommand(1);
  Options o;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "pipeline config (JSON)")->required();
    sub->add_option("--seed", o.seed, "override the master seed");
    sub->add_option("--out", o.out, "override the output directory");
  };
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset (manifest + segment CSVs)");
  auto* run = app.add_subcommand("run", "clean, featurise, train and evaluate all configured models");
  auto* feats = app.add_subcommand("features", "write the feature table and its correlation matrix");
  auto* pre = app.add_subcommand("preprocess", "inspect the preprocessing chain");
  for (auto* sub : {synth, run, feats, pre}) add_common(sub);
  pre->add_flag("--dump", o.dump, "write before/after traces of one segment as CSV");
  pre->add_option("--segment", o.segment, "index into the cleaned dataset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorCategory::Config);
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*run) return cmd_run(o);
    if (*feats) return cmd_features(o);
    return cmd_preprocess(o);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(e.category());
  } catch (const fs::filesystem_error& e) {
    spdlog::error("IoError: {}", e.what());
    return static_cast<int>(ErrorCategory::Io);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(ErrorCategory::Numeric);
  }
}
