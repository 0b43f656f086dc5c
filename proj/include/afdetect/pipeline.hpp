#pragma once

// Declarative pipeline configuration and the end-to-end drivers behind the CLI.
//
// The config is a JSON object; every key is optional and unknown keys are
// rejected. Example:
//
//   {
//     "input": {"synth": {"n_subjects": 35, "missing_af": 22, "missing_naf": 22}},
//     "preprocess": {"denoise": true, "remove_baseline": true, "normalize": true},
//     "features": {"ppg_band_hz": [0.5, 4], "ecg_band_hz": [0.5, 40]},
//     "models": [{"kind": "bagged_trees", "trees": 30}, {"kind": "cubic_svm"},
//                {"kind": "subspace_knn", "learners": 30, "subspace_dim": 11, "k": 1}],
//     "evaluation": {"test_fraction": 0.2, "folds": 10},
//     "seed": 7,
//     "output_dir": "out"
//   }
//
// "input" holds either {"manifest": "<path>"} (relative to the config file) or
// {"synth": {...}}; without it a default synthetic dataset is generated.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "afdetect/dataset.hpp"
#include "afdetect/dsp.hpp"
#include "afdetect/eval.hpp"
#include "afdetect/features.hpp"
#include "afdetect/model.hpp"
#include "afdetect/synth.hpp"

namespace afdetect::pipeline {

struct PipelineConfig {
  std::optional<std::string> manifest;  // as written in the config
  std::filesystem::path manifest_path;  // resolved
  synth::SynthConfig synth{};
  dsp::PreprocessOptions preprocess{};
  features::FeatureOptions features{};
  std::vector<ModelConfig> models;
  double test_fraction = 0.2;
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "afdetect_out";
};

/// Parses and validates; throws BadConfig. Relative manifest paths resolve
/// against `base_dir`.
PipelineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// Throws BadConfig for out-of-range values.
void validate(const PipelineConfig& cfg);

/// Normalized JSON (defaults filled, keys sorted) without output_dir.
std::string canonical_json(const PipelineConfig& cfg);
/// 16 hex digits of FNV-1a 64 over canonical_json.
std::string config_hash(const PipelineConfig& cfg);

/// The "# afdetect config_hash=... seed=..." line embedded in every output.
std::string provenance(const PipelineConfig& cfg);

/// Loads the manifest, or generates the synthetic dataset from the master seed.
dataset::Dataset acquire_dataset(const PipelineConfig& cfg);

/// Writes <out>/manifest.csv and <out>/segments/*.csv; returns the segment count.
std::size_t write_synthetic(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

struct RunResult {
  dataset::CleaningReport cleaning;
  std::vector<eval::EvaluationReport> reports;
};

/// ingest -> clean -> features -> experiment. Writes cleaning_report.csv,
/// features.csv, report.json and report.txt under `out_dir`.
RunResult run(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

/// Writes features.csv and correlation.csv; returns the feature table.
features::FeatureTable write_features(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

/// Writes before/after traces of one cleaned segment to
/// preprocess_<subject>_<segment>.csv; returns the path.
std::filesystem::path dump_preprocess(const PipelineConfig& cfg, std::size_t segment_index,
                                      const std::filesystem::path& out_dir);

}  // namespace afdetect::pipeline
