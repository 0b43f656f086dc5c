#include "afdetect/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>

#include "afdetect/csv.hpp"
#include "afdetect/error.hpp"
#include "afdetect/parallel.hpp"
#include "json.hpp"

namespace afdetect::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::BadConfig, what); }

// Typed access to one JSON object with a closed key set.
class Section {
 public:
  Section(const json& j, std::string where, std::initializer_list<std::string_view> allowed)
      : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) bad(where_ + " must be an object");
    for (const auto& [key, value] : j_.items()) {
      bool known = false;
      for (auto a : allowed) known = known || a == key;
      if (!known) bad("unknown key '" + key + "' in " + where_);
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return where_ + "." + key; }

  bool boolean(const char* key, bool def) const {
    if (!has(key)) return def;
    if (!at(key).is_boolean()) bad(path(key) + " must be true or false");
    return at(key).get<bool>();
  }

  double number(const char* key, double def) const {
    if (!has(key)) return def;
    if (!at(key).is_number()) bad(path(key) + " must be a number");
    return at(key).get<double>();
  }

  std::uint64_t count(const char* key, std::uint64_t def) const {
    if (!has(key)) return def;
    const json& v = at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && d < 1.8e19 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
    }
    bad(path(key) + " must be a non-negative integer");
  }

  std::string string(const char* key) const {
    if (!at(key).is_string()) bad(path(key) + " must be a string");
    return at(key).get<std::string>();
  }

 private:
  const json& j_;
  std::string where_;
};

int to_int(std::uint64_t v, const std::string& what) {
  if (v > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) bad(what + " is too large");
  return static_cast<int>(v);
}

void read_band(const Section& s, const char* key, double& lo, double& hi) {
  if (!s.has(key)) return;
  const json& v = s.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    bad(s.path(key) + " must be [lo, hi]");
  }
  lo = v[0].get<double>();
  hi = v[1].get<double>();
}

ModelConfig read_model(const json& j, std::size_t index) {
  const std::string where = "models[" + std::to_string(index) + "]";
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) bad(where + " needs a string 'kind'");
  ModelConfig m;
  m.kind = parse_model_kind(j["kind"].get<std::string>());
  switch (m.kind) {
    case ModelKind::BaggedTrees: {
      Section s(j, where, {"kind", "trees", "bootstrap", "max_depth", "min_leaf"});
      m.bagging.trees = s.count("trees", m.bagging.trees);
      m.bagging.bootstrap = s.boolean("bootstrap", m.bagging.bootstrap);
      if (s.has("max_depth") && !s.at("max_depth").is_null()) m.bagging.tree.max_depth = s.count("max_depth", 0);
      m.bagging.tree.min_leaf = s.count("min_leaf", m.bagging.tree.min_leaf);
      break;
    }
    case ModelKind::CubicSvm: {
      Section s(j, where, {"kind", "C", "tol", "max_kernel_evaluations", "max_iterations"});
      m.svm.C = s.number("C", m.svm.C);
      m.svm.tol = s.number("tol", m.svm.tol);
      m.svm.max_kernel_evaluations = s.count("max_kernel_evaluations", m.svm.max_kernel_evaluations);
      m.svm.max_iterations = s.count("max_iterations", m.svm.max_iterations);
      break;
    }
    case ModelKind::SubspaceKnn: {
      Section s(j, where, {"kind", "learners", "subspace_dim", "k"});
      m.subspace.learners = s.count("learners", m.subspace.learners);
      m.subspace.subspace_dim = s.count("subspace_dim", m.subspace.subspace_dim);
      m.subspace.k = s.count("k", m.subspace.k);
      break;
    }
  }
  return m;
}

std::vector<ModelConfig> default_models() {
  std::vector<ModelConfig> out(3);
  out[0].kind = ModelKind::BaggedTrees;
  out[1].kind = ModelKind::CubicSvm;
  out[2].kind = ModelKind::SubspaceKnn;
  return out;
}

void read_synth(const Section& s, synth::SynthConfig& c) {
  c.n_subjects = to_int(s.count("n_subjects", static_cast<std::uint64_t>(c.n_subjects)), s.path("n_subjects"));
  c.segments_per_subject = to_int(s.count("segments_per_subject", static_cast<std::uint64_t>(c.segments_per_subject)),
                                  s.path("segments_per_subject"));
  c.label_ratio_af = s.number("label_ratio_af", c.label_ratio_af);
  if (s.has("noise_snr_db") && s.at("noise_snr_db").is_null()) {
    c.noise_snr_db = std::numeric_limits<double>::infinity();
  } else {
    c.noise_snr_db = s.number("noise_snr_db", c.noise_snr_db);
  }
  c.drift_amplitude = s.number("drift_amplitude", c.drift_amplitude);
  c.segment_length = s.count("segment_length", c.segment_length);
  c.fs_hz = s.number("fs_hz", c.fs_hz);
  c.naf_rr_mean_s = s.number("naf_rr_mean_s", c.naf_rr_mean_s);
  c.naf_rr_sd_s = s.number("naf_rr_sd_s", c.naf_rr_sd_s);
  c.naf_rr_autocorr = s.number("naf_rr_autocorr", c.naf_rr_autocorr);
  c.naf_rr_min_s = s.number("naf_rr_min_s", c.naf_rr_min_s);
  c.naf_rr_max_s = s.number("naf_rr_max_s", c.naf_rr_max_s);
  c.af_rr_min_s = s.number("af_rr_min_s", c.af_rr_min_s);
  c.af_rr_max_s = s.number("af_rr_max_s", c.af_rr_max_s);
  c.missing_af = to_int(s.count("missing_af", static_cast<std::uint64_t>(c.missing_af)), s.path("missing_af"));
  c.missing_naf = to_int(s.count("missing_naf", static_cast<std::uint64_t>(c.missing_naf)), s.path("missing_naf"));
}

json model_json(const ModelConfig& m) {
  json j{{"kind", to_string(m.kind)}};
  switch (m.kind) {
    case ModelKind::BaggedTrees:
      j["trees"] = m.bagging.trees;
      j["bootstrap"] = m.bagging.bootstrap;
      j["min_leaf"] = m.bagging.tree.min_leaf;
      if (m.bagging.tree.max_depth == std::numeric_limits<std::size_t>::max()) {
        j["max_depth"] = nullptr;
      } else {
        j["max_depth"] = m.bagging.tree.max_depth;
      }
      break;
    case ModelKind::CubicSvm:
      j["C"] = m.svm.C;
      j["tol"] = m.svm.tol;
      j["max_kernel_evaluations"] = m.svm.max_kernel_evaluations;
      j["max_iterations"] = m.svm.max_iterations;
      break;
    case ModelKind::SubspaceKnn:
      j["learners"] = m.subspace.learners;
      j["subspace_dim"] = m.subspace.subspace_dim;
      j["k"] = m.subspace.k;
      break;
  }
  return j;
}

json config_json(const PipelineConfig& cfg) {
  json input;
  if (cfg.manifest) {
    input["manifest"] = *cfg.manifest;
  } else {
    const auto& c = cfg.synth;
    input["synth"] = {
        {"n_subjects", c.n_subjects},
        {"segments_per_subject", c.segments_per_subject},
        {"label_ratio_af", c.label_ratio_af},
        {"noise_snr_db", std::isinf(c.noise_snr_db) ? json(nullptr) : json(c.noise_snr_db)},
        {"drift_amplitude", c.drift_amplitude},
        {"segment_length", c.segment_length},
        {"fs_hz", c.fs_hz},
        {"naf_rr_mean_s", c.naf_rr_mean_s},
        {"naf_rr_sd_s", c.naf_rr_sd_s},
        {"naf_rr_autocorr", c.naf_rr_autocorr},
        {"naf_rr_min_s", c.naf_rr_min_s},
        {"naf_rr_max_s", c.naf_rr_max_s},
        {"af_rr_min_s", c.af_rr_min_s},
        {"af_rr_max_s", c.af_rr_max_s},
        {"missing_af", c.missing_af},
        {"missing_naf", c.missing_naf},
    };
  }
  json models = json::array();
  for (const auto& m : cfg.models) models.push_back(model_json(m));
  return {
      {"input", std::move(input)},
      {"preprocess",
       {{"denoise", cfg.preprocess.denoise},
        {"remove_baseline", cfg.preprocess.remove_baseline},
        {"normalize", cfg.preprocess.normalize}}},
      {"features",
       {{"ppg_band_hz", {cfg.features.ppg_band_lo_hz, cfg.features.ppg_band_hi_hz}},
        {"ecg_band_hz", {cfg.features.ecg_band_lo_hz, cfg.features.ecg_band_hi_hz}}}},
      {"models", std::move(models)},
      {"evaluation", {{"test_fraction", cfg.test_fraction}, {"folds", cfg.folds}}},
      {"seed", cfg.seed},
  };
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::IoError, "cannot create output directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

std::size_t expected_length(const PipelineConfig& cfg) {
  return cfg.manifest ? dataset::kSegmentLength : cfg.synth.segment_length;
}

dataset::CleanResult cleaned(const PipelineConfig& cfg) {
  return dataset::clean_dataset(acquire_dataset(cfg), expected_length(cfg));
}

}  // namespace

PipelineConfig parse_config(std::string_view json_text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig cfg;
  Section top(root, "config", {"input", "preprocess", "features", "models", "evaluation", "seed", "output_dir"});
  cfg.seed = top.count("seed", cfg.seed);
  if (top.has("output_dir")) cfg.output_dir = top.string("output_dir");

  if (top.has("input")) {
    Section in(top.at("input"), "input", {"manifest", "synth"});
    if (in.has("manifest") && in.has("synth")) bad("input takes either 'manifest' or 'synth', not both");
    if (in.has("manifest")) {
      cfg.manifest = in.string("manifest");
      fs::path p(*cfg.manifest);
      cfg.manifest_path = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    } else if (in.has("synth")) {
      read_synth(Section(in.at("synth"), "input.synth",
                         {"n_subjects", "segments_per_subject", "label_ratio_af", "noise_snr_db",
                          "drift_amplitude", "segment_length", "fs_hz", "naf_rr_mean_s", "naf_rr_sd_s",
                          "naf_rr_autocorr", "naf_rr_min_s", "naf_rr_max_s", "af_rr_min_s", "af_rr_max_s",
                          "missing_af", "missing_naf"}),
                 cfg.synth);
    }
  }
  if (top.has("preprocess")) {
    Section p(top.at("preprocess"), "preprocess", {"denoise", "remove_baseline", "normalize"});
    cfg.preprocess.denoise = p.boolean("denoise", cfg.preprocess.denoise);
    cfg.preprocess.remove_baseline = p.boolean("remove_baseline", cfg.preprocess.remove_baseline);
    cfg.preprocess.normalize = p.boolean("normalize", cfg.preprocess.normalize);
  }
  if (top.has("features")) {
    Section f(top.at("features"), "features", {"ppg_band_hz", "ecg_band_hz"});
    read_band(f, "ppg_band_hz", cfg.features.ppg_band_lo_hz, cfg.features.ppg_band_hi_hz);
    read_band(f, "ecg_band_hz", cfg.features.ecg_band_lo_hz, cfg.features.ecg_band_hi_hz);
  }
  if (top.has("models")) {
    const json& ms = top.at("models");
    if (!ms.is_array()) bad("models must be a list");
    for (std::size_t i = 0; i < ms.size(); ++i) cfg.models.push_back(read_model(ms[i], i));
  } else {
    cfg.models = default_models();
  }
  if (top.has("evaluation")) {
    Section e(top.at("evaluation"), "evaluation", {"test_fraction", "folds"});
    cfg.test_fraction = e.number("test_fraction", cfg.test_fraction);
    cfg.folds = e.count("folds", cfg.folds);
  }
  cfg.synth.seed = cfg.seed;
  validate(cfg);
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, "config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

void validate(const PipelineConfig& cfg) {
  if (!cfg.manifest) synth::validate(cfg.synth);
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) bad("evaluation.test_fraction must be in (0, 1)");
  if (cfg.folds < 2) bad("evaluation.folds must be at least 2");
  const double nyquist = (cfg.manifest ? dataset::kSamplingRateHz : cfg.synth.fs_hz) / 2.0;
  const auto check_band = [&](double lo, double hi, const char* name) {
    if (!(lo >= 0.0 && lo < hi && hi <= nyquist)) bad(std::string("features.") + name + " must satisfy 0 <= lo < hi <= fs/2");
  };
  check_band(cfg.features.ppg_band_lo_hz, cfg.features.ppg_band_hi_hz, "ppg_band_hz");
  check_band(cfg.features.ecg_band_lo_hz, cfg.features.ecg_band_hi_hz, "ecg_band_hz");
  if (cfg.models.empty()) bad("models must not be empty");
  std::set<ModelKind> seen;
  for (const auto& m : cfg.models) {
    if (!seen.insert(m.kind).second) bad("model '" + std::string(to_string(m.kind)) + "' listed twice");
    switch (m.kind) {
      case ModelKind::BaggedTrees:
        if (m.bagging.trees < 1) bad("bagged_trees.trees must be at least 1");
        if (m.bagging.tree.min_leaf < 1) bad("bagged_trees.min_leaf must be at least 1");
        if (m.bagging.tree.max_depth < 1) bad("bagged_trees.max_depth must be at least 1");
        break;
      case ModelKind::CubicSvm:
        if (!(m.svm.C > 0.0 && std::isfinite(m.svm.C))) bad("cubic_svm.C must be positive");
        if (!(m.svm.tol > 0.0)) bad("cubic_svm.tol must be positive");
        if (m.svm.max_kernel_evaluations < 1 || m.svm.max_iterations < 1) bad("cubic_svm budgets must be positive");
        break;
      case ModelKind::SubspaceKnn:
        if (m.subspace.learners < 1) bad("subspace_knn.learners must be at least 1");
        if (m.subspace.subspace_dim < 1 || m.subspace.subspace_dim > features::kFeatureCount) {
          bad("subspace_knn.subspace_dim must be in [1, 22]");
        }
        if (m.subspace.k < 1) bad("subspace_knn.k must be at least 1");
        break;
    }
  }
}

std::string canonical_json(const PipelineConfig& cfg) { return config_json(cfg).dump(); }

std::string config_hash(const PipelineConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_json(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string provenance(const PipelineConfig& cfg) { return csv::provenance_line(config_hash(cfg), cfg.seed); }

dataset::Dataset acquire_dataset(const PipelineConfig& cfg) {
  if (cfg.manifest) return dataset::load_dataset(cfg.manifest_path);
  synth::SynthConfig sc = cfg.synth;
  sc.seed = cfg.seed;
  return synth::synth_generate(sc).dataset;
}

std::size_t write_synthetic(const PipelineConfig& cfg, const fs::path& out_dir) {
  synth::SynthConfig sc = cfg.synth;
  sc.seed = cfg.seed;
  const auto generated = synth::synth_generate(sc);
  const auto& segs = generated.dataset.segments();
  ensure_dir(out_dir / "segments");
  const std::string header = provenance(cfg);
  std::vector<dataset::ManifestEntry> entries(segs.size());
  parallel_for(segs.size(), [&](std::size_t i) {
    const auto& s = segs[i];
    char name[64];
    std::snprintf(name, sizeof name, "_%03u.csv", static_cast<unsigned>(s.segment_id));
    const fs::path rel = fs::path("segments") / (s.subject_id + name);
    dataset::write_segment_csv(out_dir / rel, s, header);
    entries[i] = {s.subject_id, s.segment_id, s.label, rel};
  });
  dataset::write_manifest(out_dir / "manifest.csv", entries, header);
  return segs.size();
}

RunResult run(const PipelineConfig& cfg, const fs::path& out_dir) {
  ensure_dir(out_dir);
  const std::string header = provenance(cfg);
  auto clean = cleaned(cfg);
  dataset::write_cleaning_report(out_dir / "cleaning_report.csv", clean.report, header);
  const auto table = features::feature_matrix(clean.dataset, cfg.preprocess, cfg.features);
  features::write_feature_csv(out_dir / "features.csv", table, header);

  eval::ExperimentConfig ec;
  ec.test_fraction = cfg.test_fraction;
  ec.folds = cfg.folds;
  ec.seed = cfg.seed;
  ec.models = cfg.models;
  ec.config_hash = config_hash(cfg);
  RunResult result{std::move(clean.report), eval::run_experiment(table.values, table.labels, ec)};
  write_text(out_dir / "report.json", eval::reports_to_json(result.reports));
  write_text(out_dir / "report.txt", header + "\n" + eval::reports_to_table(result.reports));
  return result;
}

features::FeatureTable write_features(const PipelineConfig& cfg, const fs::path& out_dir) {
  ensure_dir(out_dir);
  const std::string header = provenance(cfg);
  const auto clean = cleaned(cfg);
  auto table = features::feature_matrix(clean.dataset, cfg.preprocess, cfg.features);
  features::write_feature_csv(out_dir / "features.csv", table, header);
  features::write_correlation_csv(out_dir / "correlation.csv", features::correlation_matrix(table.values), header);
  return table;
}

fs::path dump_preprocess(const PipelineConfig& cfg, std::size_t segment_index, const fs::path& out_dir) {
  const auto clean = cleaned(cfg);
  if (segment_index >= clean.dataset.size()) {
    bad("segment index " + std::to_string(segment_index) + " out of range (" +
        std::to_string(clean.dataset.size()) + " cleaned segments)");
  }
  const auto& s = clean.dataset[segment_index];
  const auto ppg = dsp::preprocess_trace(s.ppg, s.fs_hz, cfg.preprocess);
  const auto ecg = dsp::preprocess_trace(s.ecg, s.fs_hz, cfg.preprocess);

  ensure_dir(out_dir);
  char name[96];
  std::snprintf(name, sizeof name, "preprocess_%s_%03u.csv", s.subject_id.c_str(), static_cast<unsigned>(s.segment_id));
  const fs::path path = out_dir / name;
  std::string text = provenance(cfg) + "\n";
  text += "index,time_s,ppg_raw,ppg_denoised,ppg_detrended,ppg_normalized,ecg_raw,ecg_denoised,ecg_detrended,ecg_normalized\n";
  for (std::size_t i = 0; i < ppg.raw.size(); ++i) {
    text += std::to_string(i);
    text += ',' + csv::format_double(static_cast<double>(i) / s.fs_hz);
    for (const auto* v : {&ppg.raw, &ppg.denoised, &ppg.detrended, &ppg.normalized, &ecg.raw, &ecg.denoised,
                          &ecg.detrended, &ecg.normalized}) {
      text += ',' + csv::format_double((*v)[i]);
    }
    text += '\n';
  }
  write_text(path, text);
  return path;
}

}  // namespace afdetect::pipeline
