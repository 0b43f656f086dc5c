// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include "afdetect/dataset.hpp"
#include "afdetect/dsp.hpp"
#include "afdetect/eval.hpp"
#include "afdetect/features.hpp"
#include "afdetect/pipeline.hpp"
#include "afdetect/synth.hpp"
#include "oracle_checks.hpp"
#include "support.hpp"

using namespace afdetect;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome metric_arithmetic() {
  const auto a = eval::metrics({52, 1, 1, 43});
  const auto b = eval::metrics({52, 1, 21, 23});
  const std::string got = eval::format_percent(*a.accuracy) + "/" + eval::format_percent(*a.sensitivity) + "/" +
                          eval::format_percent(*a.specificity) + " " + eval::format_percent(*b.accuracy) + "/" +
                          eval::format_percent(*b.sensitivity) + "/" + eval::format_percent(*b.specificity);
  return {got == "97.94/98.11/97.73 77.32/98.11/52.27", got};
}

Outcome split_composition() {
  std::vector<Label> labels(263, Label::AF);
  labels.insert(labels.end(), 218, Label::NAF);
  int bad = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto s = dataset::stratified_split(labels, 0.2, seed);
    std::size_t af = 0, naf = 0;
    for (auto i : s.test) (labels[i] == Label::AF ? af : naf)++;
    bad += !(af == 53 && naf == 44);
  }
  return {bad == 0, fmt("53 AF + 44 NAF test rows for %d/1000 seeds", 1000 - bad)};
}

Outcome dwt_round_trip() {
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto x = testing::gaussian_noise(10000, derive_seed(3, 0, i), 1.0 + static_cast<double>(i % 7));
    const auto y = dsp::dwt_reconstruct(dsp::dwt_decompose(x, dsp::kDenoiseLevels));
    for (std::size_t k = 0; k < x.size(); ++k) worst = std::max(worst, std::abs(x[k] - y[k]));
  }
  return {worst < 1e-8, fmt("max reconstruction error %.3g over 1000 signals", worst)};
}

Outcome butterworth() {
  const double fs = dataset::kSamplingRateHz;
  const auto lp = dsp::design_butterworth_lowpass(dsp::kBaselineOrder, dsp::kBaselineCutoffHz, fs);
  const double h0 = dsp::magnitude_response(lp, 0.0);
  const double hc = dsp::magnitude_response(lp, dsp::kBaselineCutoffHz);
  const auto out = dsp::filtfilt(lp, testing::sinusoid(dataset::kSegmentLength, fs, 2.0));
  const double amp = testing::tone_amplitude(out, fs, 2.0);
  const bool ok = std::abs(h0 - 1.0) <= 1e-9 && std::abs(hc - 0.7071) <= 0.01 * 0.7071 && amp < 1e-3;
  return {ok, fmt("|H(0)|-1 = %.2g, |H(fc)| = %.5f, 2 Hz residual %.3g%%", h0 - 1.0, hc, 100.0 * amp)};
}

Outcome bandpower() {
  const double fs = dataset::kSamplingRateHz;
  const double tone = dsp::bandpower(testing::sinusoid(dataset::kSegmentLength, fs, 2.0), fs, 0.5, 4.0);
  double worst_noise = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const double p = dsp::bandpower(testing::gaussian_noise(dataset::kSegmentLength, 100 + s), fs, 0.0, fs / 2.0);
    worst_noise = std::max(worst_noise, std::abs(p - 1.0));
  }
  const bool ok = std::abs(tone - 0.5) <= 0.025 && worst_noise <= 0.05;
  return {ok, fmt("tone %.4f, white noise worst |P-1| %.4f over 20 seeds", tone, worst_noise)};
}

Outcome hrv() {
  const auto h = features::hrv_from_rr(std::vector<double>{750.0, 850.0});
  const double hr = (60000.0 / 750.0 + 60000.0 / 850.0) / 2.0;
  const double sdnn = std::sqrt(5000.0);
  const auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  const double worst = std::max({rel(h.hr_mean_bpm, hr), rel(h.sdnn_ms, sdnn), rel(h.rmssd_ms, 100.0)});
  const bool ok = worst < 1e-9 && std::abs(hr - 75.294) < 5e-4 && std::abs(sdnn - 70.711) < 5e-4;
  return {ok, fmt("hr %.3f bpm, sdnn %.3f ms, rmssd %.3f ms, worst rel err %.2g", h.hr_mean_bpm, h.sdnn_ms,
                  h.rmssd_ms, worst)};
}

Outcome classifier_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto tree = checks::tree_vs_oracle(250, 101);
  const auto knn = checks::knn_vs_oracle(250, 102);
  const auto svm = checks::svm_vs_oracle(200, 103);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = tree.failures == 0 && knn.failures == 0 && svm.failures == 0 && svm.worst <= 1e-4 && secs < 60.0;
  return {ok, fmt("tree %d/%d, knn %d/%d, svm %d/%d (worst dual diff %.2g), %.1f s", tree.instances - tree.failures,
                  tree.instances, knn.instances - knn.failures, knn.instances, svm.instances - svm.failures,
                  svm.instances, svm.worst, secs)};
}

constexpr const char* kExperiment = R"({
  "input": {"synth": {"n_subjects": 35, "segments_per_subject": 15, "label_ratio_af": 0.54,
                      "noise_snr_db": 15.0, "drift_amplitude": 0.5, "missing_af": 22, "missing_naf": 22}},
  "models": [{"kind": "bagged_trees"}, {"kind": "cubic_svm"}, {"kind": "subspace_knn"}]
})";

Outcome end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto cfg = pipeline::parse_config(kExperiment);
    cfg.seed = seed;
    const auto dir = testing::scratch_dir("acceptance_e2e_" + std::to_string(seed));
    const auto result = pipeline::run(cfg, dir);
    detail += fmt("seed %llu [%zu rows:", static_cast<unsigned long long>(seed),
                  result.cleaning.kept.total());
    for (const auto& r : result.reports) {
      const double acc = *r.test.accuracy, se = *r.test.sensitivity, sp = *r.test.specificity;
      detail += fmt(" %s %.2f/%.2f/%.2f", std::string(to_string(r.kind)).c_str(), 100 * acc, 100 * se, 100 * sp);
      if (r.kind != ModelKind::CubicSvm) ok = ok && acc >= 0.95 && se >= 0.93 && sp >= 0.93;
    }
    detail += "] ";
    fs::remove_all(dir);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok = ok && secs < 300.0;
  return {ok, detail + fmt("%.1f s", secs)};
}

Outcome r_peaks() {
  std::size_t beats = 0, matched = 0, spurious = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    synth::SynthConfig c;
    c.n_subjects = 2;
    c.segments_per_subject = 1;
    c.label_ratio_af = 0.5;
    c.noise_snr_db = std::numeric_limits<double>::infinity();
    c.drift_amplitude = 0.0;
    c.seed = 5000 + seed;
    const auto g = synth::synth_generate(c);
    for (std::size_t i = 0; i < g.dataset.size(); ++i) {
      const auto pre = features::preprocess_segment(g.dataset[i], {});
      const auto peaks = features::detect_r_peaks(pre.ecg, pre.fs_hz);
      const auto m = testing::match_beats(g.truth[i].beat_times_s, peaks.sample_indices, pre.fs_hz, 0.020);
      beats += g.truth[i].beat_times_s.size();
      matched += m.matched;
      spurious += m.spurious;
      worst = std::max(worst, m.worst_offset_s);
    }
  }
  return {matched == beats && spurious == 0,
          fmt("%zu/%zu beats within 20 ms, %zu spurious, worst offset %.1f ms", matched, beats, spurious,
              1000.0 * worst)};
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto dir = testing::scratch_dir("acceptance_determinism");
  {
    std::ofstream(dir / "config.json") << kExperiment;
  }
  int codes[2];
  for (int i = 0; i < 2; ++i) {
    const std::string cmd = "cd '" + dir.string() + "' && '" AFDETECT_CLI_PATH "' run --config config.json --seed 7 --out run" +
                            std::to_string(i) + " >/dev/null 2>&1";
    codes[i] = std::system(cmd.c_str());
  }
  const auto a = read_text(dir / "run0" / "report.json");
  const auto b = read_text(dir / "run1" / "report.json");
  const bool ok = codes[0] == 0 && codes[1] == 0 && !a.empty() && a == b;
  return {ok, fmt("exit %d/%d, report.json %zu bytes, identical: %s", codes[0], codes[1], a.size(),
                  a == b ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"metric arithmetic", metric_arithmetic},
      {"stratified split 53 + 44", split_composition},
      {"DWT round trip", dwt_round_trip},
      {"Butterworth design and zero-phase attenuation", butterworth},
      {"bandpower", bandpower},
      {"HRV oracle", hrv},
      {"classifier oracles", classifier_oracles},
      {"end-to-end synthetic experiment", end_to_end},
      {"R-peak detection on noiseless ECG", r_peaks},
      {"determinism of run reports", determinism},
  };
  int failed = 0, n = 0;
  for (const auto& [name, check] : criteria) {
    ++n;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", n - failed, n);
  return failed == 0 ? 0 : 1;
}
