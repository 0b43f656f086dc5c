#pragma once

// The 22-element per-segment feature vector: 8 time-domain statistics for each
// channel, PPG and ECG bandpower, and 4 heart-rate-variability metrics from
// detected ECG R peaks.

#include <array>
#include <cstddef>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "afdetect/dataset.hpp"
#include "afdetect/dsp.hpp"
#include "afdetect/matrix.hpp"

namespace afdetect::features {

inline constexpr std::size_t kFeatureCount = 22;

enum Feature : std::size_t {
  kPpgMean, kPpgStd, kPpgMin, kPpgMax, kPpgMedian, kPpgSkew, kPpgKurt, kPpgRms,
  kEcgMean, kEcgStd, kEcgMin, kEcgMax, kEcgMedian, kEcgSkew, kEcgKurt, kEcgRms,
  kPpgBandpower, kEcgBandpower,
  kHrMean, kHrStd, kSdnn, kRmssd,
};

const std::array<std::string_view, kFeatureCount>& feature_names() noexcept;

struct TimeStats {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1)
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;
  double skewness = 0.0;  // m3 / m2^1.5, population moments
  double kurtosis = 0.0;  // m4 / m2^2, non-excess
  double rms = 0.0;
};

/// Throws Degenerate for fewer than 2 samples or zero variance.
TimeStats time_stats(std::span<const double> x);

struct RPeakList {
  std::vector<std::size_t> sample_indices;
  double fs_hz = dataset::kSamplingRateHz;
};

/// Pan-Tompkins style QRS detection on a preprocessed ECG.
RPeakList detect_r_peaks(std::span<const double> ecg, double fs_hz);

struct HrvMetrics {
  double hr_mean_bpm = 0.0;
  double hr_std_bpm = 0.0;
  double sdnn_ms = 0.0;
  double rmssd_ms = 0.0;
  bool low_peak_count = false;  // fewer than 2 RR intervals; all metrics zero
};

HrvMetrics hrv_metrics(const RPeakList& peaks);
HrvMetrics hrv_from_rr(std::span<const double> rr_ms);

enum class QualityFlag { LowPeakCount, DegeneratePpgStats, DegenerateEcgStats };
std::string_view to_string(QualityFlag flag) noexcept;

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  Label label = Label::NAF;
  std::set<QualityFlag> quality_flags;
};

struct FeatureOptions {
  double ppg_band_lo_hz = 0.5;
  double ppg_band_hi_hz = 4.0;
  double ecg_band_lo_hz = 0.5;
  double ecg_band_hi_hz = 40.0;
};

dataset::Segment preprocess_segment(const dataset::Segment& s, const dsp::PreprocessOptions& opt);

/// Expects an already preprocessed segment.
FeatureVector extract_features(const dataset::Segment& s, const FeatureOptions& opt = {});

struct FeatureTable {
  Matrix values;  // rows x 22
  std::vector<Label> labels;
  std::vector<std::string> subject_ids;
  std::vector<std::uint32_t> segment_ids;
  std::vector<std::set<QualityFlag>> flags;

  std::size_t rows() const noexcept { return values.rows(); }
};

/// Preprocesses and featurises every segment, one row per segment in dataset
/// order. Throws EmptyDataset for an empty dataset.
FeatureTable feature_matrix(const dataset::Dataset& d, const dsp::PreprocessOptions& pre = {},
                            const FeatureOptions& opt = {});

/// Pearson correlation between columns; a constant column correlates 0 with
/// every other column and 1 with itself.
Matrix correlation_matrix(const Matrix& m);

void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table,
                       const std::string& header_comment = {});
void write_correlation_csv(const std::filesystem::path& path, const Matrix& corr,
                           const std::string& header_comment = {});

}  // namespace afdetect::features
