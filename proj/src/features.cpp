#include "afdetect/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "afdetect/csv.hpp"
#include "afdetect/error.hpp"
#include "afdetect/parallel.hpp"

namespace afdetect::features {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames = {
    "ppg_mean", "ppg_std", "ppg_min", "ppg_max", "ppg_median", "ppg_skew", "ppg_kurt", "ppg_rms",
    "ecg_mean", "ecg_std", "ecg_min", "ecg_max", "ecg_median", "ecg_skew", "ecg_kurt", "ecg_rms",
    "ppg_bandpower_0p5_4", "ecg_bandpower_0p5_40",
    "hr_mean_bpm", "hr_std_bpm", "sdnn_ms", "rmssd_ms",
};

double sample_std(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

void put_stats(std::array<double, kFeatureCount>& out, std::size_t offset, const TimeStats& s) {
  out[offset + 0] = s.mean;
  out[offset + 1] = s.std;
  out[offset + 2] = s.min;
  out[offset + 3] = s.max;
  out[offset + 4] = s.median;
  out[offset + 5] = s.skewness;
  out[offset + 6] = s.kurtosis;
  out[offset + 7] = s.rms;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

}  // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() noexcept { return kNames; }

std::string_view to_string(QualityFlag flag) noexcept {
  switch (flag) {
    case QualityFlag::LowPeakCount: return "LowPeakCount";
    case QualityFlag::DegeneratePpgStats: return "DegeneratePpgStats";
    case QualityFlag::DegenerateEcgStats: return "DegenerateEcgStats";
  }
  return "Unknown";
}

TimeStats time_stats(std::span<const double> x) {
  if (x.size() < 2) throw Error(ErrorKind::Degenerate, "need at least 2 samples");
  const double n = static_cast<double>(x.size());
  TimeStats s;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : x) {
    sum += v;
    sum_sq += v * v;
  }
  s.mean = sum / n;
  s.rms = std::sqrt(sum_sq / n);

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  if (m2 == 0.0) throw Error(ErrorKind::Degenerate, "zero variance");
  s.std = std::sqrt(m2 / (n - 1.0));
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.skewness = m3 / std::pow(m2, 1.5);
  s.kurtosis = m4 / (m2 * m2);

  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  const std::size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return s;
}

HrvMetrics hrv_from_rr(std::span<const double> rr_ms) {
  HrvMetrics m;
  if (rr_ms.size() < 2) {
    m.low_peak_count = true;
    return m;
  }
  std::vector<double> hr(rr_ms.size());
  std::transform(rr_ms.begin(), rr_ms.end(), hr.begin(), [](double rr) { return 60000.0 / rr; });
  double hr_sum = 0.0;
  for (double v : hr) hr_sum += v;
  m.hr_mean_bpm = hr_sum / static_cast<double>(hr.size());
  m.hr_std_bpm = sample_std(hr);
  m.sdnn_ms = sample_std(rr_ms);
  double ss = 0.0;
  for (std::size_t i = 1; i < rr_ms.size(); ++i) {
    const double d = rr_ms[i] - rr_ms[i - 1];
    ss += d * d;
  }
  m.rmssd_ms = std::sqrt(ss / static_cast<double>(rr_ms.size() - 1));
  return m;
}

HrvMetrics hrv_metrics(const RPeakList& peaks) {
  std::vector<double> rr;
  const auto& idx = peaks.sample_indices;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    rr.push_back(static_cast<double>(idx[i] - idx[i - 1]) * 1000.0 / peaks.fs_hz);
  }
  return hrv_from_rr(rr);
}

dataset::Segment preprocess_segment(const dataset::Segment& s, const dsp::PreprocessOptions& opt) {
  dataset::Segment out;
  out.subject_id = s.subject_id;
  out.segment_id = s.segment_id;
  out.label = s.label;
  out.fs_hz = s.fs_hz;
  out.ppg = dsp::preprocess_channel(s.ppg, s.fs_hz, opt);
  out.ecg = dsp::preprocess_channel(s.ecg, s.fs_hz, opt);
  return out;
}

FeatureVector extract_features(const dataset::Segment& s, const FeatureOptions& opt) {
  FeatureVector fv;
  fv.label = s.label;
  try {
    put_stats(fv.values, kPpgMean, time_stats(s.ppg));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degenerate) throw;
    fv.quality_flags.insert(QualityFlag::DegeneratePpgStats);
  }
  try {
    put_stats(fv.values, kEcgMean, time_stats(s.ecg));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degenerate) throw;
    fv.quality_flags.insert(QualityFlag::DegenerateEcgStats);
  }
  fv.values[kPpgBandpower] = dsp::bandpower(s.ppg, s.fs_hz, opt.ppg_band_lo_hz, opt.ppg_band_hi_hz);
  fv.values[kEcgBandpower] = dsp::bandpower(s.ecg, s.fs_hz, opt.ecg_band_lo_hz, opt.ecg_band_hi_hz);

  const HrvMetrics hrv = hrv_metrics(detect_r_peaks(s.ecg, s.fs_hz));
  if (hrv.low_peak_count) fv.quality_flags.insert(QualityFlag::LowPeakCount);
  fv.values[kHrMean] = hrv.hr_mean_bpm;
  fv.values[kHrStd] = hrv.hr_std_bpm;
  fv.values[kSdnn] = hrv.sdnn_ms;
  fv.values[kRmssd] = hrv.rmssd_ms;
  return fv;
}

FeatureTable feature_matrix(const dataset::Dataset& d, const dsp::PreprocessOptions& pre,
                            const FeatureOptions& opt) {
  if (d.empty()) throw Error(ErrorKind::EmptyDataset, "no segments to featurise");
  std::vector<FeatureVector> rows(d.size());
  parallel_for(d.size(), [&](std::size_t i) {
    rows[i] = extract_features(preprocess_segment(d[i], pre), opt);
  });

  FeatureTable t;
  t.values = Matrix(d.size(), kFeatureCount);
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::copy(rows[i].values.begin(), rows[i].values.end(), t.values.row(i).begin());
    t.labels.push_back(rows[i].label);
    t.subject_ids.push_back(d[i].subject_id);
    t.segment_ids.push_back(d[i].segment_id);
    t.flags.push_back(std::move(rows[i].quality_flags));
  }
  return t;
}

Matrix correlation_matrix(const Matrix& m) {
  const std::size_t n = m.rows();
  const std::size_t p = m.cols();
  std::vector<double> mean(p, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < p; ++c) mean[c] += m(r, c);
  }
  for (double& v : mean) v /= static_cast<double>(n);
  std::vector<bool> constant(p, true);
  for (std::size_t r = 1; r < n; ++r) {
    for (std::size_t c = 0; c < p; ++c) constant[c] = constant[c] && m(r, c) == m(0, c);
  }

  Matrix cov(p, p);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t a = 0; a < p; ++a) {
      const double da = m(r, a) - mean[a];
      for (std::size_t b = a; b < p; ++b) cov(a, b) += da * (m(r, b) - mean[b]);
    }
  }
  Matrix corr(p, p);
  for (std::size_t a = 0; a < p; ++a) {
    corr(a, a) = 1.0;
    for (std::size_t b = a + 1; b < p; ++b) {
      const double denom = std::sqrt(cov(a, a) * cov(b, b));
      const bool defined = !constant[a] && !constant[b] && denom > 0.0;
      const double rho = defined ? std::clamp(cov(a, b) / denom, -1.0, 1.0) : 0.0;
      corr(a, b) = rho;
      corr(b, a) = rho;
    }
  }
  return corr;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table,
                       const std::string& header_comment) {
  auto out = open_for_write(path);
  if (!header_comment.empty()) out << header_comment << '\n';
  for (const auto name : kNames) out << name << ',';
  out << "subject_id,segment_id,label\n";
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (double v : table.values.row(r)) out << csv::format_double(v) << ',';
    out << table.subject_ids[r] << ',' << table.segment_ids[r] << ',' << to_string(table.labels[r])
        << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

void write_correlation_csv(const std::filesystem::path& path, const Matrix& corr,
                           const std::string& header_comment) {
  auto out = open_for_write(path);
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "feature";
  for (std::size_t c = 0; c < corr.cols(); ++c) out << ',' << kNames[c];
  out << '\n';
  for (std::size_t r = 0; r < corr.rows(); ++r) {
    out << kNames[r];
    for (double v : corr.row(r)) out << ',' << csv::format_double(v);
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace afdetect::features
