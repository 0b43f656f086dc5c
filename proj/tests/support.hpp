#pragma once

#include <cmath>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "afdetect/dataset.hpp"
#include "afdetect/matrix.hpp"
#include "afdetect/random.hpp"

namespace testing {

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("afdetect_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

inline bool same_segment(const afdetect::dataset::Segment& a, const afdetect::dataset::Segment& b) {
  return a.subject_id == b.subject_id && a.segment_id == b.segment_id && a.label == b.label &&
         bit_equal(a.ppg, b.ppg) && bit_equal(a.ecg, b.ecg);
}

inline std::vector<double> sinusoid(std::size_t n, double fs, double f_hz, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * f_hz * static_cast<double>(i) / fs + phase);
  }
  return x;
}

inline std::vector<double> gaussian_noise(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  afdetect::Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = sd * rng.normal();
  return x;
}

inline double rms(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

inline double rms_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

// Amplitude of the f_hz component by projection onto sin/cos (exact for
// frequencies on the DFT grid).
inline double tone_amplitude(const std::vector<double>& x, double fs, double f_hz) {
  double c = 0.0, s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 2.0 * std::numbers::pi * f_hz * static_cast<double>(i) / fs;
    c += x[i] * std::cos(w);
    s += x[i] * std::sin(w);
  }
  return 2.0 * std::hypot(c, s) / static_cast<double>(x.size());
}

inline afdetect::Matrix random_matrix(std::size_t rows, std::size_t cols, afdetect::Rng& rng) {
  afdetect::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

}  // namespace testing

namespace testing {

struct BeatMatch {
  std::size_t matched = 0;
  std::size_t missed = 0;
  std::size_t spurious = 0;
  double worst_offset_s = 0.0;
};

// One-to-one matching of detections to true beat times within +/- tol_s,
// scanning both sorted lists together.
inline BeatMatch match_beats(const std::vector<double>& truth_s, const std::vector<std::size_t>& peaks,
                             double fs_hz, double tol_s) {
  BeatMatch m;
  std::size_t j = 0;
  for (double t : truth_s) {
    while (j < peaks.size() && static_cast<double>(peaks[j]) / fs_hz < t - tol_s) {
      ++m.spurious;
      ++j;
    }
    if (j < peaks.size() && std::abs(static_cast<double>(peaks[j]) / fs_hz - t) <= tol_s) {
      m.worst_offset_s = std::max(m.worst_offset_s, std::abs(static_cast<double>(peaks[j]) / fs_hz - t));
      ++m.matched;
      ++j;
    } else {
      ++m.missed;
    }
  }
  m.spurious += peaks.size() - j;
  return m;
}

}  // namespace testing
