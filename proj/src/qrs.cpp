// Pan-Tompkins style R-peak detector. All filtering is zero-phase and the
// integration window is centred, so integrator peaks line up with the QRS
// complexes without delay compensation.

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <optional>

#include "afdetect/dsp.hpp"
#include "afdetect/features.hpp"

namespace afdetect::features {

namespace {

constexpr double kBandLoHz = 5.0;
constexpr double kBandHiHz = 15.0;
constexpr double kIntegrationS = 0.150;
constexpr double kRefractoryS = 0.200;
constexpr double kTWaveWindowS = 0.360;
constexpr double kLocateWindowS = 0.050;
constexpr double kLearningS = 2.0;
constexpr double kSearchbackFactor = 1.66;

struct Candidate {
  std::size_t index;
  double height;
  double slope;
};

std::vector<double> bandpass(std::span<const double> x, double fs) {
  const auto lp = dsp::design_butterworth_lowpass(2, kBandHiHz, fs);
  const auto hp = dsp::design_butterworth_highpass(2, kBandLoHz, fs);
  return dsp::filtfilt(hp, dsp::filtfilt(lp, x));
}

std::vector<double> five_point_derivative(const std::vector<double>& x, double fs) {
  const std::size_t n = x.size();
  const auto at = [&](long i) {
    return x[static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(n) - 1))];
  };
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long k = static_cast<long>(i);
    d[i] = (-at(k - 2) - 2.0 * at(k - 1) + 2.0 * at(k + 1) + at(k + 2)) * fs / 8.0;
  }
  return d;
}

std::vector<double> moving_average(const std::vector<double>& x, std::size_t width) {
  const std::size_t n = x.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  const std::size_t half = width / 2;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    y[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(width);
  }
  return y;
}

double window_max(const std::vector<double>& x, std::size_t centre, std::size_t half) {
  const std::size_t lo = centre >= half ? centre - half : 0;
  const std::size_t hi = std::min(x.size(), centre + half + 1);
  return *std::max_element(x.begin() + static_cast<long>(lo), x.begin() + static_cast<long>(hi));
}

}  // namespace

RPeakList detect_r_peaks(std::span<const double> ecg, double fs_hz) {
  RPeakList out;
  out.fs_hz = fs_hz;
  const std::size_t n = ecg.size();
  const auto refractory = static_cast<std::size_t>(std::lround(kRefractoryS * fs_hz));
  if (n <= 4 * refractory) return out;

  const std::vector<double> filtered = bandpass(ecg, fs_hz);
  std::vector<double> slope = five_point_derivative(filtered, fs_hz);
  std::vector<double> energy(n);
  std::transform(slope.begin(), slope.end(), energy.begin(), [](double v) { return v * v; });
  for (double& v : slope) v = std::abs(v);
  const auto width = static_cast<std::size_t>(std::lround(kIntegrationS * fs_hz)) | 1u;
  const std::vector<double> mwi = moving_average(energy, width);

  const double global_max = *std::max_element(mwi.begin(), mwi.end());
  if (!(global_max > 0.0)) return out;

  std::vector<Candidate> candidates;
  const auto slope_half = static_cast<std::size_t>(std::lround(0.075 * fs_hz));
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (mwi[i] > mwi[i - 1] && mwi[i] >= mwi[i + 1] && mwi[i] > 1e-9 * global_max) {
      candidates.push_back({i, mwi[i], window_max(slope, i, slope_half)});
    }
  }

  // Learning phase: running estimates seeded from the first two seconds, or the
  // whole record when the opening is flat.
  const std::size_t learn = std::min(n, static_cast<std::size_t>(kLearningS * fs_hz));
  double learn_max = *std::max_element(mwi.begin(), mwi.begin() + static_cast<long>(learn));
  double learn_mean = std::accumulate(mwi.begin(), mwi.begin() + static_cast<long>(learn), 0.0) /
                      static_cast<double>(learn);
  if (learn_max < 0.05 * global_max) {
    learn_max = global_max;
    learn_mean = std::accumulate(mwi.begin(), mwi.end(), 0.0) / static_cast<double>(n);
  }
  double spki = 0.25 * learn_max;
  double npki = 0.5 * learn_mean;
  const auto threshold = [&] { return npki + 0.25 * (spki - npki); };

  std::vector<Candidate> beats;
  std::deque<double> recent_rr;
  const auto rr_average = [&]() -> std::optional<double> {
    if (recent_rr.empty()) return std::nullopt;
    return std::accumulate(recent_rr.begin(), recent_rr.end(), 0.0) /
           static_cast<double>(recent_rr.size());
  };
  const auto push_rr = [&](double rr) {
    recent_rr.push_back(rr);
    if (recent_rr.size() > 8) recent_rr.pop_front();
  };

  for (const Candidate& c : candidates) {
    if (c.height <= threshold()) {
      npki = 0.125 * c.height + 0.875 * npki;
      continue;
    }
    if (!beats.empty()) {
      const Candidate& last = beats.back();
      const std::size_t gap = c.index - last.index;
      if (gap < refractory) {
        if (c.height > last.height) beats.back() = c;
        continue;
      }
      if (gap < static_cast<std::size_t>(kTWaveWindowS * fs_hz) && c.slope < 0.5 * last.slope) {
        npki = 0.125 * c.height + 0.875 * npki;
        continue;
      }
      // Searchback for a beat missed in a long gap, using half the threshold.
      const auto avg = rr_average();
      if (avg && static_cast<double>(gap) > kSearchbackFactor * *avg) {
        const Candidate* best = nullptr;
        for (const Candidate& m : candidates) {
          if (m.index <= last.index + refractory || m.index + refractory >= c.index) continue;
          if (m.height > 0.5 * threshold() && (!best || m.height > best->height)) best = &m;
        }
        if (best) {
          spki = 0.25 * best->height + 0.75 * spki;
          push_rr(static_cast<double>(best->index - last.index));
          beats.push_back(*best);
        }
      }
      push_rr(static_cast<double>(c.index - beats.back().index));
    }
    spki = 0.125 * c.height + 0.875 * spki;
    beats.push_back(c);
  }

  // Locate each R peak as the ECG maximum near the integrator peak.
  const auto locate = static_cast<std::size_t>(std::lround(kLocateWindowS * fs_hz));
  for (const Candidate& b : beats) {
    const std::size_t lo = b.index >= locate ? b.index - locate : 0;
    const std::size_t hi = std::min(n, b.index + locate + 1);
    const auto it = std::max_element(ecg.begin() + static_cast<long>(lo), ecg.begin() + static_cast<long>(hi));
    const auto r = static_cast<std::size_t>(it - ecg.begin());
    auto& peaks = out.sample_indices;
    if (!peaks.empty() && r < peaks.back() + refractory) {
      if (ecg[r] > ecg[peaks.back()]) peaks.back() = r;
      continue;
    }
    peaks.push_back(r);
  }
  return out;
}

}  // namespace afdetect::features
