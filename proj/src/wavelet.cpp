#include <algorithm>
#include <array>
#include <cmath>

#include "afdetect/dsp.hpp"
#include "afdetect/error.hpp"

namespace afdetect::dsp {

namespace {

constexpr std::size_t kTaps = 8;

constexpr std::array<double, kTaps> kScaling = {
    0.23037781330885523,  0.7148465705525415,  0.6308807679295904,  -0.02798376941698385,
    -0.18703481171888114, 0.030841381835986965, 0.032883011666982945, -0.010597401784997278,
};

constexpr std::array<double, kTaps> make_wavelet() {
  std::array<double, kTaps> g{};
  for (std::size_t n = 0; n < kTaps; ++n) {
    g[n] = (n % 2 == 0 ? 1.0 : -1.0) * kScaling[kTaps - 1 - n];
  }
  return g;
}

constexpr std::array<double, kTaps> kWavelet = make_wavelet();

double median_abs(std::span<const double> x) {
  std::vector<double> a(x.size());
  std::transform(x.begin(), x.end(), a.begin(), [](double v) { return std::abs(v); });
  const std::size_t mid = a.size() / 2;
  std::nth_element(a.begin(), a.begin() + static_cast<long>(mid), a.end());
  if (a.size() % 2 == 1) return a[mid];
  const double upper = a[mid];
  const double lower = *std::max_element(a.begin(), a.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

std::span<const double> db4_scaling_filter() noexcept { return kScaling; }
std::span<const double> db4_wavelet_filter() noexcept { return kWavelet; }

WaveletDecomposition dwt_decompose(std::span<const double> x, int levels) {
  if (levels < 1) throw Error(ErrorKind::TooShort, "wavelet levels must be >= 1");
  const std::size_t min_length = kTaps << levels;
  if (x.size() < min_length) {
    throw Error(ErrorKind::TooShort, "signal of " + std::to_string(x.size()) +
                                         " samples is too short for " + std::to_string(levels) +
                                         " levels (need " + std::to_string(min_length) + ")");
  }
  WaveletDecomposition w;
  w.levels = levels;
  w.original_length = x.size();

  std::vector<double> current(x.begin(), x.end());
  for (int level = 0; level < levels; ++level) {
    w.level_input_lengths.push_back(current.size());
    if (current.size() % 2 == 1) current.push_back(current.back());
    const std::size_t m = current.size();
    const std::size_t half = m / 2;
    std::vector<double> approx(half, 0.0);
    std::vector<double> detail(half, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
      double a = 0.0;
      double d = 0.0;
      for (std::size_t n = 0; n < kTaps; ++n) {
        const double v = current[(2 * k + n) % m];
        a += kScaling[n] * v;
        d += kWavelet[n] * v;
      }
      approx[k] = a;
      detail[k] = d;
    }
    w.details.push_back(std::move(detail));
    current = std::move(approx);
  }
  w.approximation = std::move(current);
  return w;
}

std::vector<double> dwt_reconstruct(const WaveletDecomposition& w) {
  std::vector<double> current = w.approximation;
  for (int level = w.levels - 1; level >= 0; --level) {
    const auto& detail = w.details[static_cast<std::size_t>(level)];
    const std::size_t half = current.size();
    const std::size_t m = 2 * half;
    std::vector<double> up(m, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
      for (std::size_t n = 0; n < kTaps; ++n) {
        up[(2 * k + n) % m] += kScaling[n] * current[k] + kWavelet[n] * detail[k];
      }
    }
    up.resize(w.level_input_lengths[static_cast<std::size_t>(level)]);
    current = std::move(up);
  }
  return current;
}

double soft_threshold(double c, double threshold) noexcept {
  const double shrunk = std::abs(c) - threshold;
  if (shrunk <= 0.0) return 0.0;
  return std::copysign(shrunk, c);
}

WaveletDecomposition soft_threshold(WaveletDecomposition w, double threshold) {
  if (!(threshold >= 0.0)) throw Error(ErrorKind::NegativeThreshold, std::to_string(threshold));
  for (auto& level : w.details) {
    for (double& c : level) c = soft_threshold(c, threshold);
  }
  return w;
}

double universal_threshold(const WaveletDecomposition& w) {
  const double sigma = median_abs(w.details.front()) / 0.6745;
  return sigma * std::sqrt(2.0 * std::log(static_cast<double>(w.original_length)));
}

std::vector<double> wavelet_denoise(std::span<const double> x, int levels) {
  auto w = dwt_decompose(x, levels);
  const double threshold = universal_threshold(w);
  return dwt_reconstruct(soft_threshold(std::move(w), threshold));
}

}  // namespace afdetect::dsp
