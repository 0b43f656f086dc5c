#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include "afdetect/dsp.hpp"
#include "afdetect/error.hpp"

namespace afdetect::dsp {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  void execute() { fftw_execute(plan_); }
  double power(std::size_t k) const { return out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1]; }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_{};
};

}  // namespace

PsdEstimate welch_psd(std::span<const double> x, double fs_hz, std::size_t segment_length) {
  if (segment_length < 2 || x.size() < segment_length) {
    throw Error(ErrorKind::TooShort, "Welch estimate needs at least " +
                                         std::to_string(segment_length) + " samples");
  }
  const std::size_t step = segment_length / 2;
  const std::size_t n_segments = (x.size() - segment_length) / step + 1;
  const std::size_t n_bins = segment_length / 2 + 1;

  std::vector<double> window(segment_length);
  double window_power = 0.0;
  for (std::size_t i = 0; i < segment_length; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(segment_length));
    window_power += window[i] * window[i];
  }

  RealFft fft(segment_length);
  std::vector<double> acc(n_bins, 0.0);
  for (std::size_t s = 0; s < n_segments; ++s) {
    const auto seg = x.subspan(s * step, segment_length);
    double mean = 0.0;
    for (double v : seg) mean += v;
    mean /= static_cast<double>(segment_length);
    double* in = fft.input();
    for (std::size_t i = 0; i < segment_length; ++i) in[i] = (seg[i] - mean) * window[i];
    fft.execute();
    for (std::size_t k = 0; k < n_bins; ++k) acc[k] += fft.power(k);
  }

  PsdEstimate psd;
  psd.resolution_hz = fs_hz / static_cast<double>(segment_length);
  psd.frequencies.resize(n_bins);
  psd.power.resize(n_bins);
  const double scale = 1.0 / (fs_hz * window_power * static_cast<double>(n_segments));
  const bool even = segment_length % 2 == 0;
  for (std::size_t k = 0; k < n_bins; ++k) {
    psd.frequencies[k] = static_cast<double>(k) * psd.resolution_hz;
    const bool unpaired = k == 0 || (even && k == n_bins - 1);
    psd.power[k] = acc[k] * scale * (unpaired ? 1.0 : 2.0);
  }
  return psd;
}

double bandpower(const PsdEstimate& psd, double f_lo, double f_hi) {
  const double nyquist = psd.frequencies.back();
  if (!(f_lo >= 0.0 && f_lo < f_hi && f_hi <= nyquist + 1e-12)) {
    throw Error(ErrorKind::BadBand, "band [" + std::to_string(f_lo) + ", " + std::to_string(f_hi) +
                                        "] Hz is empty or outside [0, Nyquist]");
  }
  const auto& f = psd.frequencies;
  const auto& p = psd.power;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    const double a = std::max(f_lo, f[i]);
    const double b = std::min(f_hi, f[i + 1]);
    if (b <= a) continue;
    const double slope = (p[i + 1] - p[i]) / (f[i + 1] - f[i]);
    const double pa = p[i] + slope * (a - f[i]);
    const double pb = p[i] + slope * (b - f[i]);
    total += 0.5 * (pa + pb) * (b - a);
  }
  return total;
}

double bandpower(std::span<const double> x, double fs_hz, double f_lo, double f_hi) {
  if (!(f_lo >= 0.0 && f_lo < f_hi && f_hi <= fs_hz / 2.0)) {
    throw Error(ErrorKind::BadBand, "band [" + std::to_string(f_lo) + ", " + std::to_string(f_hi) +
                                        "] Hz is empty or outside [0, Nyquist]");
  }
  return bandpower(welch_psd(x, fs_hz), f_lo, f_hi);
}

}  // namespace afdetect::dsp
