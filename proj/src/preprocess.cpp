#include "afdetect/dsp.hpp"

namespace afdetect::dsp {

ChannelTrace preprocess_trace(std::span<const double> x, double fs_hz, const PreprocessOptions& opt) {
  ChannelTrace t;
  t.raw.assign(x.begin(), x.end());
  t.denoised = opt.denoise ? wavelet_denoise(t.raw) : t.raw;
  t.detrended = opt.remove_baseline ? remove_baseline(t.denoised, fs_hz) : t.denoised;
  t.normalized = opt.normalize ? minmax_normalize(t.detrended) : t.detrended;
  return t;
}

std::vector<double> preprocess_channel(std::span<const double> x, double fs_hz,
                                       const PreprocessOptions& opt) {
  std::vector<double> y(x.begin(), x.end());
  if (opt.denoise) y = wavelet_denoise(y);
  if (opt.remove_baseline) y = remove_baseline(y, fs_hz);
  if (opt.normalize) y = minmax_normalize(y);
  return y;
}

}  // namespace afdetect::dsp
