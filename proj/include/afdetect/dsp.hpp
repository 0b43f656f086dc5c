#pragma once

// Signal conditioning: Daubechies-4 wavelet denoising, Butterworth filtering,
// min-max scaling and Welch spectral estimation.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace afdetect::dsp {

// ---- wavelets -------------------------------------------------------------

/// Daubechies scaling filter with 4 vanishing moments (8 taps, unit norm,
/// sum sqrt(2)).
std::span<const double> db4_scaling_filter() noexcept;
/// Quadrature mirror of the scaling filter: g[n] = (-1)^n h[7 - n].
std::span<const double> db4_wavelet_filter() noexcept;

inline constexpr int kDenoiseLevels = 4;

struct WaveletDecomposition {
  std::vector<double> approximation;
  std::vector<std::vector<double>> details;  // finest level first
  int levels = 0;
  std::size_t original_length = 0;
  std::vector<std::size_t> level_input_lengths;  // signal length entering each level
};

/// Mallat cascade with periodic extension; each level halves the length with
/// ceil(n/2) (odd inputs repeat their last sample). Requires
/// x.size() >= 8 * 2^levels (TooShort otherwise).
WaveletDecomposition dwt_decompose(std::span<const double> x, int levels);
std::vector<double> dwt_reconstruct(const WaveletDecomposition& w);

/// sign(c) * max(|c| - threshold, 0).
double soft_threshold(double c, double threshold) noexcept;
/// Shrinks every detail coefficient; the approximation is left untouched.
WaveletDecomposition soft_threshold(WaveletDecomposition w, double threshold);

/// Universal threshold sigma * sqrt(2 ln n), sigma = median(|finest detail|) / 0.6745.
double universal_threshold(const WaveletDecomposition& w);
std::vector<double> wavelet_denoise(std::span<const double> x, int levels = kDenoiseLevels);

// ---- IIR filters ----------------------------------------------------------

/// One second-order section, a0 == 1 (first-order sections have b2 = a2 = 0).
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct IirFilter {
  std::vector<double> numerator;
  std::vector<double> denominator;  // denominator[0] == 1
  int order = 0;
  double cutoff_hz = 0.0;
  double fs_hz = 0.0;
  std::vector<std::complex<double>> poles;  // empty for hand-built filters
  std::vector<Biquad> sections;             // same response factored; empty for hand-built filters
};

/// Bilinear-transform Butterworth designs with frequency pre-warping.
IirFilter design_butterworth_lowpass(int order, double cutoff_hz, double fs_hz);
IirFilter design_butterworth_highpass(int order, double cutoff_hz, double fs_hz);

/// |H(e^{j 2 pi f / fs})| of a single pass.
double magnitude_response(const IirFilter& f, double freq_hz);

/// Direct form II transposed; `state` holds len-1 delay values and is updated.
std::vector<double> lfilter(const IirFilter& f, std::span<const double> x, std::vector<double>& state);
/// Delay state that makes a constant input produce a constant output.
std::vector<double> steady_state(const IirFilter& f);

/// Zero-phase forward-backward filtering. The input is extended at both ends
/// by odd reflection about the end samples (2 x[0] - x[k]), covering at least 3x
/// the filter length and, for designed filters, long enough for the impulse
/// response to decay below 1e-12. Designed filters run as a cascade of
/// second-order sections, which keeps the low-cutoff designs well conditioned.
std::vector<double> filtfilt(const IirFilter& f, std::span<const double> x);

inline constexpr int kBaselineOrder = 4;
inline constexpr double kBaselineCutoffHz = 0.5;

/// x - filtfilt(butterworth_lowpass(4, 0.5 Hz), x).
std::vector<double> remove_baseline(std::span<const double> x, double fs_hz);

/// (x - min) / (max - min); DegenerateSignal for constant input.
std::vector<double> minmax_normalize(std::span<const double> x);

// ---- spectra --------------------------------------------------------------

struct PsdEstimate {
  std::vector<double> frequencies;  // 0 .. fs/2
  std::vector<double> power;        // one-sided, units^2 / Hz
  double resolution_hz = 0.0;
};

inline constexpr std::size_t kWelchSegment = 1024;

/// Hann window, 50 % overlap, per-segment mean removal, one-sided density.
PsdEstimate welch_psd(std::span<const double> x, double fs_hz,
                      std::size_t segment_length = kWelchSegment);

/// Trapezoidal integral of the (linearly interpolated) PSD over [f_lo, f_hi].
double bandpower(const PsdEstimate& psd, double f_lo, double f_hi);
double bandpower(std::span<const double> x, double fs_hz, double f_lo, double f_hi);

// ---- preprocessing chain --------------------------------------------------

struct PreprocessOptions {
  bool denoise = true;
  bool remove_baseline = true;
  bool normalize = true;
};

struct ChannelTrace {
  std::vector<double> raw;
  std::vector<double> denoised;
  std::vector<double> detrended;
  std::vector<double> normalized;
};

/// denoise -> baseline removal -> min-max, skipping disabled stages.
ChannelTrace preprocess_trace(std::span<const double> x, double fs_hz, const PreprocessOptions& opt);
std::vector<double> preprocess_channel(std::span<const double> x, double fs_hz,
                                       const PreprocessOptions& opt);

}  // namespace afdetect::dsp
