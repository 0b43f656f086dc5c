#include <algorithm>
#include <cmath>
#include <complex>
#include <array>
#include <numbers>

#include "doctest.h"
#include "afdetect/dsp.hpp"
#include "afdetect/error.hpp"
#include "support.hpp"

using namespace afdetect;
using namespace afdetect::dsp;

namespace {

constexpr double kFs = 125.0;
constexpr std::size_t kN = 10000;

bool throws_kind(auto&& fn, ErrorKind kind) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

// Analytic magnitude of a bilinear Butterworth design with prewarping.
double analytic_lowpass(int order, double fc, double fs, double f) {
  const double r = std::tan(std::numbers::pi * f / fs) / std::tan(std::numbers::pi * fc / fs);
  return 1.0 / std::sqrt(1.0 + std::pow(r, 2 * order));
}

double analytic_highpass(int order, double fc, double fs, double f) {
  const double r = std::tan(std::numbers::pi * fc / fs) / std::tan(std::numbers::pi * f / fs);
  return 1.0 / std::sqrt(1.0 + std::pow(r, 2 * order));
}

double polynomial_magnitude(const IirFilter& f, double freq) {
  const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * freq / f.fs_hz);
  std::complex<double> num = 0.0, den = 0.0, zk = 1.0;
  for (std::size_t k = 0; k < std::max(f.numerator.size(), f.denominator.size()); ++k) {
    if (k < f.numerator.size()) num += f.numerator[k] * zk;
    if (k < f.denominator.size()) den += f.denominator[k] * zk;
    zk *= z;
  }
  return std::abs(num / den);
}

// Direct difference equation, zero initial conditions.
std::vector<double> naive_filter(const IirFilter& f, const std::vector<double>& x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < f.numerator.size() && k <= n; ++k) acc += f.numerator[k] * x[n - k];
    for (std::size_t k = 1; k < f.denominator.size() && k <= n; ++k) acc -= f.denominator[k] * y[n - k];
    y[n] = acc / f.denominator[0];
  }
  return y;
}

std::vector<std::size_t> local_maxima(const std::vector<double>& x, std::size_t from, std::size_t to) {
  std::vector<std::size_t> out;
  for (std::size_t i = std::max<std::size_t>(from, 1); i + 1 < std::min(to, x.size()); ++i) {
    if (x[i] > x[i - 1] && x[i] >= x[i + 1]) out.push_back(i);
  }
  return out;
}

// Welch by direct DFT, used as an oracle on short inputs.
std::vector<double> naive_welch(const std::vector<double>& x, double fs, std::size_t seg) {
  const std::size_t step = seg / 2;
  const std::size_t count = (x.size() - seg) / step + 1;
  std::vector<double> w(seg);
  double wp = 0.0;
  for (std::size_t i = 0; i < seg; ++i) {
    w[i] = std::pow(std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(seg)), 2);
    wp += w[i] * w[i];
  }
  std::vector<double> p(seg / 2 + 1, 0.0);
  for (std::size_t s = 0; s < count; ++s) {
    double mean = 0.0;
    for (std::size_t i = 0; i < seg; ++i) mean += x[s * step + i];
    mean /= static_cast<double>(seg);
    for (std::size_t k = 0; k < p.size(); ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t i = 0; i < seg; ++i) {
        acc += (x[s * step + i] - mean) * w[i] *
               std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i) / static_cast<double>(seg));
      }
      const double two_sided = std::norm(acc) / (fs * wp * static_cast<double>(count));
      p[k] += (k == 0 || k == seg / 2) ? two_sided : 2.0 * two_sided;
    }
  }
  return p;
}

}  // namespace

TEST_CASE("db4 filter pair properties") {
  const auto h = db4_scaling_filter();
  const auto g = db4_wavelet_filter();
  REQUIRE(h.size() == 8);
  REQUIRE(g.size() == 8);
  double sum = 0.0, energy = 0.0;
  for (double v : h) {
    sum += v;
    energy += v * v;
  }
  CHECK(sum == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(energy == doctest::Approx(1.0).epsilon(1e-12));
  for (int shift = 2; shift < 8; shift += 2) {
    double dot = 0.0;
    for (int n = 0; n + shift < 8; ++n) dot += h[n] * h[n + shift];
    CHECK(std::abs(dot) < 1e-12);
  }
  for (int n = 0; n < 8; ++n) CHECK(g[n] == (n % 2 ? -1.0 : 1.0) * h[7 - n]);
  for (int p = 0; p < 4; ++p) {
    double moment = 0.0;
    for (int n = 0; n < 8; ++n) moment += std::pow(n, p) * g[n];
    CHECK(std::abs(moment) < 1e-9);
  }
}

TEST_CASE("decomposition lengths and trivial inputs") {
  const auto x = testing::gaussian_noise(kN, 1);
  const auto w = dwt_decompose(x, 4);
  REQUIRE(w.details.size() == 4);
  CHECK(w.details[0].size() == 5000);
  CHECK(w.details[1].size() == 2500);
  CHECK(w.details[2].size() == 1250);
  CHECK(w.details[3].size() == 625);
  CHECK(w.approximation.size() == 625);
  CHECK(w.original_length == kN);

  const auto zeros = dwt_decompose(std::vector<double>(kN, 0.0), 4);
  for (const auto& d : zeros.details) CHECK(std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; }));
  CHECK(std::all_of(zeros.approximation.begin(), zeros.approximation.end(), [](double v) { return v == 0.0; }));

  std::vector<double> scaling(64, 0.0);
  const auto h = db4_scaling_filter();
  std::copy(h.begin(), h.end(), scaling.begin());
  const auto one = dwt_decompose(scaling, 1);
  double detail_energy = 0.0;
  for (double v : one.details[0]) detail_energy += v * v;
  CHECK(detail_energy < 1e-20);

  CHECK(throws_kind([] { dwt_decompose(std::vector<double>(127, 1.0), 4); }, ErrorKind::TooShort));
}

TEST_CASE("perfect reconstruction") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = testing::gaussian_noise(kN, seed, 10.0);
    const auto y = dwt_reconstruct(dwt_decompose(x, 4));
    REQUIRE(y.size() == x.size());
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(x[i] - y[i]));
    CHECK(err < 1e-8);
  }
  for (std::size_t n : {777u, 1001u, 129u}) {
    const auto x = testing::gaussian_noise(n, n);
    const auto y = dwt_reconstruct(dwt_decompose(x, 3));
    REQUIRE(y.size() == n);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(x[i] - y[i]));
    CHECK(err < 1e-10);
  }
}

TEST_CASE("soft thresholding") {
  CHECK(soft_threshold(1.5, 1.0) == 0.5);
  CHECK(soft_threshold(-0.4, 1.0) == 0.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  const auto w = dwt_decompose(testing::gaussian_noise(2048, 4), 4);
  const auto same = soft_threshold(w, 0.0);
  for (int j = 0; j < 4; ++j) CHECK(testing::bit_equal(same.details[j], w.details[j]));
  for (double t : {0.1, 0.5, 2.0}) {
    const auto s = soft_threshold(w, t);
    CHECK(testing::bit_equal(s.approximation, w.approximation));
    for (int j = 0; j < 4; ++j) {
      double before = 0.0, after = 0.0;
      for (double v : w.details[j]) before += v * v;
      for (double v : s.details[j]) after += v * v;
      CHECK(after <= before);
    }
  }
  CHECK(throws_kind([&] { soft_threshold(w, -1.0); }, ErrorKind::NegativeThreshold));
}

TEST_CASE("universal threshold from the finest detail MAD") {
  const auto x = testing::gaussian_noise(4096, 13, 0.3);
  const auto w = dwt_decompose(x, 4);
  std::vector<double> mag;
  for (double v : w.details[0]) mag.push_back(std::abs(v));
  std::sort(mag.begin(), mag.end());
  const std::size_t m = mag.size();
  const double median = m % 2 ? mag[m / 2] : 0.5 * (mag[m / 2 - 1] + mag[m / 2]);
  const double expected = median / 0.6745 * std::sqrt(2.0 * std::log(4096.0));
  CHECK(universal_threshold(w) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("wavelet denoising") {
  const auto clean = testing::sinusoid(kN, kFs, 1.0);
  const auto noise = testing::gaussian_noise(kN, 21, std::sqrt(0.5 / 10.0));  // 10 dB
  std::vector<double> noisy(kN);
  for (std::size_t i = 0; i < kN; ++i) noisy[i] = clean[i] + noise[i];
  const auto out = wavelet_denoise(noisy);
  CHECK(testing::rms_diff(out, clean) < testing::rms_diff(noisy, clean));

  const auto zero = wavelet_denoise(std::vector<double>(kN, 0.0));
  CHECK(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0.0; }));

  const auto smooth = wavelet_denoise(clean);
  CHECK(testing::rms_diff(smooth, clean) < 0.02 * testing::rms(clean));
}

TEST_CASE("Butterworth designs match the analytic response") {
  const auto lp = design_butterworth_lowpass(4, 0.5, kFs);
  CHECK(std::abs(magnitude_response(lp, 0.0) - 1.0) < 1e-9);
  CHECK(magnitude_response(lp, 0.5) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.01));
  CHECK(magnitude_response(lp, 2.0) <= 0.004);
  for (double f : {0.1, 0.3, 0.5, 1.0, 2.0, 5.0, 20.0, 60.0}) {
    CHECK(magnitude_response(lp, f) == doctest::Approx(analytic_lowpass(4, 0.5, kFs, f)).epsilon(1e-6));
    CHECK(polynomial_magnitude(lp, f) == doctest::Approx(magnitude_response(lp, f)).epsilon(1e-9));
  }
  REQUIRE(lp.poles.size() == 4);
  for (const auto& p : lp.poles) CHECK(std::abs(p) < 1.0);

  const auto hp = design_butterworth_highpass(2, 5.0, kFs);
  CHECK(std::abs(magnitude_response(hp, kFs / 2.0) - 1.0) < 1e-9);
  CHECK(magnitude_response(hp, 0.0) < 1e-12);
  for (double f : {1.0, 5.0, 10.0, 40.0}) {
    CHECK(magnitude_response(hp, f) == doctest::Approx(analytic_highpass(2, 5.0, kFs, f)).epsilon(1e-6));
  }

  CHECK(throws_kind([] { design_butterworth_lowpass(4, 70.0, kFs); }, ErrorKind::BadCutoff));
  CHECK(throws_kind([] { design_butterworth_lowpass(4, 0.0, kFs); }, ErrorKind::BadCutoff));
  CHECK(throws_kind([] { design_butterworth_lowpass(0, 1.0, kFs); }, ErrorKind::BadCutoff));
}

TEST_CASE("lfilter agrees with the difference equation") {
  const auto f = design_butterworth_lowpass(3, 4.0, kFs);
  const auto x = testing::gaussian_noise(500, 5);
  std::vector<double> state(f.denominator.size() - 1, 0.0);
  const auto y = lfilter(f, x, state);
  const auto ref = naive_filter(f, x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-9));

  auto z = steady_state(f);
  const auto flat = lfilter(f, std::vector<double>(50, 1.0), z);
  for (double v : flat) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("filtfilt is zero phase") {
  IirFilter identity;
  identity.numerator = {1.0};
  identity.denominator = {1.0};
  std::vector<double> impulse(64, 0.0);
  impulse[20] = 1.0;
  CHECK(filtfilt(identity, impulse) == impulse);

  const auto lp = design_butterworth_lowpass(4, 0.5, kFs);
  const auto slow = testing::sinusoid(kN, kFs, 0.1);
  const auto slow_out = filtfilt(lp, slow);
  CHECK(testing::tone_amplitude(slow_out, kFs, 0.1) == doctest::Approx(1.0).epsilon(0.02));
  const auto peaks_in = local_maxima(slow, 100, kN - 100);
  const auto peaks_out = local_maxima(slow_out, 100, kN - 100);
  REQUIRE(peaks_in.size() == peaks_out.size());
  for (std::size_t i = 0; i < peaks_in.size(); ++i) {
    CHECK(std::abs(static_cast<long>(peaks_in[i]) - static_cast<long>(peaks_out[i])) <= 1);
  }

  // Away from the ends (where the output settles to the local level of the end
  // samples) the 2 Hz tone is gone.
  const auto fast_out = filtfilt(lp, testing::sinusoid(kN, kFs, 2.0));
  CHECK(testing::tone_amplitude(fast_out, kFs, 2.0) < 0.001);
  double worst = 0.0;
  for (std::size_t i = 625; i + 625 < kN; ++i) worst = std::max(worst, std::abs(fast_out[i]));
  CHECK(worst < 0.001);

  const auto x = testing::gaussian_noise(3000, 9);
  auto reversed = x;
  std::reverse(reversed.begin(), reversed.end());
  auto back = filtfilt(lp, reversed);
  std::reverse(back.begin(), back.end());
  const auto forward = filtfilt(lp, x);
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(std::abs(back[i] - forward[i]) < 1e-9);

  CHECK(throws_kind([&] { filtfilt(lp, std::vector<double>(15, 1.0)); }, ErrorKind::TooShort));
}

TEST_CASE("baseline removal") {
  const auto drift = testing::sinusoid(kN, kFs, 0.1, 1.0);
  const auto pulse = testing::sinusoid(kN, kFs, 1.2, 0.5);
  std::vector<double> x(kN);
  for (std::size_t i = 0; i < kN; ++i) x[i] = drift[i] + pulse[i];
  const auto y = remove_baseline(x, kFs);
  CHECK(testing::tone_amplitude(y, kFs, 1.2) == doctest::Approx(0.5).epsilon(0.05));
  CHECK(testing::tone_amplitude(y, kFs, 0.1) < 0.05 * testing::tone_amplitude(x, kFs, 0.1));

  const auto flat = remove_baseline(std::vector<double>(kN, 3.25), kFs);
  for (double v : flat) REQUIRE(std::abs(v) < 1e-12);

  const auto kept = remove_baseline(pulse, kFs);
  CHECK(testing::rms_diff(kept, pulse) < 0.02 * testing::rms(pulse));
}

TEST_CASE("min-max normalization") {
  CHECK(minmax_normalize(std::vector<double>{0.0, 5.0, 10.0}) == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(minmax_normalize(std::vector<double>{0.0, 1.0, 0.25}) == std::vector<double>{0.0, 1.0, 0.25});
  CHECK(throws_kind([] { minmax_normalize(std::vector<double>{3.0, 3.0, 3.0}); }, ErrorKind::DegenerateSignal));
  const auto x = testing::gaussian_noise(1000, 3);
  std::vector<double> affine(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) affine[i] = 7.5 * x[i] - 120.0;
  const auto a = minmax_normalize(x);
  const auto b = minmax_normalize(affine);
  CHECK(*std::min_element(a.begin(), a.end()) == 0.0);
  CHECK(*std::max_element(a.begin(), a.end()) == 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(std::abs(a[i] - b[i]) < 1e-12);
}

TEST_CASE("Welch estimate") {
  const auto x = testing::gaussian_noise(4096, 17);
  const auto psd = welch_psd(x, kFs, 256);
  const auto ref = naive_welch(x, kFs, 256);
  REQUIRE(psd.power.size() == ref.size());
  for (std::size_t k = 0; k < ref.size(); ++k) CHECK(psd.power[k] == doctest::Approx(ref[k]).epsilon(1e-9));
  CHECK(psd.frequencies.front() == 0.0);
  CHECK(psd.frequencies.back() == kFs / 2.0);
  CHECK(psd.resolution_hz == kFs / 256.0);

  const auto noise = testing::gaussian_noise(kN, 5);
  CHECK(bandpower(noise, kFs, 0.0, kFs / 2.0) == doctest::Approx(1.0).epsilon(0.05));

  const auto tone = testing::sinusoid(kN, kFs, 2.0);
  const auto tp = welch_psd(tone, kFs);
  const auto peak = std::max_element(tp.power.begin(), tp.power.end()) - tp.power.begin();
  CHECK(std::abs(tp.frequencies[static_cast<std::size_t>(peak)] - 2.0) <= tp.resolution_hz);

  const auto zero = welch_psd(std::vector<double>(2048, 0.0), kFs);
  CHECK(std::all_of(zero.power.begin(), zero.power.end(), [](double v) { return v == 0.0; }));
  CHECK(throws_kind([] { welch_psd(std::vector<double>(1000, 0.0), kFs); }, ErrorKind::TooShort));
}

TEST_CASE("bandpower") {
  const auto tone = testing::sinusoid(kN, kFs, 2.0);
  CHECK(bandpower(tone, kFs, 0.5, 4.0) == doctest::Approx(0.5).epsilon(0.05));
  CHECK(bandpower(tone, kFs, 10.0, 40.0) < 1e-3);
  CHECK(throws_kind([&] { bandpower(tone, kFs, 4.0, 0.5); }, ErrorKind::BadBand));
  CHECK(throws_kind([&] { bandpower(tone, kFs, 1.0, 70.0); }, ErrorKind::BadBand));

  const auto psd = welch_psd(testing::gaussian_noise(kN, 8), kFs);
  for (auto [f1, f2, f3] : {std::array{0.5, 4.0, 40.0}, std::array{0.3, 0.55, 61.1}, std::array{1.0, 1.1, 1.2}}) {
    const double whole = bandpower(psd, f1, f3);
    CHECK(bandpower(psd, f1, f2) + bandpower(psd, f2, f3) == doctest::Approx(whole).epsilon(1e-9));
  }
}
