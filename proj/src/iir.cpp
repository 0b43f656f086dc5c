#include <algorithm>
#include <cmath>
#include <numbers>

#include "afdetect/dsp.hpp"
#include "afdetect/error.hpp"

namespace afdetect::dsp {

namespace {

using cplx = std::complex<double>;

// Coefficients of prod_k (1 - r_k z^-1), highest power of z^-1 last.
std::vector<double> expand_roots(const std::vector<cplx>& roots) {
  std::vector<cplx> c{1.0};
  for (const cplx& r : roots) {
    c.push_back(0.0);
    for (std::size_t i = c.size() - 1; i > 0; --i) c[i] -= r * c[i - 1];
  }
  std::vector<double> out(c.size());
  std::transform(c.begin(), c.end(), out.begin(), [](cplx v) { return v.real(); });
  return out;
}

std::vector<double> binomial_row(int order, double sign) {
  std::vector<double> row{1.0};
  for (int k = 0; k < order; ++k) {
    row.push_back(0.0);
    for (std::size_t i = row.size() - 1; i > 0; --i) row[i] += sign * row[i - 1];
  }
  return row;
}

IirFilter butterworth(int order, double cutoff_hz, double fs_hz, bool highpass) {
  if (order < 1) throw Error(ErrorKind::BadCutoff, "filter order must be >= 1");
  if (!(cutoff_hz > 0.0 && cutoff_hz < fs_hz / 2.0)) {
    throw Error(ErrorKind::BadCutoff, "cutoff " + std::to_string(cutoff_hz) +
                                          " Hz outside (0, " + std::to_string(fs_hz / 2.0) + ")");
  }
  const double two_fs = 2.0 * fs_hz;
  const double warped = two_fs * std::tan(std::numbers::pi * cutoff_hz / fs_hz);

  IirFilter f;
  f.order = order;
  f.cutoff_hz = cutoff_hz;
  f.fs_hz = fs_hz;
  for (int k = 0; k < order; ++k) {
    const double angle = std::numbers::pi * (2.0 * k + 1.0 + order) / (2.0 * order);
    const cplx analog = warped * std::polar(1.0, angle);
    f.poles.push_back((two_fs + analog) / (two_fs - analog));
  }
  f.denominator = expand_roots(f.poles);
  f.numerator = binomial_row(order, highpass ? -1.0 : 1.0);

  // Unit gain at DC (low-pass) or Nyquist (high-pass).
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < f.numerator.size(); ++i) {
    const double s = highpass && (i % 2 == 1) ? -1.0 : 1.0;
    num += s * f.numerator[i];
    den += s * f.denominator[i];
  }
  const double gain = den / num;
  for (double& b : f.numerator) b *= gain;

  // Conjugate pairs k, order-1-k; the middle pole of an odd order is real.
  const double z = highpass ? -1.0 : 1.0;
  for (int k = 0; k < order / 2; ++k) {
    const cplx p = f.poles[static_cast<std::size_t>(k)];
    Biquad s;
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    s.b1 = highpass ? -2.0 : 2.0;
    s.b2 = 1.0;
    const double g = (1.0 + s.a1 * z + s.a2) / (1.0 + s.b1 * z + s.b2);
    s.b0 = g;
    s.b1 *= g;
    s.b2 *= g;
    f.sections.push_back(s);
  }
  if (order % 2 == 1) {
    const double p = f.poles[static_cast<std::size_t>(order / 2)].real();
    Biquad s;
    s.a1 = -p;
    s.b1 = highpass ? -1.0 : 1.0;
    const double g = (1.0 + s.a1 * z) / (1.0 + s.b1 * z);
    s.b0 = g;
    s.b1 *= g;
    f.sections.push_back(s);
  }
  return f;
}

IirFilter section_filter(const Biquad& s) {
  IirFilter f;
  f.numerator = {s.b0, s.b1, s.b2};
  f.denominator = {1.0, s.a1, s.a2};
  return f;
}

double max_pole_radius(const IirFilter& f) {
  double r = 0.0;
  for (const auto& p : f.poles) r = std::max(r, std::abs(p));
  return r;
}

}  // namespace

IirFilter design_butterworth_lowpass(int order, double cutoff_hz, double fs_hz) {
  return butterworth(order, cutoff_hz, fs_hz, false);
}

IirFilter design_butterworth_highpass(int order, double cutoff_hz, double fs_hz) {
  return butterworth(order, cutoff_hz, fs_hz, true);
}

double magnitude_response(const IirFilter& f, double freq_hz) {
  const double omega = 2.0 * std::numbers::pi * freq_hz / f.fs_hz;
  const cplx zinv = std::polar(1.0, -omega);
  const auto eval = [&](const std::vector<double>& c) {
    cplx acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * zinv + *it;
    return acc;
  };
  return std::abs(eval(f.numerator) / eval(f.denominator));
}

std::vector<double> steady_state(const IirFilter& f) {
  const std::size_t len = std::max(f.numerator.size(), f.denominator.size());
  std::vector<double> b(f.numerator), a(f.denominator);
  b.resize(len, 0.0);
  a.resize(len, 0.0);
  double sum_b = 0.0;
  double sum_a = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    sum_b += b[i];
    sum_a += a[i];
  }
  const double dc = sum_b / sum_a;
  // z_i = sum_{k > i} (b_k - a_k * dc)
  std::vector<double> zi(len - 1, 0.0);
  double acc = 0.0;
  for (std::size_t k = len - 1; k >= 1; --k) {
    acc += b[k] - a[k] * dc;
    zi[k - 1] = acc;
  }
  return zi;
}

std::vector<double> lfilter(const IirFilter& f, std::span<const double> x, std::vector<double>& state) {
  const std::size_t len = std::max(f.numerator.size(), f.denominator.size());
  std::vector<double> b(f.numerator), a(f.denominator);
  b.resize(len, 0.0);
  a.resize(len, 0.0);
  const double a0 = a[0];
  for (double& v : b) v /= a0;
  for (double& v : a) v /= a0;
  state.resize(len - 1, 0.0);

  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double xn = x[n];
    const double yn = b[0] * xn + (len > 1 ? state[0] : 0.0);
    for (std::size_t i = 0; i + 1 < len; ++i) {
      const double next = i + 2 < len ? state[i + 1] : 0.0;
      state[i] = b[i + 1] * xn + next - a[i + 1] * yn;
    }
    y[n] = yn;
  }
  return y;
}

std::vector<double> filtfilt(const IirFilter& f, std::span<const double> x) {
  const std::size_t len = std::max(f.numerator.size(), f.denominator.size());
  const std::size_t min_pad = 3 * len;
  if (x.size() <= min_pad) {
    throw Error(ErrorKind::TooShort, "filtfilt needs more than " + std::to_string(min_pad) + " samples");
  }
  std::size_t pad = min_pad;
  const double r = max_pole_radius(f);
  if (r > 0.0 && r < 1.0) {
    pad = std::max(pad, static_cast<std::size_t>(std::ceil(std::log(1e-12) / std::log(r))));
  }
  pad = std::min(pad, x.size() - 1);

  const std::size_t n = x.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i > 0; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  std::vector<IirFilter> stages;
  if (f.sections.empty()) {
    stages.push_back(f);
  } else {
    for (const Biquad& s : f.sections) stages.push_back(section_filter(s));
  }
  std::vector<std::vector<double>> zi;
  for (const auto& st : stages) zi.push_back(steady_state(st));
  // Each stage starts in the steady state of its own first input sample.
  const auto pass = [&](std::vector<double> in) {
    for (std::size_t k = 0; k < stages.size(); ++k) {
      std::vector<double> state(zi[k]);
      for (double& s : state) s *= in.front();
      in = lfilter(stages[k], in, state);
    }
    return in;
  };

  std::vector<double> y = pass(ext);
  std::reverse(y.begin(), y.end());
  y = pass(y);
  std::reverse(y.begin(), y.end());
  return {y.begin() + static_cast<long>(pad), y.begin() + static_cast<long>(pad + n)};
}

std::vector<double> remove_baseline(std::span<const double> x, double fs_hz) {
  const IirFilter lp = design_butterworth_lowpass(kBaselineOrder, kBaselineCutoffHz, fs_hz);
  const std::vector<double> baseline = filtfilt(lp, x);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - baseline[i];
  return out;
}

std::vector<double> minmax_normalize(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorKind::DegenerateSignal, "empty signal");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw Error(ErrorKind::DegenerateSignal, "constant signal cannot be min-max scaled");
  const double range = hi - lo;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - lo) / range;
  return out;
}

}  // namespace afdetect::dsp
