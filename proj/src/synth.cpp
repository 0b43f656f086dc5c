#include "afdetect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "afdetect/error.hpp"

namespace afdetect::synth {

namespace {

constexpr double kEdgeMarginS = 0.25;
constexpr double kDriftHz = 0.2;

constexpr std::uint64_t kStreamLabels = 0x1abe1;
constexpr std::uint64_t kStreamMissing = 0x3155;

struct Wave {
  double offset_s;
  double amplitude;
  double width_s;  // raised-cosine support or Gaussian sigma
};

constexpr Wave kSystolic{0.10, 1.0, 0.30};
constexpr Wave kDicrotic{0.33, 0.30, 0.22};
constexpr Wave kQrs{0.0, 1.0, 0.010};
constexpr Wave kTWave{0.25, 0.30, 0.040};
constexpr Wave kPWave{-0.16, 0.15, 0.025};

void add_raised_cosine(std::vector<double>& x, double fs, double start_s, const Wave& w) {
  const auto first = static_cast<long>(std::ceil(start_s * fs));
  const auto last = static_cast<long>(std::floor((start_s + w.width_s) * fs));
  for (long i = std::max(first, 0L); i <= last && i < static_cast<long>(x.size()); ++i) {
    const double phase = (static_cast<double>(i) / fs - start_s) / w.width_s;
    x[static_cast<std::size_t>(i)] +=
        w.amplitude * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * phase));
  }
}

void add_gaussian(std::vector<double>& x, double fs, double centre_s, const Wave& w) {
  const auto first = static_cast<long>(std::floor((centre_s - 6.0 * w.width_s) * fs));
  const auto last = static_cast<long>(std::ceil((centre_s + 6.0 * w.width_s) * fs));
  for (long i = std::max(first, 0L); i <= last && i < static_cast<long>(x.size()); ++i) {
    const double d = (static_cast<double>(i) / fs - centre_s) / w.width_s;
    x[static_cast<std::size_t>(i)] += w.amplitude * std::exp(-0.5 * d * d);
  }
}

double variance(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size());
}

void add_noise(std::vector<double>& x, double snr_db, Rng& rng) {
  if (!std::isfinite(snr_db)) return;
  const double sd = std::sqrt(variance(x) / std::pow(10.0, snr_db / 10.0));
  for (double& v : x) v += sd * rng.normal();
}

// Zero-padded so lexical order matches generation order.
std::string subject_name(std::size_t index, std::size_t count) {
  const std::size_t width = std::max<std::size_t>(3, std::to_string(count).size());
  std::string digits = std::to_string(index + 1);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "S" + digits;
}

}  // namespace

void validate(const SynthConfig& cfg) {
  const auto fail = [](const std::string& what) { throw Error(ErrorKind::BadConfig, what); };
  if (cfg.n_subjects < 1) fail("n_subjects must be >= 1");
  if (cfg.segments_per_subject < 1) fail("segments_per_subject must be >= 1");
  if (!(cfg.label_ratio_af >= 0.0 && cfg.label_ratio_af <= 1.0)) fail("label_ratio_af must lie in [0, 1]");
  if (std::isnan(cfg.noise_snr_db)) fail("noise_snr_db is NaN");
  if (!(cfg.drift_amplitude >= 0.0) || !std::isfinite(cfg.drift_amplitude)) fail("drift_amplitude must be >= 0");
  if (!(cfg.fs_hz > 0.0)) fail("fs_hz must be positive");
  if (static_cast<double>(cfg.segment_length) / cfg.fs_hz < 4.0 * kEdgeMarginS + 2.0 * cfg.af_rr_max_s) {
    fail("segment too short for the rhythm model");
  }
  if (!(cfg.naf_rr_sd_s >= 0.0)) fail("naf_rr_sd_s must be >= 0");
  if (!(cfg.naf_rr_autocorr >= 0.0 && cfg.naf_rr_autocorr < 1.0)) fail("naf_rr_autocorr must lie in [0, 1)");
  if (!(cfg.naf_rr_min_s > 0.0 && cfg.naf_rr_min_s <= cfg.naf_rr_max_s)) fail("bad NAF RR clip range");
  if (!(cfg.af_rr_min_s > 0.0 && cfg.af_rr_min_s < cfg.af_rr_max_s)) fail("bad AF RR range");
  if (cfg.missing_af < 0 || cfg.missing_naf < 0) fail("missing segment counts must be >= 0");
}

std::vector<double> draw_beat_times(const SynthConfig& cfg, Label rhythm, Rng& rng) {
  const double duration = static_cast<double>(cfg.segment_length) / cfg.fs_hz;
  const double innovation = std::sqrt(1.0 - cfg.naf_rr_autocorr * cfg.naf_rr_autocorr);
  double state = rng.normal();
  const auto next_rr = [&]() {
    if (rhythm == Label::AF) return rng.uniform(cfg.af_rr_min_s, cfg.af_rr_max_s);
    state = cfg.naf_rr_autocorr * state + innovation * rng.normal();
    return std::clamp(cfg.naf_rr_mean_s + cfg.naf_rr_sd_s * state, cfg.naf_rr_min_s,
                      cfg.naf_rr_max_s);
  };
  std::vector<double> beats;
  double t = kEdgeMarginS + rng.uniform(0.0, 0.5);
  while (t <= duration - kEdgeMarginS) {
    beats.push_back(t);
    t += next_rr();
  }
  return beats;
}

std::vector<double> render_ppg(const std::vector<double>& beat_times_s, std::size_t n, double fs_hz) {
  std::vector<double> x(n, 0.0);
  for (double b : beat_times_s) {
    add_raised_cosine(x, fs_hz, b + kSystolic.offset_s, kSystolic);
    add_raised_cosine(x, fs_hz, b + kDicrotic.offset_s, kDicrotic);
  }
  return x;
}

std::vector<double> render_ecg(const std::vector<double>& beat_times_s, Label rhythm,
                               std::size_t n, double fs_hz) {
  std::vector<double> x(n, 0.0);
  for (double b : beat_times_s) {
    add_gaussian(x, fs_hz, b + kQrs.offset_s, kQrs);
    add_gaussian(x, fs_hz, b + kTWave.offset_s, kTWave);
    if (rhythm == Label::NAF) add_gaussian(x, fs_hz, b + kPWave.offset_s, kPWave);
  }
  return x;
}

SyntheticDataset synth_generate(const SynthConfig& cfg) {
  validate(cfg);

  const auto n_subjects = static_cast<std::size_t>(cfg.n_subjects);
  const auto n_af_subjects = static_cast<std::size_t>(
      std::floor(cfg.label_ratio_af * static_cast<double>(n_subjects) + 0.5));
  std::vector<Label> subject_labels(n_subjects, Label::NAF);
  std::fill_n(subject_labels.begin(), n_af_subjects, Label::AF);
  Rng label_rng(derive_seed(cfg.seed, kStreamLabels));
  label_rng.shuffle(std::span(subject_labels));

  const std::size_t per_subject = static_cast<std::size_t>(cfg.segments_per_subject);
  const std::size_t total = n_subjects * per_subject;
  std::vector<dataset::Segment> segments(total);
  std::vector<BeatTruth> truth(total);
  const double two_pi = 2.0 * std::numbers::pi;

  for (std::size_t subj = 0; subj < n_subjects; ++subj) {
    for (std::size_t seg = 0; seg < per_subject; ++seg) {
      const std::size_t idx = subj * per_subject + seg;
      const Label rhythm = subject_labels[subj];
      Rng rng(derive_seed(cfg.seed, subj + 1, seg));

      BeatTruth bt;
      bt.beat_times_s = draw_beat_times(cfg, rhythm, rng);
      for (std::size_t i = 1; i < bt.beat_times_s.size(); ++i) {
        bt.rr_s.push_back(bt.beat_times_s[i] - bt.beat_times_s[i - 1]);
      }

      dataset::Segment s;
      s.subject_id = subject_name(subj, n_subjects);
      s.segment_id = static_cast<std::uint32_t>(seg);
      s.label = rhythm;
      s.fs_hz = cfg.fs_hz;
      s.ppg = render_ppg(bt.beat_times_s, cfg.segment_length, cfg.fs_hz);
      s.ecg = render_ecg(bt.beat_times_s, rhythm, cfg.segment_length, cfg.fs_hz);

      const double phase = rng.uniform(0.0, two_pi);
      add_noise(s.ppg, cfg.noise_snr_db, rng);
      add_noise(s.ecg, cfg.noise_snr_db, rng);
      if (cfg.drift_amplitude > 0.0) {
        for (std::size_t i = 0; i < cfg.segment_length; ++i) {
          const double t = static_cast<double>(i) / cfg.fs_hz;
          const double drift = cfg.drift_amplitude * std::sin(two_pi * kDriftHz * t + phase);
          s.ppg[i] += drift;
          s.ecg[i] += drift;
        }
      }
      segments[idx] = std::move(s);
      truth[idx] = std::move(bt);
    }
  }

  // Missing-sample injection: chosen per class from a dedicated stream.
  Rng missing_rng(derive_seed(cfg.seed, kStreamMissing));
  for (Label cls : {Label::AF, Label::NAF}) {
    const int wanted = cls == Label::AF ? cfg.missing_af : cfg.missing_naf;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < total; ++i) {
      if (segments[i].label == cls) members.push_back(i);
    }
    if (static_cast<std::size_t>(wanted) > members.size()) {
      throw Error(ErrorKind::BadConfig, "more missing segments requested than " +
                                            std::string(to_string(cls)) + " segments exist");
    }
    missing_rng.shuffle(std::span(members));
    for (int k = 0; k < wanted; ++k) {
      auto& s = segments[members[static_cast<std::size_t>(k)]];
      const auto holes = 1 + missing_rng.below(5);
      for (std::uint64_t h = 0; h < holes; ++h) {
        auto& channel = missing_rng.below(2) == 0 ? s.ppg : s.ecg;
        channel[missing_rng.below(channel.size())] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }

  // Segment order already matches the dataset's (subject_id, segment_id) sort.
  SyntheticDataset out{dataset::Dataset(std::move(segments)), std::move(truth)};
  return out;
}

}  // namespace afdetect::synth
