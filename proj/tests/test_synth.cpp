#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "afdetect/error.hpp"
#include "afdetect/synth.hpp"
#include "support.hpp"

using namespace afdetect;
using namespace afdetect::synth;

namespace {

double rmssd_ms(const std::vector<double>& rr_s) {
  double s = 0.0;
  for (std::size_t i = 1; i < rr_s.size(); ++i) s += std::pow(1000.0 * (rr_s[i] - rr_s[i - 1]), 2);
  return std::sqrt(s / static_cast<double>(rr_s.size() - 1));
}

SynthConfig single(double ratio_af, std::uint64_t seed) {
  SynthConfig c;
  c.n_subjects = 1;
  c.segments_per_subject = 1;
  c.label_ratio_af = ratio_af;
  c.noise_snr_db = std::numeric_limits<double>::infinity();
  c.drift_amplitude = 0.0;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("single-segment rhythm bounds") {
  const auto naf = synth_generate(single(0.0, 3));
  REQUIRE(naf.dataset.size() == 1);
  CHECK(naf.dataset[0].label == Label::NAF);
  CHECK(rmssd_ms(naf.truth[0].rr_s) < 45.0);

  const auto af = synth_generate(single(1.0, 3));
  CHECK(af.dataset[0].label == Label::AF);
  CHECK(rmssd_ms(af.truth[0].rr_s) > 100.0);
}

TEST_CASE("AF and NAF true-RR RMSSD separate over many seeds") {
  double max_naf = 0.0, min_af = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    SynthConfig c = single(0.5, seed);
    c.n_subjects = 2;
    const auto g = synth_generate(c);
    for (std::size_t i = 0; i < g.dataset.size(); ++i) {
      const double r = rmssd_ms(g.truth[i].rr_s);
      if (g.dataset[i].label == Label::AF) {
        min_af = std::min(min_af, r);
      } else {
        max_naf = std::max(max_naf, r);
      }
    }
  }
  CHECK(max_naf < min_af);
  CHECK(max_naf < 45.0);
  CHECK(min_af > 100.0);
}

TEST_CASE("noiseless, drift-free output equals the templates") {
  for (double ratio : {0.0, 1.0}) {
    const auto g = synth_generate(single(ratio, 11));
    const auto& s = g.dataset[0];
    const auto& beats = g.truth[0].beat_times_s;
    CHECK(testing::bit_equal(s.ppg, render_ppg(beats, s.ppg.size(), s.fs_hz)));
    CHECK(testing::bit_equal(s.ecg, render_ecg(beats, s.label, s.ecg.size(), s.fs_hz)));
  }
}

TEST_CASE("ground truth is consistent with the rhythm model") {
  SynthConfig c;
  c.n_subjects = 4;
  c.segments_per_subject = 3;
  c.label_ratio_af = 0.5;
  c.seed = 5;
  const auto g = synth_generate(c);
  for (std::size_t i = 0; i < g.dataset.size(); ++i) {
    const auto& t = g.truth[i];
    REQUIRE(t.rr_s.size() + 1 == t.beat_times_s.size());
    const double duration = static_cast<double>(c.segment_length) / c.fs_hz;
    CHECK(t.beat_times_s.front() >= 0.0);
    CHECK(t.beat_times_s.back() < duration);
    for (std::size_t k = 0; k < t.rr_s.size(); ++k) {
      CHECK(t.rr_s[k] == doctest::Approx(t.beat_times_s[k + 1] - t.beat_times_s[k]).epsilon(1e-12));
      if (g.dataset[i].label == Label::NAF) {
        CHECK(t.rr_s[k] >= c.naf_rr_min_s);
        CHECK(t.rr_s[k] <= c.naf_rr_max_s);
      } else {
        CHECK(t.rr_s[k] >= c.af_rr_min_s);
        CHECK(t.rr_s[k] <= c.af_rr_max_s);
      }
    }
  }
  CHECK(g.dataset[0].subject_id == "S001");
  CHECK(g.dataset.counts().af == 6);
}

TEST_CASE("bit-reproducible under a fixed seed") {
  SynthConfig c;
  c.n_subjects = 3;
  c.segments_per_subject = 2;
  c.missing_af = 1;
  c.missing_naf = 1;
  c.seed = 42;
  const auto a = synth_generate(c);
  const auto b = synth_generate(c);
  REQUIRE(a.dataset.size() == b.dataset.size());
  for (std::size_t i = 0; i < a.dataset.size(); ++i) CHECK(testing::same_segment(a.dataset[i], b.dataset[i]));
  c.seed = 43;
  const auto other = synth_generate(c);
  CHECK_FALSE(testing::bit_equal(a.dataset[0].ppg, other.dataset[0].ppg));
}

TEST_CASE("defect injection reproduces the cleaning counts") {
  SynthConfig c;
  c.missing_af = 22;
  c.missing_naf = 22;
  c.seed = 8;
  const auto g = synth_generate(c);
  CHECK(g.dataset.size() == 525);
  CHECK(g.dataset.counts() == dataset::LabelCounts{285, 240});
  const auto clean = dataset::clean_dataset(g.dataset);
  CHECK(clean.dataset.size() == 481);
  CHECK(clean.report.kept == dataset::LabelCounts{263, 218});
  CHECK(clean.report.missing_values == 44);
}

TEST_CASE("invalid configurations") {
  const auto rejects = [](SynthConfig c) {
    try {
      validate(c);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::BadConfig;
    }
    return false;
  };
  SynthConfig c;
  c.n_subjects = 0;
  CHECK(rejects(c));
  c = {};
  c.segments_per_subject = 0;
  CHECK(rejects(c));
  c = {};
  c.label_ratio_af = 1.5;
  CHECK(rejects(c));
  c = {};
  c.n_subjects = 2;
  c.missing_af = 1000;
  CHECK_THROWS_AS(synth_generate(c), Error);
  c = {};
  c.segment_length = 100;
  CHECK(rejects(c));
  CHECK_FALSE(rejects(SynthConfig{}));
}
