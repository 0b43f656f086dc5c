#pragma once

// Synthetic PPG + ECG segments with known beat times.
//
// NAF rhythm: RR intervals form a stationary AR(1) sequence whose marginal is
// Normal(naf_rr_mean_s, naf_rr_sd_s), clipped to [naf_rr_min_s, naf_rr_max_s].
// AF rhythm: RR intervals i.i.d. Uniform(af_rr_min_s, af_rr_max_s).
// PPG is a raised-cosine pulse per beat plus a dicrotic bump; ECG is a Gaussian
// QRS (sigma 10 ms) per beat with a T wave, and a P wave for NAF only.

#include <cstdint>
#include <limits>
#include <vector>

#include "afdetect/dataset.hpp"
#include "afdetect/random.hpp"

namespace afdetect::synth {

struct SynthConfig {
  int n_subjects = 35;
  int segments_per_subject = 15;
  double label_ratio_af = 0.54;  // fraction of subjects (rounded) labelled AF
  double noise_snr_db = 15.0;    // +inf disables noise
  double drift_amplitude = 0.5;  // 0 disables the 0.2 Hz baseline drift
  std::uint64_t seed = 1;

  std::size_t segment_length = dataset::kSegmentLength;
  double fs_hz = dataset::kSamplingRateHz;

  double naf_rr_mean_s = 0.8;
  double naf_rr_sd_s = 0.03;
  double naf_rr_autocorr = 0.5;
  double naf_rr_min_s = 0.6;
  double naf_rr_max_s = 1.0;
  double af_rr_min_s = 0.4;
  double af_rr_max_s = 1.2;

  // Number of segments per class that receive a few missing samples, so the
  // cleaning stage has something to discard.
  int missing_af = 0;
  int missing_naf = 0;
};

/// Throws BadConfig on an invalid configuration.
void validate(const SynthConfig& cfg);

struct BeatTruth {
  std::vector<double> beat_times_s;
  std::vector<double> rr_s;
};

struct SyntheticDataset {
  dataset::Dataset dataset;
  std::vector<BeatTruth> truth;  // aligned with dataset.segments()
};

SyntheticDataset synth_generate(const SynthConfig& cfg);

/// Noise-free, drift-free channel templates for the given beat times.
std::vector<double> render_ppg(const std::vector<double>& beat_times_s, std::size_t n, double fs_hz);
std::vector<double> render_ecg(const std::vector<double>& beat_times_s, Label rhythm,
                               std::size_t n, double fs_hz);

/// Beat times for one segment drawn from the rhythm model.
std::vector<double> draw_beat_times(const SynthConfig& cfg, Label rhythm, Rng& rng);

}  // namespace afdetect::synth
