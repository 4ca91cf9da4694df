#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecg/signal.hpp"

namespace ecg::synth {

/// Deterministic synthetic beat generator. Not clinically faithful: each beat
/// is a sum of Gaussians (one per named wave) plus category-specific rhythm
/// cues, baseline wander, and white noise at noise_snr_db.
struct SynthConfig {
  double sampling_rate_hz = 300.0;
  int beats_per_category = 1000;
  int segment_length = 600;
  double noise_snr_db = 20.0;  // +infinity disables noise
  double label_corruption_rate = 0.0;
  uint64_t seed = 0;
};

/// Dataset plus the generator's ground truth for confident-learning tests.
struct SynthDataset {
  Dataset dataset;  // carries the GIVEN (possibly corrupted) labels
  std::vector<RhythmCategory> true_labels;
  std::vector<uint8_t> corruption_mask;  // 1 where given != true
};

/// One window with the category's morphology centered in it.
std::vector<double> synth_beat(RhythmCategory category,
                               const SynthConfig& config, Rng& rng);

/// beats_per_category windows per category, labels = true labels.
Dataset make_clean_dataset(const SynthConfig& config);

/// Each label independently replaced, with probability `rate`, by a uniformly
/// random different category. True labels and the mask are retained.
SynthDataset corrupt_labels(const Dataset& dataset, double rate, Rng& rng);

/// make_clean_dataset + corrupt_labels at config.label_corruption_rate, with
/// rng streams split from config.seed.
SynthDataset make_synth_dataset(const SynthConfig& config);

/// index,true,given,corrupted_flag
void write_truth_csv(const SynthDataset& ds, const std::string& path);

/// One annotated record per category (beats laid out back to back), for
/// exercising the record/windowing pipeline.
std::vector<EcgRecord> make_records(const SynthConfig& config);

}  // namespace ecg::synth
