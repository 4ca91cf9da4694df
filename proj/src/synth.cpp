#include "ecg/synth.hpp"

#include <cmath>
#include <fstream>

namespace ecg::synth {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Wave {
  double amp;
  double mu;     // seconds relative to beat center
  double sigma;  // seconds
};

// Wave sets per beat shape. Timings loosely follow the textbook intervals
// (P ~0.06-0.12 s, QRS ~0.06-0.11 s wide for ventricular beats).
const Wave kNormal[] = {{0.15, -0.20, 0.025},
                        {-0.12, -0.028, 0.010},
                        {1.00, 0.0, 0.013},
                        {-0.25, 0.030, 0.011},
                        {0.35, 0.26, 0.060}};
// Ventricular: no P, broad QRS, inverted T.
const Wave kWide[] = {{1.25, 0.0, 0.042},
                      {-0.55, 0.085, 0.035},
                      {-0.35, 0.31, 0.075}};
// Supraventricular premature: small early P hugging a narrow QRS.
const Wave kPremature[] = {{0.08, -0.12, 0.018},
                           {-0.10, -0.026, 0.009},
                           {0.92, 0.0, 0.012},
                           {-0.22, 0.028, 0.010},
                           {0.30, 0.24, 0.055}};
// Atrial fibrillation beats: QRS and T only, the P is replaced by f-waves.
const Wave kNoP[] = {{-0.12, -0.028, 0.010},
                     {1.00, 0.0, 0.013},
                     {-0.25, 0.030, 0.011},
                     {0.35, 0.26, 0.060}};

template <size_t N>
void add_beat(std::vector<double>& x, double fs, double center_s,
              const Wave (&waves)[N], Rng& rng) {
  for (const Wave& w : waves) {
    const double amp = w.amp * rng.uniform(0.9, 1.1);
    const double mu = center_s + w.mu + rng.uniform(-0.004, 0.004);
    const double sigma = w.sigma * rng.uniform(0.95, 1.05);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    // 4-sigma support keeps this O(sigma*fs) per wave
    const int lo = std::max(0, static_cast<int>((mu - 4 * sigma) * fs));
    const int hi = std::min(static_cast<int>(x.size()) - 1,
                            static_cast<int>((mu + 4 * sigma) * fs) + 1);
    for (int i = lo; i <= hi; ++i) {
      const double t = i / fs - mu;
      x[i] += amp * std::exp(-t * t * inv2s2);
    }
  }
}

void add_sine(std::vector<double>& x, double fs, double amp, double freq,
              double phase) {
  for (size_t i = 0; i < x.size(); ++i)
    x[i] += amp * std::sin(kTwoPi * freq * i / fs + phase);
}

}  // namespace

std::vector<double> synth_beat(RhythmCategory category,
                               const SynthConfig& config, Rng& rng) {
  const double fs = config.sampling_rate_hz;
  const int len = config.segment_length;
  if (fs <= 0.0 || len < 8)
    throw ValidationError("synth needs a positive rate and length >= 8");
  std::vector<double> x(len, 0.0);

  const double center = (len / 2) / fs + rng.uniform(-0.03, 0.03);

  switch (category) {
    case RhythmCategory::N: {
      const double rr = rng.uniform(0.75, 0.95);
      add_beat(x, fs, center - rr, kNormal, rng);
      add_beat(x, fs, center, kNormal, rng);
      add_beat(x, fs, center + rr, kNormal, rng);
      break;
    }
    case RhythmCategory::V: {
      const double rr = rng.uniform(0.75, 0.95);
      add_beat(x, fs, center - rr, kNormal, rng);
      add_beat(x, fs, center, kWide, rng);
      add_beat(x, fs, center + rr, kNormal, rng);
      break;
    }
    case RhythmCategory::S: {
      // premature coupling before, compensatory pause after
      const double rr_pre = rng.uniform(0.40, 0.55);
      const double rr_post = rng.uniform(0.90, 1.10);
      add_beat(x, fs, center - rr_pre, kNormal, rng);
      add_beat(x, fs, center, kPremature, rng);
      add_beat(x, fs, center + rr_post, kNormal, rng);
      break;
    }
    case RhythmCategory::A: {
      const double rr_pre = rng.uniform(0.45, 1.0);
      const double rr_post = rng.uniform(0.45, 1.0);
      add_beat(x, fs, center - rr_pre, kNoP, rng);
      add_beat(x, fs, center, kNoP, rng);
      add_beat(x, fs, center + rr_post, kNoP, rng);
      for (int i = 0; i < 3; ++i)  // fibrillatory baseline
        add_sine(x, fs, rng.uniform(0.03, 0.06), rng.uniform(4.0, 9.0),
                 rng.uniform(0.0, kTwoPi));
      break;
    }
    case RhythmCategory::Q: {
      const int blobs = 3 + static_cast<int>(rng.uniform_int(4));
      for (int i = 0; i < blobs; ++i) {
        const Wave w{rng.uniform(-0.45, 0.6), rng.uniform(-0.45, 0.45),
                     rng.uniform(0.025, 0.12)};
        const Wave one[1] = {w};
        add_beat(x, fs, center, one, rng);
      }
      break;
    }
  }

  add_sine(x, fs, rng.uniform(0.02, 0.05), rng.uniform(0.15, 0.4),
           rng.uniform(0.0, kTwoPi));

  if (std::isfinite(config.noise_snr_db)) {
    double power = 0.0;
    for (double v : x) power += v * v;
    power /= static_cast<double>(len);
    const double sigma =
        std::sqrt(power / std::pow(10.0, config.noise_snr_db / 10.0));
    for (auto& v : x) v += rng.normal(0.0, sigma);
  }
  return x;
}

Dataset make_clean_dataset(const SynthConfig& config) {
  if (config.beats_per_category < 1)
    throw ValidationError("beats_per_category must be >= 1");
  Rng rng = Rng(config.seed).split(rng_stream::kSynth);
  Dataset ds(config.segment_length);
  ds.reserve(static_cast<size_t>(config.beats_per_category) * kNumCategories);
  for (RhythmCategory cat : all_categories()) {
    for (int b = 0; b < config.beats_per_category; ++b) {
      LabeledSegment seg;
      seg.samples = synth_beat(cat, config, rng);
      seg.category = cat;
      seg.source_record = std::string("synth-") + category_symbol(cat);
      seg.provenance = Provenance::original;
      ds.add(std::move(seg));
    }
  }
  return ds;
}

SynthDataset corrupt_labels(const Dataset& dataset, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw ValidationError("label_corruption_rate must lie in [0,1)");
  SynthDataset out;
  out.dataset = Dataset(dataset.segment_length());
  out.dataset.reserve(dataset.size());
  out.true_labels.reserve(dataset.size());
  out.corruption_mask.reserve(dataset.size());
  for (size_t i = 0; i < dataset.size(); ++i) {
    LabeledSegment seg = dataset[i];
    const RhythmCategory truth = seg.category;
    bool corrupted = false;
    if (rate > 0.0 && rng.uniform() < rate) {
      // uniformly random different category
      const int shift = 1 + static_cast<int>(rng.uniform_int(kNumCategories - 1));
      seg.category = category_from_index(
          (category_index(truth) + shift) % kNumCategories);
      corrupted = true;
    }
    out.true_labels.push_back(truth);
    out.corruption_mask.push_back(corrupted ? 1 : 0);
    out.dataset.add(std::move(seg));
  }
  return out;
}

SynthDataset make_synth_dataset(const SynthConfig& config) {
  Dataset clean = make_clean_dataset(config);
  Rng rng = Rng(config.seed).split(rng_stream::kCorrupt);
  return corrupt_labels(clean, config.label_corruption_rate, rng);
}

void write_truth_csv(const SynthDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write truth table '" + path + "'");
  out << "index,true,given,corrupted_flag\n";
  for (size_t i = 0; i < ds.dataset.size(); ++i)
    out << i << ',' << category_symbol(ds.true_labels[i]) << ','
        << category_symbol(ds.dataset[i].category) << ','
        << static_cast<int>(ds.corruption_mask[i]) << "\n";
}

std::vector<EcgRecord> make_records(const SynthConfig& config) {
  Rng rng = Rng(config.seed).split(rng_stream::kSynth);
  const double fs = config.sampling_rate_hz;
  const int len = config.segment_length;
  const int64_t qrs_half = std::max<int64_t>(2, std::llround(0.08 * fs));
  std::vector<EcgRecord> records;
  for (RhythmCategory cat : all_categories()) {
    EcgRecord rec;
    rec.record_id = std::string("synth") + category_symbol(cat);
    rec.sampling_rate_hz = fs;
    rec.samples.reserve(static_cast<size_t>(config.beats_per_category) * len);
    for (int b = 0; b < config.beats_per_category; ++b) {
      const std::vector<double> beat = synth_beat(cat, config, rng);
      const int64_t start = static_cast<int64_t>(rec.samples.size());
      for (double v : beat) rec.samples.push_back(static_cast<float>(v));
      BeatAnnotation a;
      a.start_index = start;
      a.end_index = start + len;
      a.category = cat;
      const int64_t c = start + len / 2;
      a.qrs_start = std::max(a.start_index, c - qrs_half);
      a.qrs_end = std::min(a.end_index, c + qrs_half);
      rec.annotations.push_back(a);
    }
    rec.validate();
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace ecg::synth
