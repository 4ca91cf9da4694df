#include "ecg/confident.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ecg/preprocess.hpp"

namespace ecg::conf {

int64_t FilterReport::kept_total() const {
  int64_t s = 0;
  for (int64_t v : kept_per_category) s += v;
  return s;
}

int64_t FilterReport::dropped_total() const {
  int64_t s = 0;
  for (int64_t v : dropped_per_category) s += v;
  return s;
}

std::string FilterReport::format() const {
  std::ostringstream os;
  os << "confidence filter @ threshold " << threshold << "\n";
  os << "category  kept  dropped\n";
  for (int c = 0; c < kNumCategories; ++c)
    os << "  " << category_symbol(category_from_index(c)) << "    "
       << kept_per_category[c] << "    " << dropped_per_category[c] << "\n";
  os << "total kept " << kept_total() << " / "
     << kept_total() + dropped_total() << "\n";
  os << "score histogram (20 bins over [0,1]):";
  for (int64_t h : score_histogram) os << ' ' << h;
  os << "\n";
  return os.str();
}

std::vector<double> confidence_scores(nn::Network& model,
                                      const Dataset& dataset, ScoreRule rule) {
  if (dataset.empty()) return {};
  std::vector<double> scores;
  scores.reserve(dataset.size());
  Rng dummy(0);
  constexpr size_t kBatch = 256;
  for (size_t start = 0; start < dataset.size(); start += kBatch) {
    const size_t end = std::min(dataset.size(), start + kBatch);
    std::vector<size_t> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor logits = model.forward(optim::make_batch(dataset, idx),
                                        nn::Mode::eval, dummy);
    const Tensor probs = optim::softmax(logits);
    const int k = probs.shape[1];
    for (size_t i = 0; i < idx.size(); ++i) {
      const double* row = probs.data.data() + static_cast<int64_t>(i) * k;
      if (rule == ScoreRule::label_probability) {
        scores.push_back(row[category_index(dataset[idx[i]].category)]);
      } else {
        scores.push_back(*std::max_element(row, row + k));
      }
    }
  }
  return scores;
}

std::pair<Dataset, FilterReport> filter_clean(const Dataset& dataset,
                                              const std::vector<double>& scores,
                                              double threshold, bool strict) {
  if (scores.size() != dataset.size())
    throw ValidationError("filter_clean: " + std::to_string(scores.size()) +
                          " scores for " + std::to_string(dataset.size()) +
                          " segments");
  FilterReport report;
  report.threshold = threshold;
  Dataset clean(dataset.segment_length());
  double max_score = 0.0;
  for (size_t i = 0; i < dataset.size(); ++i) {
    const double s = scores[i];
    max_score = std::max(max_score, s);
    const int bin = std::min(19, static_cast<int>(s * 20.0));
    report.score_histogram[std::max(0, bin)]++;
    const bool keep = strict ? s > threshold : s >= threshold;
    const int cat = category_index(dataset[i].category);
    if (keep) {
      report.kept_per_category[cat]++;
      report.kept_indices.push_back(i);
      clean.add(dataset[i]);
    } else {
      report.dropped_per_category[cat]++;
    }
  }
  if (clean.empty() && !dataset.empty()) {
    std::ostringstream os;
    os << "threshold too high: no sample reaches " << threshold
       << " (max observed score " << max_score << ")";
    throw ValidationError(os.str());
  }
  return {std::move(clean), std::move(report)};
}

namespace {

/// Deterministic validation carve shared by both stages.
std::pair<Dataset, Dataset> carve_validation(const Dataset& ds,
                                             double val_fraction,
                                             uint64_t seed) {
  if (val_fraction <= 0.0 || ds.size() < 2) return {ds, Dataset(ds.segment_length())};
  prep::SplitConfig sc;
  sc.train_fraction = 1.0 - val_fraction;
  sc.seed = seed;
  return prep::split(ds, sc);
}

}  // namespace

PipelineResult confident_pipeline(const Dataset& raw_train, const Dataset& test,
                                  const ConfidenceConfig& config, Rng& rng) {
  if (raw_train.empty()) throw ValidationError("raw training set is empty");
  // threshold 0 is the documented degenerate case: keep everything
  if (config.threshold < 0.0 || config.threshold > 1.0)
    throw ValidationError("threshold must lie in [0,1]");

  PipelineResult result;
  result.report.filter.threshold = config.threshold;

  // Stage 1: classical CNN on the raw (noisy) labels.
  nn::SimpleCnnConfig s1cfg = config.stage1;
  s1cfg.input_length = raw_train.segment_length();
  result.stage1 = nn::build_simple_cnn(
      s1cfg, rng.split(rng_stream::kStage1Init).seed());
  auto [core1, val1] = carve_validation(raw_train, config.validation_fraction,
                                        rng.seed());
  Rng s1rng = rng.split(rng_stream::kStage1Train);
  result.report.stage1_report =
      optim::train(*result.stage1, core1, val1, config.stage1_train, s1rng);
  result.report.stage1_architecture = result.stage1->architecture();

  // Confidence scores over the full raw set, then the clean cut.
  const std::vector<double> scores =
      confidence_scores(*result.stage1, raw_train, config.score_rule);
  auto [clean, filter] = filter_clean(raw_train, scores, config.threshold,
                                      config.strict_threshold);
  result.report.filter = std::move(filter);

  // Stage 2: ResNet on the kept subset only.
  result.stage2 = nn::build_backbone(
      config.stage2, rng.split(rng_stream::kStage2Init).seed());
  auto [core2, val2] =
      carve_validation(clean, config.validation_fraction, rng.seed());
  Rng s2rng = rng.split(rng_stream::kStage2Train);
  result.report.stage2_report =
      optim::train(*result.stage2, core2, val2, config.stage2_train, s2rng);
  result.report.stage2_architecture = result.stage2->architecture();

  if (!test.empty()) {
    result.report.stage1_test_accuracy =
        optim::evaluate_accuracy(*result.stage1, test);
    result.report.stage2_test_accuracy =
        optim::evaluate_accuracy(*result.stage2, test);
    const std::vector<int> preds = optim::predict(*result.stage2, test);
    std::vector<int> labels(test.size());
    for (size_t i = 0; i < test.size(); ++i)
      labels[i] = category_index(test[i].category);
    result.report.stage2_confusion =
        eval::confusion(preds, labels, result.stage2->num_categories());
  }
  return result;
}

std::vector<SweepRow> threshold_sweep(const Dataset& raw_train,
                                      const Dataset& test,
                                      const std::vector<double>& thresholds,
                                      const ConfidenceConfig& config,
                                      Rng& rng) {
  if (thresholds.empty()) throw ValidationError("thresholds must be non-empty");
  for (double t : thresholds)
    if (t <= 0.0 || t > 1.0)
      throw ValidationError("sweep threshold " + std::to_string(t) +
                            " outside (0,1]");

  // Stage 1 is threshold-independent: train it once. The per-threshold runs
  // below are bit-identical to full confident_pipeline calls because every
  // stream is derived from rng.seed(), not from consumed state.
  nn::SimpleCnnConfig s1cfg = config.stage1;
  s1cfg.input_length = raw_train.segment_length();
  auto stage1 = nn::build_simple_cnn(
      s1cfg, rng.split(rng_stream::kStage1Init).seed());
  auto [core1, val1] = carve_validation(raw_train, config.validation_fraction,
                                        rng.seed());
  Rng s1rng = rng.split(rng_stream::kStage1Train);
  optim::train(*stage1, core1, val1, config.stage1_train, s1rng);
  const double stage1_acc =
      test.empty() ? 0.0 : optim::evaluate_accuracy(*stage1, test);
  const std::vector<double> scores =
      confidence_scores(*stage1, raw_train, config.score_rule);

  std::vector<SweepRow> rows;
  for (double t : thresholds) {
    SweepRow row;
    row.threshold = t;
    row.stage1_accuracy = stage1_acc;
    try {
      auto [clean, filter] = filter_clean(raw_train, scores, t,
                                          config.strict_threshold);
      row.kept_fraction = static_cast<double>(filter.kept_total()) /
                          static_cast<double>(raw_train.size());
      auto stage2 = nn::build_backbone(
          config.stage2, rng.split(rng_stream::kStage2Init).seed());
      auto [core2, val2] =
          carve_validation(clean, config.validation_fraction, rng.seed());
      Rng s2rng = rng.split(rng_stream::kStage2Train);
      optim::train(*stage2, core2, val2, config.stage2_train, s2rng);
      row.accuracy = test.empty() ? 0.0 : optim::evaluate_accuracy(*stage2, test);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
      row.ok = false;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write sweep table '" + path + "'");
  out.precision(10);
  out << "threshold,accuracy,kept_fraction,stage1_accuracy\n";
  for (const auto& r : rows) {
    if (r.ok)
      out << r.threshold << ',' << r.accuracy << ',' << r.kept_fraction << ','
          << r.stage1_accuracy << "\n";
    else
      out << "# threshold " << r.threshold << " failed: " << r.error << "\n";
  }
}

}  // namespace ecg::conf
