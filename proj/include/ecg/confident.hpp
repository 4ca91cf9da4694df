#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "ecg/eval.hpp"
#include "ecg/nn/model.hpp"
#include "ecg/optim.hpp"
#include "ecg/signal.hpp"

namespace ecg::conf {

/// What the per-sample confidence measures: the softmax probability of the
/// sample's GIVEN label (default; directly scores model-label agreement), or
/// of the argmax category.
enum class ScoreRule { label_probability, max_probability };

struct ConfidenceConfig {
  double threshold = 0.8;
  ScoreRule score_rule = ScoreRule::label_probability;
  bool strict_threshold = false;  // default keeps ties (score >= threshold)
  double validation_fraction = 0.1;

  nn::SimpleCnnConfig stage1;
  optim::TrainConfig stage1_train;
  nn::BackboneConfig stage2;
  optim::TrainConfig stage2_train;
};

struct FilterReport {
  double threshold = 0.0;
  std::array<int64_t, kNumCategories> kept_per_category{};
  std::array<int64_t, kNumCategories> dropped_per_category{};
  std::array<int64_t, 20> score_histogram{};  // uniform bins over [0,1]
  std::vector<size_t> kept_indices;           // original dataset order

  int64_t kept_total() const;
  int64_t dropped_total() const;
  std::string format() const;
};

/// One score in [0,1] per segment, eval mode, deterministic.
std::vector<double> confidence_scores(
    nn::Network& model, const Dataset& dataset,
    ScoreRule rule = ScoreRule::label_probability);

/// Keeps segments with score >= threshold (or > with strict), order
/// preserved. Throws "threshold too high" carrying the max observed score
/// when nothing survives.
std::pair<Dataset, FilterReport> filter_clean(const Dataset& dataset,
                                              const std::vector<double>& scores,
                                              double threshold,
                                              bool strict = false);

struct PipelineReport {
  optim::TrainReport stage1_report;
  optim::TrainReport stage2_report;
  FilterReport filter;
  double stage1_test_accuracy = 0.0;
  double stage2_test_accuracy = 0.0;
  eval::ConfusionMatrix stage2_confusion{kNumCategories};
  std::string stage1_architecture;
  std::string stage2_architecture;
};

struct PipelineResult {
  std::unique_ptr<nn::Network> stage1;
  std::unique_ptr<nn::Network> stage2;
  PipelineReport report;
};

/// The two-stage scheme: train stage 1 on the raw labels, score every raw
/// sample, keep the confident ones, train the ResNet on the kept subset.
/// Deterministic in rng.seed(); the rng object is not advanced.
PipelineResult confident_pipeline(const Dataset& raw_train, const Dataset& test,
                                  const ConfidenceConfig& config, Rng& rng);

struct SweepRow {
  double threshold = 0.0;
  bool ok = false;
  double accuracy = 0.0;
  double kept_fraction = 0.0;
  double stage1_accuracy = 0.0;
  std::string error;
};

/// confident_pipeline per threshold with a fixed seed. Stage 1 does not
/// depend on the threshold and is trained once. Per-threshold failures are
/// recorded in their row; the sweep continues.
std::vector<SweepRow> threshold_sweep(const Dataset& raw_train,
                                      const Dataset& test,
                                      const std::vector<double>& thresholds,
                                      const ConfidenceConfig& config, Rng& rng);

void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::string& path);

}  // namespace ecg::conf
