#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ecg/nn/model.hpp"
#include "ecg/signal.hpp"

namespace ecg::optim {

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

/// Row-wise stabilized softmax of logits [B, K].
Tensor softmax(const Tensor& logits);

/// Mean cross-entropy over the batch; gradient is (softmax - onehot) / B.
std::pair<double, Tensor> softmax_cross_entropy(const Tensor& logits,
                                                const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState init(const std::vector<Param*>& params);
};

/// One bias-corrected Adam step over all parameters. Throws DivergenceError
/// naming the parameter on a non-finite gradient.
void adam_step(const std::vector<Param*>& params, AdamState& state, double lr);

// ---------------------------------------------------------------------------
// Plateau learning-rate schedule
// ---------------------------------------------------------------------------

struct PlateauConfig {
  double initial_lr = 0.002;
  int patience = 5;
  double factor = 0.5;
  double floor = 1e-6;
};

/// Learning rate after replaying the validation-accuracy history: the rate is
/// multiplied by `factor` whenever the best accuracy has not improved for
/// `patience` consecutive epochs. Never increases; clamped at `floor`.
double plateau_lr(const std::vector<double>& val_accuracy_history,
                  const PlateauConfig& config);

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct TrainConfig {
  double learning_rate = 0.002;
  int epochs = 100;
  int batch_size = 128;
  bool shuffle = true;
  int plateau_patience = 5;
  double plateau_factor = 0.5;
  double lr_floor = 1e-6;
  uint64_t seed = 0;
};

struct EpochRow {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double learning_rate = 0.0;
};

struct TrainReport {
  std::vector<EpochRow> epochs;
  double wall_seconds = 0.0;
  bool diverged = false;
  std::string divergence_message;

  void write_csv(const std::string& path) const;
};

/// Called after every completed epoch; used by the CLI for checkpointing.
using EpochCallback = std::function<void(int epoch, const EpochRow& row)>;

/// Batches segments as [B, 1, T] with labels from segment categories.
NumericBatch make_batch(const Dataset& ds, const std::vector<size_t>& indices);
std::vector<int> batch_labels(const Dataset& ds,
                              const std::vector<size_t>& indices);

/// Epoch loop: seeded shuffle, sequential mini-batches (last partial batch
/// kept), forward/backward/adam, epoch-end eval-mode validation, plateau
/// schedule. Divergence stops training and returns the partial report with
/// `diverged` set.
TrainReport train(nn::Network& model, const Dataset& train_set,
                  const Dataset& val_set, const TrainConfig& config, Rng& rng,
                  const EpochCallback& callback = nullptr);

/// Eval-mode accuracy of the model on the dataset's given labels.
double evaluate_accuracy(nn::Network& model, const Dataset& ds,
                         int batch_size = 256);

/// Eval-mode predicted category index per segment.
std::vector<int> predict(nn::Network& model, const Dataset& ds,
                         int batch_size = 256);

}  // namespace ecg::optim
