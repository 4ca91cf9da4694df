#include "ecg/optim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace ecg::optim {

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

Tensor softmax(const Tensor& logits) {
  const int batch = logits.shape[0];
  const int k = logits.shape[1];
  Tensor probs({batch, k});
  for (int b = 0; b < batch; ++b) {
    const double* row = logits.data.data() + static_cast<int64_t>(b) * k;
    double* out = probs.data.data() + static_cast<int64_t>(b) * k;
    double mx = row[0];
    for (int i = 1; i < k; ++i) mx = std::max(mx, row[i]);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      out[i] = std::exp(row[i] - mx);
      sum += out[i];
    }
    const double inv = 1.0 / sum;
    for (int i = 0; i < k; ++i) out[i] *= inv;
  }
  return probs;
}

std::pair<double, Tensor> softmax_cross_entropy(
    const Tensor& logits, const std::vector<int>& labels) {
  const int batch = logits.shape[0];
  const int k = logits.shape[1];
  if (static_cast<int>(labels.size()) != batch)
    throw ValidationError("labels length " + std::to_string(labels.size()) +
                          " != batch " + std::to_string(batch));
  for (int b = 0; b < batch; ++b)
    if (labels[b] < 0 || labels[b] >= k)
      throw ValidationError("label " + std::to_string(labels[b]) +
                            " out of range 0.." + std::to_string(k - 1));

  Tensor grad = softmax(logits);
  double loss = 0.0;
  const double inv_b = 1.0 / batch;
  for (int b = 0; b < batch; ++b) {
    double* row = grad.data.data() + static_cast<int64_t>(b) * k;
    // log prob of the true label, recomputed stably from the logits
    const double* lrow = logits.data.data() + static_cast<int64_t>(b) * k;
    double mx = lrow[0];
    for (int i = 1; i < k; ++i) mx = std::max(mx, lrow[i]);
    double lse = 0.0;
    for (int i = 0; i < k; ++i) lse += std::exp(lrow[i] - mx);
    loss -= (lrow[labels[b]] - mx - std::log(lse));
    row[labels[b]] -= 1.0;
    for (int i = 0; i < k; ++i) row[i] *= inv_b;
  }
  return {loss * inv_b, std::move(grad)};
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

AdamState AdamState::init(const std::vector<Param*>& params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Param* p : params) {
    s.m.emplace_back(p->value.shape);
    s.v.emplace_back(p->value.shape);
  }
  return s;
}

void adam_step(const std::vector<Param*>& params, AdamState& state,
               double lr) {
  if (params.size() != state.m.size())
    throw ValidationError("adam state does not match parameter list");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    Param* p = params[i];
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (size_t j = 0; j < p->value.numel(); ++j) {
      const double g = p->grad.data[j];
      if (!std::isfinite(g))
        throw DivergenceError("divergence detected: non-finite gradient in '" +
                              p->name + "'");
      m.data[j] = state.beta1 * m.data[j] + (1.0 - state.beta1) * g;
      v.data[j] = state.beta2 * v.data[j] + (1.0 - state.beta2) * g * g;
      const double mhat = m.data[j] / bc1;
      const double vhat = v.data[j] / bc2;
      p->value.data[j] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// Plateau schedule
// ---------------------------------------------------------------------------

double plateau_lr(const std::vector<double>& val_accuracy_history,
                  const PlateauConfig& config) {
  double lr = config.initial_lr;
  double best = 0.0;
  int streak = 0;
  for (double acc : val_accuracy_history) {
    if (acc > best) {
      best = acc;
      streak = 0;
    } else {
      ++streak;
      if (streak >= config.patience) {
        lr = std::max(lr * config.factor, config.floor);
        streak = 0;
      }
    }
  }
  return lr;
}

// ---------------------------------------------------------------------------
// Batching
// ---------------------------------------------------------------------------

NumericBatch make_batch(const Dataset& ds, const std::vector<size_t>& indices) {
  if (indices.empty()) throw ValidationError("empty batch");
  NumericBatch batch(static_cast<int>(indices.size()), 1, ds.segment_length());
  for (size_t i = 0; i < indices.size(); ++i) {
    const auto& seg = ds[indices[i]].samples;
    std::copy(seg.begin(), seg.end(), batch.row(static_cast<int>(i), 0));
  }
  return batch;
}

std::vector<int> batch_labels(const Dataset& ds,
                              const std::vector<size_t>& indices) {
  std::vector<int> labels(indices.size());
  for (size_t i = 0; i < indices.size(); ++i)
    labels[i] = category_index(ds[indices[i]].category);
  return labels;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

std::vector<int> predict(nn::Network& model, const Dataset& ds,
                         int batch_size) {
  std::vector<int> preds;
  preds.reserve(ds.size());
  Rng dummy(0);
  for (size_t start = 0; start < ds.size(); start += batch_size) {
    const size_t end = std::min(ds.size(), start + batch_size);
    std::vector<size_t> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor logits =
        model.forward(make_batch(ds, idx), nn::Mode::eval, dummy);
    const int k = logits.shape[1];
    for (int b = 0; b < logits.shape[0]; ++b) {
      const double* row = logits.data.data() + static_cast<int64_t>(b) * k;
      preds.push_back(static_cast<int>(
          std::max_element(row, row + k) - row));
    }
  }
  return preds;
}

double evaluate_accuracy(nn::Network& model, const Dataset& ds,
                         int batch_size) {
  if (ds.empty()) return 0.0;
  const std::vector<int> preds = predict(model, ds, batch_size);
  size_t correct = 0;
  for (size_t i = 0; i < ds.size(); ++i)
    if (preds[i] == category_index(ds[i].category)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

void TrainReport::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write train report '" + path + "'");
  out.precision(10);
  out << "epoch,loss,train_acc,val_acc,lr\n";
  for (const auto& r : epochs)
    out << r.epoch << ',' << r.loss << ',' << r.train_accuracy << ','
        << r.val_accuracy << ',' << r.learning_rate << "\n";
  if (diverged) out << "# diverged: " << divergence_message << "\n";
}

TrainReport train(nn::Network& model, const Dataset& train_set,
                  const Dataset& val_set, const TrainConfig& config, Rng& rng,
                  const EpochCallback& callback) {
  if (train_set.empty()) throw ValidationError("training set is empty");
  if (config.batch_size < 1) throw ValidationError("batch_size must be >= 1");

  const double t0 = now_seconds();
  TrainReport report;
  AdamState adam = AdamState::init(model.parameters());
  const PlateauConfig plateau{config.learning_rate, config.plateau_patience,
                              config.plateau_factor, config.lr_floor};
  std::vector<double> val_history;
  double lr = config.learning_rate;

  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) rng.shuffle(order);

    double loss_sum = 0.0;
    size_t loss_batches = 0;
    size_t correct = 0;
    bool diverged = false;
    for (size_t start = 0; start < order.size() && !diverged;
         start += config.batch_size) {
      const size_t end =
          std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      const std::vector<size_t> idx(order.begin() + start, order.begin() + end);
      const NumericBatch batch = make_batch(train_set, idx);
      const std::vector<int> labels = batch_labels(train_set, idx);

      model.zero_grad();
      const Tensor logits = model.forward(batch, nn::Mode::train, rng);
      auto [loss, dlogits] = softmax_cross_entropy(logits, labels);
      if (!std::isfinite(loss)) {
        report.diverged = true;
        report.divergence_message =
            "non-finite loss at epoch " + std::to_string(epoch);
        diverged = true;
        break;
      }
      model.backward(dlogits);
      try {
        adam_step(model.parameters(), adam, lr);
      } catch (const DivergenceError& e) {
        report.diverged = true;
        report.divergence_message = e.what();
        diverged = true;
        break;
      }

      loss_sum += loss;
      ++loss_batches;
      const int k = logits.shape[1];
      for (int b = 0; b < logits.shape[0]; ++b) {
        const double* row = logits.data.data() + static_cast<int64_t>(b) * k;
        const int pred =
            static_cast<int>(std::max_element(row, row + k) - row);
        if (pred == labels[b]) ++correct;
      }
    }
    if (report.diverged) break;

    EpochRow row;
    row.epoch = epoch;
    row.loss = loss_batches ? loss_sum / static_cast<double>(loss_batches) : 0.0;
    row.train_accuracy =
        static_cast<double>(correct) / static_cast<double>(order.size());
    row.val_accuracy = val_set.empty() ? 0.0 : evaluate_accuracy(model, val_set);
    row.learning_rate = lr;
    report.epochs.push_back(row);

    val_history.push_back(row.val_accuracy);
    lr = plateau_lr(val_history, plateau);

    if (callback) callback(epoch, row);
  }

  report.wall_seconds = now_seconds() - t0;
  return report;
}

}  // namespace ecg::optim
