#pragma once

#include <string>
#include <vector>

#include "ecg/common.hpp"
#include "ecg/nn/kernels.hpp"
#include "ecg/tensor.hpp"

namespace ecg::nn {

enum class Mode { train, eval };

// Each layer owns its parameters and the forward cache its backward needs.
// A layer instance is used once per forward pass; backward must follow the
// matching forward.

/// 1D cross-correlation, zero padding, no bias.
struct Conv1d {
  Param weight;  // [C_out, C_in, K]
  int c_in = 0, c_out = 0, kernel = 0, stride = 1, pad = 1;

  Conv1d() = default;
  Conv1d(std::string name, int c_in, int c_out, int kernel, int stride,
         int pad, Rng& rng);

  NumericBatch forward(const NumericBatch& x);
  NumericBatch backward(const NumericBatch& dy);

 private:
  NumericBatch x_cache_;
};

/// Per-channel batch normalization over (batch, time).
struct BatchNorm1d {
  Param gamma, beta;               // [C]
  Tensor running_mean, running_var;  // [C]
  double eps = 1e-5;
  double momentum = 0.1;
  int channels = 0;

  BatchNorm1d() = default;
  BatchNorm1d(std::string name, int channels);

  NumericBatch forward(const NumericBatch& x, Mode mode);
  NumericBatch backward(const NumericBatch& dy);

 private:
  NumericBatch xhat_cache_;
  std::vector<double> inv_std_cache_;
  Mode mode_cache_ = Mode::train;
};

struct ReLU {
  NumericBatch forward(const NumericBatch& x);
  NumericBatch backward(const NumericBatch& dy);

 private:
  NumericBatch x_cache_;
};

/// Non-overlapping max pooling; the trailing remainder is dropped.
struct MaxPool1d {
  int size = 2;

  explicit MaxPool1d(int size = 2) : size(size) {}

  NumericBatch forward(const NumericBatch& x);
  NumericBatch backward(const NumericBatch& dy);

 private:
  std::vector<int> argmax_cache_;
  int t_in_cache_ = 0;
};

/// Inverted dropout: kept values are scaled by 1/keep_prob at train time,
/// eval is the identity. keep_prob == 1 draws nothing from the rng.
struct Dropout {
  double keep_prob = 0.5;

  explicit Dropout(double keep_prob = 0.5) : keep_prob(keep_prob) {}

  NumericBatch forward(const NumericBatch& x, Mode mode, Rng& rng);
  NumericBatch backward(const NumericBatch& dy);

 private:
  std::vector<double> mask_cache_;  // 0 or 1/keep_prob
  bool active_ = false;
};

/// Fully connected layer on [B, in_dim] tensors.
struct Dense {
  Param weight;  // [out, in]
  Param bias;    // [out]
  int in_dim = 0, out_dim = 0;

  Dense() = default;
  Dense(std::string name, int in_dim, int out_dim, Rng& rng);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

 private:
  Tensor x_cache_;
};

/// Mean over the time axis: [B, C, T] -> [B, C].
struct GlobalAvgPool {
  Tensor forward(const NumericBatch& x);
  NumericBatch backward(const Tensor& dy);

 private:
  int batch_ = 0, channels_ = 0, time_ = 0;
};

/// [B, C, T] -> [B, C*T].
struct Flatten {
  Tensor forward(const NumericBatch& x);
  NumericBatch backward(const Tensor& dy);

 private:
  int batch_ = 0, channels_ = 0, time_ = 0;
};

}  // namespace ecg::nn
