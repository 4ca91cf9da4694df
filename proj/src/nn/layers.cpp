#include "ecg/nn/layers.hpp"

#include <cmath>

namespace ecg::nn {

// ---------------------------------------------------------------------------
// Conv1d
// ---------------------------------------------------------------------------

Conv1d::Conv1d(std::string name, int c_in, int c_out, int kernel, int stride,
               int pad, Rng& rng)
    : weight(std::move(name) + ".weight", {c_out, c_in, kernel}),
      c_in(c_in), c_out(c_out), kernel(kernel), stride(stride), pad(pad) {
  // Kaiming fan-in scaling for ReLU nets; no bias.
  const double std_dev = std::sqrt(2.0 / (static_cast<double>(c_in) * kernel));
  for (auto& v : weight.value.data) v = rng.normal(0.0, std_dev);
}

NumericBatch Conv1d::forward(const NumericBatch& x) {
  if (x.channels != c_in)
    throw ValidationError("conv '" + weight.name + "': input has " +
                          std::to_string(x.channels) + " channels, expected " +
                          std::to_string(c_in));
  const int t_out = conv_out_len(x.time, kernel, stride, pad);
  if (t_out < 1)
    throw ValidationError("conv '" + weight.name + "': input too short");
  x_cache_ = x;
  NumericBatch y(x.batch, c_out, t_out);
  kernels::conv1d_forward(x.values.data(), x.batch, c_in, x.time,
                          weight.value.data.data(), c_out, kernel, stride, pad,
                          y.values.data(), t_out);
  return y;
}

NumericBatch Conv1d::backward(const NumericBatch& dy) {
  NumericBatch dx(x_cache_.batch, c_in, x_cache_.time);
  kernels::conv1d_backward_input(dy.values.data(), dy.batch, c_out, dy.time,
                                 weight.value.data.data(), c_in, kernel,
                                 stride, pad, dx.values.data(), x_cache_.time);
  kernels::conv1d_backward_weight(x_cache_.values.data(), dy.values.data(),
                                  dy.batch, c_in, x_cache_.time, c_out, kernel,
                                  stride, pad, weight.grad.data.data(),
                                  dy.time);
  return dx;
}

// ---------------------------------------------------------------------------
// BatchNorm1d
// ---------------------------------------------------------------------------

BatchNorm1d::BatchNorm1d(std::string name, int channels)
    : gamma(name + ".gamma", {channels}),
      beta(name + ".beta", {channels}),
      running_mean(std::vector<int>{channels}),
      running_var(std::vector<int>{channels}),
      channels(channels) {
  std::fill(gamma.value.data.begin(), gamma.value.data.end(), 1.0);
  std::fill(running_var.data.begin(), running_var.data.end(), 1.0);
}

NumericBatch BatchNorm1d::forward(const NumericBatch& x, Mode mode) {
  if (x.channels != channels)
    throw ValidationError("batchnorm '" + gamma.name + "': channel mismatch");
  mode_cache_ = mode;
  std::vector<double> mean(channels), var(channels);
  if (mode == Mode::train) {
    if (static_cast<int64_t>(x.batch) * x.time < 2)
      throw ValidationError("batchnorm '" + gamma.name +
                            "' needs batch*time >= 2 in train mode");
    kernels::channel_mean_var(x.values.data(), x.batch, channels, x.time,
                              mean.data(), var.data());
    for (int c = 0; c < channels; ++c) {
      running_mean.data[c] =
          (1.0 - momentum) * running_mean.data[c] + momentum * mean[c];
      running_var.data[c] =
          (1.0 - momentum) * running_var.data[c] + momentum * var[c];
    }
  } else {
    mean.assign(running_mean.data.begin(), running_mean.data.end());
    var.assign(running_var.data.begin(), running_var.data.end());
  }
  inv_std_cache_.resize(channels);
  for (int c = 0; c < channels; ++c)
    inv_std_cache_[c] = 1.0 / std::sqrt(var[c] + eps);

  NumericBatch y(x.batch, channels, x.time);
  xhat_cache_ = NumericBatch(x.batch, channels, x.time);
  kernels::bn_forward_affine(x.values.data(), x.batch, channels, x.time,
                             mean.data(), inv_std_cache_.data(),
                             gamma.value.data.data(), beta.value.data.data(),
                             y.values.data(), xhat_cache_.values.data());
  return y;
}

NumericBatch BatchNorm1d::backward(const NumericBatch& dy) {
  NumericBatch dx(dy.batch, channels, dy.time);
  if (mode_cache_ == Mode::train) {
    kernels::bn_backward(dy.values.data(), xhat_cache_.values.data(), dy.batch,
                         channels, dy.time, gamma.value.data.data(),
                         inv_std_cache_.data(), dx.values.data(),
                         gamma.grad.data.data(), beta.grad.data.data());
  } else {
    // Eval-mode statistics are constants: dx = dy * gamma * inv_std.
    for (int b = 0; b < dy.batch; ++b)
      for (int c = 0; c < channels; ++c) {
        const double g = gamma.value.data[c] * inv_std_cache_[c];
        const double* dyr = dy.row(b, c);
        const double* xh = xhat_cache_.row(b, c);
        double* dxr = dx.row(b, c);
        for (int i = 0; i < dy.time; ++i) {
          dxr[i] += g * dyr[i];
          gamma.grad.data[c] += dyr[i] * xh[i];
          beta.grad.data[c] += dyr[i];
        }
      }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// ReLU
// ---------------------------------------------------------------------------

NumericBatch ReLU::forward(const NumericBatch& x) {
  x_cache_ = x;
  NumericBatch y(x.batch, x.channels, x.time);
  kernels::relu_forward(x.values.data(), y.values.data(),
                        static_cast<int64_t>(x.numel()));
  return y;
}

NumericBatch ReLU::backward(const NumericBatch& dy) {
  NumericBatch dx(dy.batch, dy.channels, dy.time);
  kernels::relu_backward(x_cache_.values.data(), dy.values.data(),
                         dx.values.data(), static_cast<int64_t>(dy.numel()));
  return dx;
}

// ---------------------------------------------------------------------------
// MaxPool1d
// ---------------------------------------------------------------------------

NumericBatch MaxPool1d::forward(const NumericBatch& x) {
  if (x.time < size)
    throw ValidationError("maxpool: time axis " + std::to_string(x.time) +
                          " shorter than pool size " + std::to_string(size));
  const int t_out = x.time / size;
  t_in_cache_ = x.time;
  NumericBatch y(x.batch, x.channels, t_out);
  argmax_cache_.assign(y.numel(), 0);
  kernels::maxpool_forward(x.values.data(), x.batch, x.channels, x.time, size,
                           y.values.data(), argmax_cache_.data(), t_out);
  return y;
}

NumericBatch MaxPool1d::backward(const NumericBatch& dy) {
  NumericBatch dx(dy.batch, dy.channels, t_in_cache_);
  kernels::maxpool_backward(dy.values.data(), argmax_cache_.data(), dy.batch,
                            dy.channels, dy.time, t_in_cache_,
                            dx.values.data());
  return dx;
}

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

NumericBatch Dropout::forward(const NumericBatch& x, Mode mode, Rng& rng) {
  if (keep_prob <= 0.0 || keep_prob > 1.0)
    throw ValidationError("dropout keep_prob must lie in (0,1]");
  active_ = (mode == Mode::train && keep_prob < 1.0);
  if (!active_) return x;

  // Mask drawn serially from the training stream so results do not depend on
  // the thread count; the multiply is the parallel part.
  const double inv_keep = 1.0 / keep_prob;
  mask_cache_.resize(x.numel());
  for (auto& m : mask_cache_) m = rng.uniform() < keep_prob ? inv_keep : 0.0;

  NumericBatch y(x.batch, x.channels, x.time);
  kernels::scale_mask(x.values.data(), mask_cache_.data(), y.values.data(),
                      static_cast<int64_t>(x.numel()));
  return y;
}

NumericBatch Dropout::backward(const NumericBatch& dy) {
  if (!active_) return dy;
  NumericBatch dx(dy.batch, dy.channels, dy.time);
  kernels::scale_mask(dy.values.data(), mask_cache_.data(), dx.values.data(),
                      static_cast<int64_t>(dy.numel()));
  return dx;
}

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

Dense::Dense(std::string name, int in_dim, int out_dim, Rng& rng)
    : weight(name + ".weight", {out_dim, in_dim}),
      bias(name + ".bias", {out_dim}),
      in_dim(in_dim), out_dim(out_dim) {
  const double std_dev = std::sqrt(2.0 / static_cast<double>(in_dim));
  for (auto& v : weight.value.data) v = rng.normal(0.0, std_dev);
}

Tensor Dense::forward(const Tensor& x) {
  const int batch = x.shape[0];
  if (x.shape[1] != in_dim)
    throw ValidationError("dense '" + weight.name + "': input dim " +
                          std::to_string(x.shape[1]) + ", expected " +
                          std::to_string(in_dim));
  x_cache_ = x;
  Tensor y({batch, out_dim});
  kernels::dense_forward(x.data.data(), batch, in_dim,
                         weight.value.data.data(), bias.value.data.data(),
                         out_dim, y.data.data());
  return y;
}

Tensor Dense::backward(const Tensor& dy) {
  const int batch = dy.shape[0];
  Tensor dx({batch, in_dim});
  kernels::dense_backward(x_cache_.data.data(), dy.data.data(), batch, in_dim,
                          out_dim, weight.value.data.data(), dx.data.data(),
                          weight.grad.data.data(), bias.grad.data.data());
  return dx;
}

// ---------------------------------------------------------------------------
// GlobalAvgPool / Flatten
// ---------------------------------------------------------------------------

Tensor GlobalAvgPool::forward(const NumericBatch& x) {
  batch_ = x.batch;
  channels_ = x.channels;
  time_ = x.time;
  Tensor y({x.batch, x.channels});
  kernels::gap_forward(x.values.data(), x.batch, x.channels, x.time,
                       y.data.data());
  return y;
}

NumericBatch GlobalAvgPool::backward(const Tensor& dy) {
  NumericBatch dx(batch_, channels_, time_);
  kernels::gap_backward(dy.data.data(), batch_, channels_, time_,
                        dx.values.data());
  return dx;
}

Tensor Flatten::forward(const NumericBatch& x) {
  batch_ = x.batch;
  channels_ = x.channels;
  time_ = x.time;
  Tensor y({x.batch, x.channels * x.time});
  y.data = x.values;
  return y;
}

NumericBatch Flatten::backward(const Tensor& dy) {
  NumericBatch dx(batch_, channels_, time_);
  dx.values = dy.data;
  return dx;
}

}  // namespace ecg::nn
