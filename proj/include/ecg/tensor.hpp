#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "ecg/common.hpp"

namespace ecg {

// ---------------------------------------------------------------------------
// Tensor: flat double storage with an explicit shape. Used for parameters,
// gradients, optimizer moments, and logits ([B, K]).
// ---------------------------------------------------------------------------
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(numel_of(shape), 0.0);
  }

  static size_t numel_of(const std::vector<int>& s) {
    size_t n = 1;
    for (int d : s) n *= static_cast<size_t>(d);
    return n;
  }

  size_t numel() const { return data.size(); }
  void zero() { std::fill(data.begin(), data.end(), 0.0); }

  double& operator[](size_t i) { return data[i]; }
  double operator[](size_t i) const { return data[i]; }
};

/// Named trainable parameter: value plus gradient of identical shape.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param() = default;
  Param(std::string n, std::vector<int> shape)
      : name(std::move(n)), value(shape), grad(std::move(shape)) {}
};

/// Named non-trainable state tensor (batch-norm running statistics).
struct NamedTensor {
  std::string name;
  Tensor* tensor = nullptr;
};

// ---------------------------------------------------------------------------
// NumericBatch: rank-3 array (batch x channels x time), row-major.
// ---------------------------------------------------------------------------
struct NumericBatch {
  int batch = 0;
  int channels = 0;
  int time = 0;
  std::vector<double> values;

  NumericBatch() = default;
  NumericBatch(int b, int c, int t)
      : batch(b), channels(c), time(t),
        values(static_cast<size_t>(b) * c * t, 0.0) {
    if (b < 1 || c < 1 || t < 1)
      throw ValidationError("NumericBatch: all dims must be >= 1");
  }

  size_t numel() const { return values.size(); }

  double& at(int b, int c, int t) {
    return values[(static_cast<size_t>(b) * channels + c) * time + t];
  }
  double at(int b, int c, int t) const {
    return values[(static_cast<size_t>(b) * channels + c) * time + t];
  }

  double* row(int b, int c) {
    return values.data() + (static_cast<size_t>(b) * channels + c) * time;
  }
  const double* row(int b, int c) const {
    return values.data() + (static_cast<size_t>(b) * channels + c) * time;
  }
};

}  // namespace ecg
