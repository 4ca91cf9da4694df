#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ecg/nn/layers.hpp"

namespace ecg::nn {

// ---------------------------------------------------------------------------
// Configurations
// ---------------------------------------------------------------------------

/// Residual backbone: stem conv, num_blocks residual blocks with the given
/// filter schedule, a max pool after every pool_every blocks, global average
/// pooling, dense head.
struct BackboneConfig {
  int stem_filters = 64;
  int num_blocks = 5;
  std::vector<int> filter_schedule = {64, 64, 128, 128, 256};
  int kernel_size = 3;
  int pool_every = 2;
  double dropout_keep_train = 0.5;
  int num_categories = 5;

  void validate() const;
};

/// Plain conv-relu-maxpool stack with a flatten + dense head. Needs a fixed
/// input length.
struct SimpleCnnConfig {
  std::vector<int> channels = {8, 16, 32};
  int kernel_size = 3;
  int pool_size = 2;
  int input_length = 600;
  int num_categories = 5;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Residual block (Fig. 7-style): two BN-Conv-ReLU stages with dropout in
// between, added to an identity shortcut (1x1 projection when the channel
// count changes).
// ---------------------------------------------------------------------------
struct ResidualBlock {
  BatchNorm1d bn1;
  Conv1d conv1;
  ReLU relu1;
  Dropout drop;
  BatchNorm1d bn2;
  Conv1d conv2;
  ReLU relu2;
  std::optional<Conv1d> projection;

  ResidualBlock(const std::string& name, int c_in, int c_out, int kernel,
                double dropout_keep, Rng& rng);

  NumericBatch forward(const NumericBatch& x, Mode mode, Rng& rng);
  NumericBatch backward(const NumericBatch& dy);
  void collect_params(std::vector<Param*>& out);
  void collect_state(std::vector<NamedTensor>& out);
};

// ---------------------------------------------------------------------------
// Network interface shared by the backbone and the stage-1 CNN.
// ---------------------------------------------------------------------------
class Network {
 public:
  virtual ~Network() = default;

  /// Returns logits [B, num_categories]. Train mode consumes rng for dropout
  /// and updates batch-norm running statistics; eval mode is a pure function
  /// of (parameters, input).
  virtual Tensor forward(const NumericBatch& x, Mode mode, Rng& rng) = 0;

  /// Propagates dlogits; accumulates parameter gradients.
  virtual NumericBatch backward(const Tensor& dlogits) = 0;

  virtual std::vector<Param*> parameters() = 0;
  virtual std::vector<NamedTensor> state_tensors() = 0;
  virtual std::vector<Dropout*> dropout_layers() = 0;
  virtual std::string architecture() const = 0;
  virtual int num_categories() const = 0;

  void zero_grad();
  size_t parameter_count();
};

class Backbone : public Network {
 public:
  Backbone(const BackboneConfig& config, uint64_t init_seed);

  Tensor forward(const NumericBatch& x, Mode mode, Rng& rng) override;
  NumericBatch backward(const Tensor& dlogits) override;
  std::vector<Param*> parameters() override;
  std::vector<NamedTensor> state_tensors() override;
  std::vector<Dropout*> dropout_layers() override;
  std::string architecture() const override { return "resnet"; }
  int num_categories() const override { return config_.num_categories; }

  const BackboneConfig& config() const { return config_; }

 private:
  BackboneConfig config_;
  Conv1d stem_;
  std::vector<ResidualBlock> blocks_;
  std::vector<MaxPool1d> pools_;
  std::vector<int> pool_after_;  // indices of blocks followed by a pool
  GlobalAvgPool gap_;
  Dense head_;
};

class SimpleCnn : public Network {
 public:
  SimpleCnn(const SimpleCnnConfig& config, uint64_t init_seed);

  Tensor forward(const NumericBatch& x, Mode mode, Rng& rng) override;
  NumericBatch backward(const Tensor& dlogits) override;
  std::vector<Param*> parameters() override;
  std::vector<NamedTensor> state_tensors() override;
  std::vector<Dropout*> dropout_layers() override { return {}; }
  std::string architecture() const override { return "cnn"; }
  int num_categories() const override { return config_.num_categories; }

  const SimpleCnnConfig& config() const { return config_; }

 private:
  SimpleCnnConfig config_;
  std::vector<Conv1d> convs_;
  std::vector<ReLU> relus_;
  std::vector<MaxPool1d> pools_;
  Flatten flatten_;
  Dense head_;
};

/// build_backbone is the seeded factory: same (config, seed) gives identical
/// initial parameters.
std::unique_ptr<Backbone> build_backbone(const BackboneConfig& config,
                                         uint64_t init_seed);
std::unique_ptr<SimpleCnn> build_simple_cnn(const SimpleCnnConfig& config,
                                            uint64_t init_seed);

// ---------------------------------------------------------------------------
// Checkpoints: magic "ECGCRN1", version byte, architecture tag, serialized
// config, then named tensors (parameters + running stats) as little-endian
// float64 with explicit shapes. Unknown versions are rejected.
// ---------------------------------------------------------------------------
void save_checkpoint(Network& model, const std::string& path);
std::unique_ptr<Network> load_checkpoint(const std::string& path);

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

/// Loss callback: logits -> (scalar loss, dloss/dlogits).
using LossFn = std::function<std::pair<double, Tensor>(const Tensor&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::vector<std::pair<std::string, double>> per_tensor;
  int coords_checked = 0;
};

/// Central finite differences against the analytic backward pass on up to
/// max_coords_per_tensor seeded coordinates per parameter tensor. Runs the
/// model in train-mode batch-norm math with dropout forced off. Relative
/// error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
GradCheckResult gradient_check(Network& model, const NumericBatch& x,
                               const LossFn& loss, double epsilon,
                               int max_coords_per_tensor, uint64_t seed);

}  // namespace ecg::nn
