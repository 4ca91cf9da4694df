#include "ecg/nn/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

namespace ecg::nn {

// ---------------------------------------------------------------------------
// Config validation
// ---------------------------------------------------------------------------

void BackboneConfig::validate() const {
  if (stem_filters < 1) throw ValidationError("stem_filters must be >= 1");
  if (num_blocks < 1) throw ValidationError("num_blocks must be >= 1");
  if (static_cast<int>(filter_schedule.size()) != num_blocks)
    throw ValidationError("filter_schedule length " +
                          std::to_string(filter_schedule.size()) +
                          " != num_blocks " + std::to_string(num_blocks));
  for (int f : filter_schedule)
    if (f < 1) throw ValidationError("filter_schedule entries must be >= 1");
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw ValidationError("kernel_size must be odd");
  if (pool_every < 1) throw ValidationError("pool_every must be >= 1");
  if (dropout_keep_train <= 0.0 || dropout_keep_train > 1.0)
    throw ValidationError("dropout_keep_train must lie in (0,1]");
  if (num_categories < 2) throw ValidationError("num_categories must be >= 2");
}

void SimpleCnnConfig::validate() const {
  if (channels.empty()) throw ValidationError("channels must be non-empty");
  for (int c : channels)
    if (c < 1) throw ValidationError("channels entries must be >= 1");
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw ValidationError("kernel_size must be odd");
  if (pool_size < 2) throw ValidationError("pool_size must be >= 2");
  if (input_length < 1) throw ValidationError("input_length must be >= 1");
  if (num_categories < 2) throw ValidationError("num_categories must be >= 2");
}

// ---------------------------------------------------------------------------
// ResidualBlock
// ---------------------------------------------------------------------------

ResidualBlock::ResidualBlock(const std::string& name, int c_in, int c_out,
                             int kernel, double dropout_keep, Rng& rng)
    : bn1(name + ".bn1", c_in),
      conv1(name + ".conv1", c_in, c_out, kernel, 1, (kernel - 1) / 2, rng),
      drop(dropout_keep),
      bn2(name + ".bn2", c_out),
      conv2(name + ".conv2", c_out, c_out, kernel, 1, (kernel - 1) / 2, rng) {
  if (c_in != c_out)
    projection.emplace(name + ".proj", c_in, c_out, 1, 1, 0, rng);
}

NumericBatch ResidualBlock::forward(const NumericBatch& x, Mode mode,
                                    Rng& rng) {
  NumericBatch f = relu1.forward(conv1.forward(bn1.forward(x, mode)));
  f = drop.forward(f, mode, rng);
  f = relu2.forward(conv2.forward(bn2.forward(f, mode)));
  const NumericBatch* shortcut = &x;
  NumericBatch projected;
  if (projection) {
    projected = projection->forward(x);
    shortcut = &projected;
  }
  NumericBatch y(f.batch, f.channels, f.time);
  kernels::add_elementwise(f.values.data(), shortcut->values.data(),
                           y.values.data(), static_cast<int64_t>(f.numel()));
  return y;
}

NumericBatch ResidualBlock::backward(const NumericBatch& dy) {
  NumericBatch d_main = bn2.backward(conv2.backward(relu2.backward(dy)));
  d_main = drop.backward(d_main);
  NumericBatch dx = bn1.backward(conv1.backward(relu1.backward(d_main)));
  NumericBatch d_short = projection ? projection->backward(dy) : dy;
  NumericBatch out(dx.batch, dx.channels, dx.time);
  kernels::add_elementwise(dx.values.data(), d_short.values.data(),
                           out.values.data(),
                           static_cast<int64_t>(dx.numel()));
  return out;
}

void ResidualBlock::collect_params(std::vector<Param*>& out) {
  out.push_back(&bn1.gamma);
  out.push_back(&bn1.beta);
  out.push_back(&conv1.weight);
  out.push_back(&bn2.gamma);
  out.push_back(&bn2.beta);
  out.push_back(&conv2.weight);
  if (projection) out.push_back(&projection->weight);
}

void ResidualBlock::collect_state(std::vector<NamedTensor>& out) {
  out.push_back({bn1.gamma.name + ".running_mean", &bn1.running_mean});
  out.push_back({bn1.gamma.name + ".running_var", &bn1.running_var});
  out.push_back({bn2.gamma.name + ".running_mean", &bn2.running_mean});
  out.push_back({bn2.gamma.name + ".running_var", &bn2.running_var});
}

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

void Network::zero_grad() {
  for (Param* p : parameters()) p->grad.zero();
}

size_t Network::parameter_count() {
  size_t n = 0;
  for (Param* p : parameters()) n += p->value.numel();
  return n;
}

// ---------------------------------------------------------------------------
// Backbone
// ---------------------------------------------------------------------------

Backbone::Backbone(const BackboneConfig& config, uint64_t init_seed)
    : config_(config) {
  config_.validate();
  Rng rng(init_seed);
  stem_ = Conv1d("stem", 1, config_.stem_filters, config_.kernel_size, 1,
                 (config_.kernel_size - 1) / 2, rng);
  int c_prev = config_.stem_filters;
  for (int i = 0; i < config_.num_blocks; ++i) {
    const int c_out = config_.filter_schedule[i];
    blocks_.emplace_back("block" + std::to_string(i + 1), c_prev, c_out,
                         config_.kernel_size, config_.dropout_keep_train, rng);
    c_prev = c_out;
    if ((i + 1) % config_.pool_every == 0) {
      pool_after_.push_back(i);
      pools_.emplace_back(2);
    }
  }
  head_ = Dense("head", c_prev, config_.num_categories, rng);
}

Tensor Backbone::forward(const NumericBatch& x, Mode mode, Rng& rng) {
  if (x.channels != 1)
    throw ValidationError("backbone expects single-channel input");
  NumericBatch h = stem_.forward(x);
  size_t pool_idx = 0;
  for (int i = 0; i < config_.num_blocks; ++i) {
    h = blocks_[i].forward(h, mode, rng);
    if (pool_idx < pool_after_.size() && pool_after_[pool_idx] == i)
      h = pools_[pool_idx++].forward(h);
  }
  return head_.forward(gap_.forward(h));
}

NumericBatch Backbone::backward(const Tensor& dlogits) {
  NumericBatch dh = gap_.backward(head_.backward(dlogits));
  size_t pool_idx = pools_.size();
  for (int i = config_.num_blocks - 1; i >= 0; --i) {
    if (pool_idx > 0 && pool_after_[pool_idx - 1] == i)
      dh = pools_[--pool_idx].backward(dh);
    dh = blocks_[i].backward(dh);
  }
  return stem_.backward(dh);
}

std::vector<Param*> Backbone::parameters() {
  std::vector<Param*> out;
  out.push_back(&stem_.weight);
  for (auto& b : blocks_) b.collect_params(out);
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

std::vector<NamedTensor> Backbone::state_tensors() {
  std::vector<NamedTensor> out;
  for (auto& b : blocks_) b.collect_state(out);
  return out;
}

std::vector<Dropout*> Backbone::dropout_layers() {
  std::vector<Dropout*> out;
  for (auto& b : blocks_) out.push_back(&b.drop);
  return out;
}

std::unique_ptr<Backbone> build_backbone(const BackboneConfig& config,
                                         uint64_t init_seed) {
  return std::make_unique<Backbone>(config, init_seed);
}

// ---------------------------------------------------------------------------
// SimpleCnn
// ---------------------------------------------------------------------------

SimpleCnn::SimpleCnn(const SimpleCnnConfig& config, uint64_t init_seed)
    : config_(config) {
  config_.validate();
  Rng rng(init_seed);
  int c_prev = 1;
  int t = config_.input_length;
  for (size_t i = 0; i < config_.channels.size(); ++i) {
    convs_.emplace_back("conv" + std::to_string(i + 1), c_prev,
                        config_.channels[i], config_.kernel_size, 1,
                        (config_.kernel_size - 1) / 2, rng);
    relus_.emplace_back();
    pools_.emplace_back(config_.pool_size);
    c_prev = config_.channels[i];
    t /= config_.pool_size;
    if (t < 1)
      throw ValidationError("input_length too short for the pooling cascade");
  }
  head_ = Dense("head", c_prev * t, config_.num_categories, rng);
}

Tensor SimpleCnn::forward(const NumericBatch& x, Mode mode, Rng& rng) {
  (void)mode;
  (void)rng;
  if (x.channels != 1)
    throw ValidationError("cnn expects single-channel input");
  if (x.time != config_.input_length)
    throw ValidationError("cnn built for input length " +
                          std::to_string(config_.input_length) + ", got " +
                          std::to_string(x.time));
  NumericBatch h = x;
  for (size_t i = 0; i < convs_.size(); ++i)
    h = pools_[i].forward(relus_[i].forward(convs_[i].forward(h)));
  return head_.forward(flatten_.forward(h));
}

NumericBatch SimpleCnn::backward(const Tensor& dlogits) {
  NumericBatch dh = flatten_.backward(head_.backward(dlogits));
  for (size_t i = convs_.size(); i-- > 0;)
    dh = convs_[i].backward(relus_[i].backward(pools_[i].backward(dh)));
  return dh;
}

std::vector<Param*> SimpleCnn::parameters() {
  std::vector<Param*> out;
  for (auto& c : convs_) out.push_back(&c.weight);
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

std::vector<NamedTensor> SimpleCnn::state_tensors() { return {}; }

std::unique_ptr<SimpleCnn> build_simple_cnn(const SimpleCnnConfig& config,
                                            uint64_t init_seed) {
  return std::make_unique<SimpleCnn>(config, init_seed);
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[7] = {'E', 'C', 'G', 'C', 'R', 'N', '1'};
constexpr uint8_t kVersion = 1;
constexpr uint8_t kArchResnet = 0;
constexpr uint8_t kArchCnn = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("checkpoint truncated");
  return v;
}

void write_int_list(std::ofstream& out, const std::vector<int>& v) {
  write_pod<uint32_t>(out, static_cast<uint32_t>(v.size()));
  for (int x : v) write_pod<int32_t>(out, x);
}

std::vector<int> read_int_list(std::ifstream& in) {
  const uint32_t n = read_pod<uint32_t>(in);
  if (n > 1u << 20) throw ValidationError("checkpoint list length implausible");
  std::vector<int> v(n);
  for (auto& x : v) x = read_pod<int32_t>(in);
  return v;
}

void write_string(std::ofstream& out, const std::string& s) {
  write_pod<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), s.size());
}

std::string read_string(std::ifstream& in) {
  const uint32_t n = read_pod<uint32_t>(in);
  if (n > 1u << 16) throw ValidationError("checkpoint name length implausible");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw IoError("checkpoint truncated");
  return s;
}

void write_tensor(std::ofstream& out, const std::string& name,
                  const Tensor& t) {
  write_string(out, name);
  write_int_list(out, t.shape);
  out.write(reinterpret_cast<const char*>(t.data.data()),
            t.data.size() * sizeof(double));
}

}  // namespace

void save_checkpoint(Network& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  write_pod<uint8_t>(out, kVersion);

  if (auto* bb = dynamic_cast<Backbone*>(&model)) {
    write_pod<uint8_t>(out, kArchResnet);
    const auto& c = bb->config();
    write_pod<int32_t>(out, c.stem_filters);
    write_pod<int32_t>(out, c.num_blocks);
    write_int_list(out, c.filter_schedule);
    write_pod<int32_t>(out, c.kernel_size);
    write_pod<int32_t>(out, c.pool_every);
    write_pod<double>(out, c.dropout_keep_train);
    write_pod<int32_t>(out, c.num_categories);
  } else if (auto* cnn = dynamic_cast<SimpleCnn*>(&model)) {
    write_pod<uint8_t>(out, kArchCnn);
    const auto& c = cnn->config();
    write_int_list(out, c.channels);
    write_pod<int32_t>(out, c.kernel_size);
    write_pod<int32_t>(out, c.pool_size);
    write_pod<int32_t>(out, c.input_length);
    write_pod<int32_t>(out, c.num_categories);
  } else {
    throw ValidationError("unknown network architecture for checkpointing");
  }

  const auto params = model.parameters();
  const auto state = model.state_tensors();
  write_pod<uint32_t>(out, static_cast<uint32_t>(params.size() + state.size()));
  for (const Param* p : params) write_tensor(out, p->name, p->value);
  for (const NamedTensor& s : state) write_tensor(out, s.name, *s.tensor);
  if (!out) throw IoError("write failed for checkpoint '" + path + "'");
}

std::unique_ptr<Network> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  char magic[7];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw ValidationError("bad checkpoint magic in '" + path + "'");
  const uint8_t version = read_pod<uint8_t>(in);
  if (version != kVersion)
    throw ValidationError("unsupported checkpoint version " +
                          std::to_string(version));

  std::unique_ptr<Network> model;
  const uint8_t arch = read_pod<uint8_t>(in);
  if (arch == kArchResnet) {
    BackboneConfig c;
    c.stem_filters = read_pod<int32_t>(in);
    c.num_blocks = read_pod<int32_t>(in);
    c.filter_schedule = read_int_list(in);
    c.kernel_size = read_pod<int32_t>(in);
    c.pool_every = read_pod<int32_t>(in);
    c.dropout_keep_train = read_pod<double>(in);
    c.num_categories = read_pod<int32_t>(in);
    model = std::make_unique<Backbone>(c, 0);
  } else if (arch == kArchCnn) {
    SimpleCnnConfig c;
    c.channels = read_int_list(in);
    c.kernel_size = read_pod<int32_t>(in);
    c.pool_size = read_pod<int32_t>(in);
    c.input_length = read_pod<int32_t>(in);
    c.num_categories = read_pod<int32_t>(in);
    model = std::make_unique<SimpleCnn>(c, 0);
  } else {
    throw ValidationError("unknown architecture tag " + std::to_string(arch));
  }

  std::map<std::string, Tensor*> slots;
  for (Param* p : model->parameters()) slots[p->name] = &p->value;
  for (NamedTensor& s : model->state_tensors()) slots[s.name] = s.tensor;

  const uint32_t count = read_pod<uint32_t>(in);
  if (count != slots.size())
    throw ValidationError("checkpoint holds " + std::to_string(count) +
                          " tensors, model expects " +
                          std::to_string(slots.size()));
  for (uint32_t i = 0; i < count; ++i) {
    const std::string name = read_string(in);
    const std::vector<int> shape = read_int_list(in);
    auto it = slots.find(name);
    if (it == slots.end())
      throw ValidationError("checkpoint tensor '" + name +
                            "' unknown to the model");
    Tensor* dst = it->second;
    if (shape != dst->shape)
      throw ValidationError("checkpoint tensor '" + name + "' shape mismatch");
    in.read(reinterpret_cast<char*>(dst->data.data()),
            dst->data.size() * sizeof(double));
    if (!in) throw IoError("checkpoint truncated in tensor '" + name + "'");
  }
  return model;
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

GradCheckResult gradient_check(Network& model, const NumericBatch& x,
                               const LossFn& loss, double epsilon,
                               int max_coords_per_tensor, uint64_t seed) {
  // Dropout off: the finite-difference loss must be a deterministic function
  // of the parameters. Batch norm stays in train-mode math.
  std::vector<double> saved_keep;
  for (Dropout* d : model.dropout_layers()) {
    saved_keep.push_back(d->keep_prob);
    d->keep_prob = 1.0;
  }
  Rng fwd_rng(seed);

  auto eval_loss = [&]() {
    return loss(model.forward(x, Mode::train, fwd_rng)).first;
  };

  // One analytic pass.
  model.zero_grad();
  Tensor logits = model.forward(x, Mode::train, fwd_rng);
  auto [base_loss, dlogits] = loss(logits);
  (void)base_loss;
  model.backward(dlogits);

  GradCheckResult result;
  Rng pick(seed);
  for (Param* p : model.parameters()) {
    const size_t n = p->value.numel();
    std::vector<size_t> coords;
    if (static_cast<int>(n) <= max_coords_per_tensor) {
      coords.resize(n);
      for (size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      for (int i = 0; i < max_coords_per_tensor; ++i)
        coords.push_back(static_cast<size_t>(pick.uniform_int(n)));
    }
    double tensor_max = 0.0;
    for (size_t c : coords) {
      const double orig = p->value.data[c];
      p->value.data[c] = orig + epsilon;
      const double lp = eval_loss();
      p->value.data[c] = orig - epsilon;
      const double lm = eval_loss();
      p->value.data[c] = orig;
      const double numeric = (lp - lm) / (2.0 * epsilon);
      const double analytic = p->grad.data[c];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric),
                                   1e-8});
      tensor_max = std::max(tensor_max, rel);
      ++result.coords_checked;
    }
    result.per_tensor.emplace_back(p->name, tensor_max);
    result.max_rel_error = std::max(result.max_rel_error, tensor_max);
  }

  auto drops = model.dropout_layers();
  for (size_t i = 0; i < drops.size(); ++i) drops[i]->keep_prob = saved_keep[i];
  return result;
}

}  // namespace ecg::nn
