// Benchmark: serial reference kernels vs the OpenMP kernels, plus a full
// backbone forward/backward at a training-like shape. The two paths are
// bit-identical; this tool only compares wall time.

#include <cstdio>
#include <cstring>
#include <vector>

#include "ecg/common.hpp"
#include "ecg/nn/kernels.hpp"
#include "ecg/nn/model.hpp"
#include "ecg/optim.hpp"

using namespace ecg;

namespace {

struct Timing {
  double serial_ms = 0.0;
  double omp_ms = 0.0;
};

void report(const char* name, const Timing& t) {
  std::printf("%-28s serial %9.2f ms   omp %9.2f ms   speedup %5.2fx\n", name,
              t.serial_ms, t.omp_ms, t.omp_ms > 0 ? t.serial_ms / t.omp_ms : 0.0);
}

template <typename F>
double time_ms(F&& fn, int reps) {
  const double t0 = now_seconds();
  for (int r = 0; r < reps; ++r) fn();
  return (now_seconds() - t0) * 1000.0 / reps;
}

}  // namespace

int main(int argc, char** argv) {
  int threads = 0;  // 0 = OpenMP default
  int reps = 5;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc)
      threads = std::atoi(argv[++i]);
    else if (std::strcmp(argv[i], "--reps") == 0 && i + 1 < argc)
      reps = std::atoi(argv[++i]);
  }

  const int B = 64, Cin = 64, Cout = 64, T = 600, K = 3;
  Rng rng(42);
  std::vector<double> x(static_cast<size_t>(B) * Cin * T);
  std::vector<double> w(static_cast<size_t>(Cout) * Cin * K);
  for (auto& v : x) v = rng.normal();
  for (auto& v : w) v = rng.normal();
  const int Tout = nn::conv_out_len(T, K, 1, 1);
  std::vector<double> y(static_cast<size_t>(B) * Cout * Tout);
  std::vector<double> dy(y.size(), 1.0);
  std::vector<double> dx(x.size());
  std::vector<double> dw(w.size());

  std::printf("kernel benchmark  B=%d Cin=%d Cout=%d T=%d K=%d  (reps=%d)\n",
              B, Cin, Cout, T, K, reps);

  Timing conv_f;
  conv_f.serial_ms = time_ms(
      [&] {
        nn::kernels::serial::conv1d_forward(x.data(), B, Cin, T, w.data(),
                                            Cout, K, 1, 1, y.data(), Tout);
      },
      reps);
  nn::set_num_threads(threads);
  conv_f.omp_ms = time_ms(
      [&] {
        nn::kernels::omp::conv1d_forward(x.data(), B, Cin, T, w.data(), Cout,
                                         K, 1, 1, y.data(), Tout);
      },
      reps);
  report("conv1d_forward", conv_f);

  Timing conv_bw;
  conv_bw.serial_ms = time_ms(
      [&] {
        std::fill(dw.begin(), dw.end(), 0.0);
        nn::kernels::serial::conv1d_backward_weight(
            x.data(), dy.data(), B, Cin, T, Cout, K, 1, 1, dw.data(), Tout);
      },
      reps);
  conv_bw.omp_ms = time_ms(
      [&] {
        std::fill(dw.begin(), dw.end(), 0.0);
        nn::kernels::omp::conv1d_backward_weight(
            x.data(), dy.data(), B, Cin, T, Cout, K, 1, 1, dw.data(), Tout);
      },
      reps);
  report("conv1d_backward_weight", conv_bw);

  Timing conv_bi;
  conv_bi.serial_ms = time_ms(
      [&] {
        std::fill(dx.begin(), dx.end(), 0.0);
        nn::kernels::serial::conv1d_backward_input(
            dy.data(), B, Cout, Tout, w.data(), Cin, K, 1, 1, dx.data(), T);
      },
      reps);
  conv_bi.omp_ms = time_ms(
      [&] {
        std::fill(dx.begin(), dx.end(), 0.0);
        nn::kernels::omp::conv1d_backward_input(
            dy.data(), B, Cout, Tout, w.data(), Cin, K, 1, 1, dx.data(), T);
      },
      reps);
  report("conv1d_backward_input", conv_bi);

  // Full training step (forward + loss + backward) on a small backbone.
  nn::BackboneConfig cfg;
  cfg.stem_filters = 16;
  cfg.filter_schedule = {16, 16, 32, 32, 64};
  auto model = nn::build_backbone(cfg, 7);
  NumericBatch batch(32, 1, 256);
  Rng brng(3);
  for (auto& v : batch.values) v = brng.normal();
  std::vector<int> labels(32);
  for (size_t i = 0; i < labels.size(); ++i)
    labels[i] = static_cast<int>(i % 5);

  auto step = [&] {
    Rng drng(11);
    model->zero_grad();
    Tensor logits = model->forward(batch, nn::Mode::train, drng);
    auto [loss, dlogits] = optim::softmax_cross_entropy(logits, labels);
    (void)loss;
    model->backward(dlogits);
  };

  Timing full;
  nn::set_num_threads(1);
  full.serial_ms = time_ms(step, reps);
  nn::set_num_threads(threads);
  full.omp_ms = time_ms(step, reps);
  report("backbone fwd+bwd (B=32)", full);

  return 0;
}
