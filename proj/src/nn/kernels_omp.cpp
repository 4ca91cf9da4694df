#include <algorithm>
#include <atomic>

#include "ecg/nn/kernels.hpp"

#ifdef ECG_HAVE_OPENMP
#include <omp.h>
#endif

// OpenMP kernels. Each parallel loop distributes whole output elements
// (rows, channels, or weight slices) across threads; the inner summation
// order is identical to the serial reference, so results are bit-identical
// for any thread count.

namespace ecg::nn {

namespace {
std::atomic<int> g_num_threads{1};
}

void set_num_threads(int n) {
  if (n < 0) n = 0;
  g_num_threads.store(n);
#ifdef ECG_HAVE_OPENMP
  if (n > 0) omp_set_num_threads(n);
#endif
}

int num_threads() { return g_num_threads.load(); }

bool parallel_enabled() {
#ifdef ECG_HAVE_OPENMP
  return g_num_threads.load() != 1;
#else
  return false;
#endif
}

namespace kernels::omp {

#ifndef ECG_HAVE_OPENMP

// Without OpenMP this translation unit degrades to the serial reference.
void conv1d_forward(const double* x, int batch, int c_in, int t_in,
                    const double* w, int c_out, int k, int stride, int pad,
                    double* y, int t_out) {
  serial::conv1d_forward(x, batch, c_in, t_in, w, c_out, k, stride, pad, y,
                         t_out);
}
void conv1d_backward_input(const double* dy, int batch, int c_out, int t_out,
                           const double* w, int c_in, int k, int stride,
                           int pad, double* dx, int t_in) {
  serial::conv1d_backward_input(dy, batch, c_out, t_out, w, c_in, k, stride,
                                pad, dx, t_in);
}
void conv1d_backward_weight(const double* x, const double* dy, int batch,
                            int c_in, int t_in, int c_out, int k, int stride,
                            int pad, double* dw, int t_out) {
  serial::conv1d_backward_weight(x, dy, batch, c_in, t_in, c_out, k, stride,
                                 pad, dw, t_out);
}
void relu_forward(const double* x, double* y, int64_t n) {
  serial::relu_forward(x, y, n);
}
void relu_backward(const double* x, const double* dy, double* dx, int64_t n) {
  serial::relu_backward(x, dy, dx, n);
}
void channel_mean_var(const double* x, int batch, int channels, int t,
                      double* mean, double* var) {
  serial::channel_mean_var(x, batch, channels, t, mean, var);
}
void bn_forward_affine(const double* x, int batch, int channels, int t,
                       const double* mean, const double* inv_std,
                       const double* gamma, const double* beta, double* y,
                       double* xhat) {
  serial::bn_forward_affine(x, batch, channels, t, mean, inv_std, gamma, beta,
                            y, xhat);
}
void bn_backward(const double* dy, const double* xhat, int batch, int channels,
                 int t, const double* gamma, const double* inv_std, double* dx,
                 double* dgamma, double* dbeta) {
  serial::bn_backward(dy, xhat, batch, channels, t, gamma, inv_std, dx, dgamma,
                      dbeta);
}
void maxpool_forward(const double* x, int batch, int channels, int t, int size,
                     double* y, int* argmax, int t_out) {
  serial::maxpool_forward(x, batch, channels, t, size, y, argmax, t_out);
}
void maxpool_backward(const double* dy, const int* argmax, int batch,
                      int channels, int t_out, int t_in, double* dx) {
  serial::maxpool_backward(dy, argmax, batch, channels, t_out, t_in, dx);
}
void dense_forward(const double* x, int batch, int in_dim, const double* w,
                   const double* b, int out_dim, double* y) {
  serial::dense_forward(x, batch, in_dim, w, b, out_dim, y);
}
void dense_backward(const double* x, const double* dy, int batch, int in_dim,
                    int out_dim, const double* w, double* dx, double* dw,
                    double* db) {
  serial::dense_backward(x, dy, batch, in_dim, out_dim, w, dx, dw, db);
}
void gap_forward(const double* x, int batch, int channels, int t, double* y) {
  serial::gap_forward(x, batch, channels, t, y);
}
void gap_backward(const double* dy, int batch, int channels, int t,
                  double* dx) {
  serial::gap_backward(dy, batch, channels, t, dx);
}
void scale_mask(const double* x, const double* mask, double* y, int64_t n) {
  serial::scale_mask(x, mask, y, n);
}
void add_elementwise(const double* a, const double* b, double* y, int64_t n) {
  serial::add_elementwise(a, b, y, n);
}

#else  // ECG_HAVE_OPENMP

void conv1d_forward(const double* x, int batch, int c_in, int t_in,
                    const double* w, int c_out, int k, int stride, int pad,
                    double* y, int t_out) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < batch; ++b) {
    for (int co = 0; co < c_out; ++co) {
      double* yrow = y + (static_cast<int64_t>(b) * c_out + co) * t_out;
      std::fill(yrow, yrow + t_out, 0.0);
      for (int ci = 0; ci < c_in; ++ci) {
        const double* xrow = x + (static_cast<int64_t>(b) * c_in + ci) * t_in;
        const double* wrow = w + (static_cast<int64_t>(co) * c_in + ci) * k;
        for (int j = 0; j < k; ++j) {
          const double wj = wrow[j];
          if (wj == 0.0) continue;
          for (int to = 0; to < t_out; ++to) {
            const int ti = to * stride + j - pad;
            if (ti >= 0 && ti < t_in) yrow[to] += wj * xrow[ti];
          }
        }
      }
    }
  }
}

void conv1d_backward_input(const double* dy, int batch, int c_out, int t_out,
                           const double* w, int c_in, int k, int stride,
                           int pad, double* dx, int t_in) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < batch; ++b) {
    for (int ci = 0; ci < c_in; ++ci) {
      double* dxrow = dx + (static_cast<int64_t>(b) * c_in + ci) * t_in;
      for (int co = 0; co < c_out; ++co) {
        const double* dyrow =
            dy + (static_cast<int64_t>(b) * c_out + co) * t_out;
        const double* wrow = w + (static_cast<int64_t>(co) * c_in + ci) * k;
        for (int j = 0; j < k; ++j) {
          const double wj = wrow[j];
          if (wj == 0.0) continue;
          for (int to = 0; to < t_out; ++to) {
            const int ti = to * stride + j - pad;
            if (ti >= 0 && ti < t_in) dxrow[ti] += wj * dyrow[to];
          }
        }
      }
    }
  }
}

void conv1d_backward_weight(const double* x, const double* dy, int batch,
                            int c_in, int t_in, int c_out, int k, int stride,
                            int pad, double* dw, int t_out) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int co = 0; co < c_out; ++co) {
    for (int ci = 0; ci < c_in; ++ci) {
      double* dwrow = dw + (static_cast<int64_t>(co) * c_in + ci) * k;
      for (int b = 0; b < batch; ++b) {
        const double* xrow = x + (static_cast<int64_t>(b) * c_in + ci) * t_in;
        const double* dyrow =
            dy + (static_cast<int64_t>(b) * c_out + co) * t_out;
        for (int j = 0; j < k; ++j) {
          double acc = 0.0;
          for (int to = 0; to < t_out; ++to) {
            const int ti = to * stride + j - pad;
            if (ti >= 0 && ti < t_in) acc += dyrow[to] * xrow[ti];
          }
          dwrow[j] += acc;
        }
      }
    }
  }
}

void relu_forward(const double* x, double* y, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* x, const double* dy, double* dx, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) dx[i] += x[i] > 0.0 ? dy[i] : 0.0;
}

void channel_mean_var(const double* x, int batch, int channels, int t,
                      double* mean, double* var) {
  const double inv_n = 1.0 / (static_cast<double>(batch) * t);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < channels; ++c) {
    double sum = 0.0;
    for (int b = 0; b < batch; ++b) {
      const double* row = x + (static_cast<int64_t>(b) * channels + c) * t;
      for (int i = 0; i < t; ++i) sum += row[i];
    }
    const double m = sum * inv_n;
    double sq = 0.0;
    for (int b = 0; b < batch; ++b) {
      const double* row = x + (static_cast<int64_t>(b) * channels + c) * t;
      for (int i = 0; i < t; ++i) sq += (row[i] - m) * (row[i] - m);
    }
    mean[c] = m;
    var[c] = sq * inv_n;
  }
}

void bn_forward_affine(const double* x, int batch, int channels, int t,
                       const double* mean, const double* inv_std,
                       const double* gamma, const double* beta, double* y,
                       double* xhat) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < batch; ++b) {
    for (int c = 0; c < channels; ++c) {
      const int64_t off = (static_cast<int64_t>(b) * channels + c) * t;
      const double m = mean[c], is = inv_std[c], g = gamma[c], be = beta[c];
      for (int i = 0; i < t; ++i) {
        const double xh = (x[off + i] - m) * is;
        xhat[off + i] = xh;
        y[off + i] = g * xh + be;
      }
    }
  }
}

void bn_backward(const double* dy, const double* xhat, int batch, int channels,
                 int t, const double* gamma, const double* inv_std, double* dx,
                 double* dgamma, double* dbeta) {
  const double n = static_cast<double>(batch) * t;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < channels; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int b = 0; b < batch; ++b) {
      const int64_t off = (static_cast<int64_t>(b) * channels + c) * t;
      for (int i = 0; i < t; ++i) {
        sum_dy += dy[off + i];
        sum_dy_xhat += dy[off + i] * xhat[off + i];
      }
    }
    dgamma[c] += sum_dy_xhat;
    dbeta[c] += sum_dy;
    const double g_is = gamma[c] * inv_std[c];
    const double mean_dy = sum_dy / n;
    const double mean_dy_xhat = sum_dy_xhat / n;
    for (int b = 0; b < batch; ++b) {
      const int64_t off = (static_cast<int64_t>(b) * channels + c) * t;
      for (int i = 0; i < t; ++i)
        dx[off + i] +=
            g_is * (dy[off + i] - mean_dy - xhat[off + i] * mean_dy_xhat);
    }
  }
}

void maxpool_forward(const double* x, int batch, int channels, int t, int size,
                     double* y, int* argmax, int t_out) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < batch; ++b) {
    for (int c = 0; c < channels; ++c) {
      const double* xrow = x + (static_cast<int64_t>(b) * channels + c) * t;
      const int64_t oo = (static_cast<int64_t>(b) * channels + c) * t_out;
      for (int to = 0; to < t_out; ++to) {
        int best = to * size;
        double bv = xrow[best];
        for (int j = 1; j < size; ++j) {
          const int idx = to * size + j;
          if (xrow[idx] > bv) {
            bv = xrow[idx];
            best = idx;
          }
        }
        y[oo + to] = bv;
        argmax[oo + to] = best;
      }
    }
  }
}

void maxpool_backward(const double* dy, const int* argmax, int batch,
                      int channels, int t_out, int t_in, double* dx) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < batch; ++b) {
    for (int c = 0; c < channels; ++c) {
      const int64_t oo = (static_cast<int64_t>(b) * channels + c) * t_out;
      double* dxrow = dx + (static_cast<int64_t>(b) * channels + c) * t_in;
      for (int to = 0; to < t_out; ++to) dxrow[argmax[oo + to]] += dy[oo + to];
    }
  }
}

void dense_forward(const double* x, int batch, int in_dim, const double* w,
                   const double* b, int out_dim, double* y) {
#pragma omp parallel for schedule(static)
  for (int bi = 0; bi < batch; ++bi) {
    const double* xrow = x + static_cast<int64_t>(bi) * in_dim;
    double* yrow = y + static_cast<int64_t>(bi) * out_dim;
    for (int o = 0; o < out_dim; ++o) {
      double acc = b ? b[o] : 0.0;
      const double* wrow = w + static_cast<int64_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) acc += wrow[i] * xrow[i];
      yrow[o] = acc;
    }
  }
}

void dense_backward(const double* x, const double* dy, int batch, int in_dim,
                    int out_dim, const double* w, double* dx, double* dw,
                    double* db) {
#pragma omp parallel for schedule(static)
  for (int bi = 0; bi < batch; ++bi) {
    const double* dyrow = dy + static_cast<int64_t>(bi) * out_dim;
    double* dxrow = dx + static_cast<int64_t>(bi) * in_dim;
    for (int o = 0; o < out_dim; ++o) {
      const double g = dyrow[o];
      const double* wrow = w + static_cast<int64_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) dxrow[i] += g * wrow[i];
    }
  }
#pragma omp parallel for schedule(static)
  for (int o = 0; o < out_dim; ++o) {
    double* dwrow = dw + static_cast<int64_t>(o) * in_dim;
    double acc_b = 0.0;
    for (int bi = 0; bi < batch; ++bi) {
      const double g = dy[static_cast<int64_t>(bi) * out_dim + o];
      const double* xrow = x + static_cast<int64_t>(bi) * in_dim;
      for (int i = 0; i < in_dim; ++i) dwrow[i] += g * xrow[i];
      acc_b += g;
    }
    if (db) db[o] += acc_b;
  }
}

void gap_forward(const double* x, int batch, int channels, int t, double* y) {
  const double inv_t = 1.0 / t;
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < batch; ++b) {
    for (int c = 0; c < channels; ++c) {
      const double* row = x + (static_cast<int64_t>(b) * channels + c) * t;
      double acc = 0.0;
      for (int i = 0; i < t; ++i) acc += row[i];
      y[static_cast<int64_t>(b) * channels + c] = acc * inv_t;
    }
  }
}

void gap_backward(const double* dy, int batch, int channels, int t,
                  double* dx) {
  const double inv_t = 1.0 / t;
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < batch; ++b) {
    for (int c = 0; c < channels; ++c) {
      const double g = dy[static_cast<int64_t>(b) * channels + c] * inv_t;
      double* row = dx + (static_cast<int64_t>(b) * channels + c) * t;
      for (int i = 0; i < t; ++i) row[i] += g;
    }
  }
}

void scale_mask(const double* x, const double* mask, double* y, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] * mask[i];
}

void add_elementwise(const double* a, const double* b, double* y, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

#endif  // ECG_HAVE_OPENMP

}  // namespace kernels::omp

// ---------------------------------------------------------------------------
// Dispatch: serial reference at --threads 1, OpenMP otherwise.
// ---------------------------------------------------------------------------
namespace kernels {

#define ECG_DISPATCH(fn, ...)                 \
  do {                                        \
    if (parallel_enabled())                   \
      omp::fn(__VA_ARGS__);                   \
    else                                      \
      serial::fn(__VA_ARGS__);                \
  } while (0)

void conv1d_forward(const double* x, int batch, int c_in, int t_in,
                    const double* w, int c_out, int k, int stride, int pad,
                    double* y, int t_out) {
  ECG_DISPATCH(conv1d_forward, x, batch, c_in, t_in, w, c_out, k, stride, pad,
               y, t_out);
}
void conv1d_backward_input(const double* dy, int batch, int c_out, int t_out,
                           const double* w, int c_in, int k, int stride,
                           int pad, double* dx, int t_in) {
  ECG_DISPATCH(conv1d_backward_input, dy, batch, c_out, t_out, w, c_in, k,
               stride, pad, dx, t_in);
}
void conv1d_backward_weight(const double* x, const double* dy, int batch,
                            int c_in, int t_in, int c_out, int k, int stride,
                            int pad, double* dw, int t_out) {
  ECG_DISPATCH(conv1d_backward_weight, x, dy, batch, c_in, t_in, c_out, k,
               stride, pad, dw, t_out);
}
void relu_forward(const double* x, double* y, int64_t n) {
  ECG_DISPATCH(relu_forward, x, y, n);
}
void relu_backward(const double* x, const double* dy, double* dx, int64_t n) {
  ECG_DISPATCH(relu_backward, x, dy, dx, n);
}
void channel_mean_var(const double* x, int batch, int channels, int t,
                      double* mean, double* var) {
  ECG_DISPATCH(channel_mean_var, x, batch, channels, t, mean, var);
}
void bn_forward_affine(const double* x, int batch, int channels, int t,
                       const double* mean, const double* inv_std,
                       const double* gamma, const double* beta, double* y,
                       double* xhat) {
  ECG_DISPATCH(bn_forward_affine, x, batch, channels, t, mean, inv_std, gamma,
               beta, y, xhat);
}
void bn_backward(const double* dy, const double* xhat, int batch, int channels,
                 int t, const double* gamma, const double* inv_std, double* dx,
                 double* dgamma, double* dbeta) {
  ECG_DISPATCH(bn_backward, dy, xhat, batch, channels, t, gamma, inv_std, dx,
               dgamma, dbeta);
}
void maxpool_forward(const double* x, int batch, int channels, int t, int size,
                     double* y, int* argmax, int t_out) {
  ECG_DISPATCH(maxpool_forward, x, batch, channels, t, size, y, argmax, t_out);
}
void maxpool_backward(const double* dy, const int* argmax, int batch,
                      int channels, int t_out, int t_in, double* dx) {
  ECG_DISPATCH(maxpool_backward, dy, argmax, batch, channels, t_out, t_in, dx);
}
void dense_forward(const double* x, int batch, int in_dim, const double* w,
                   const double* b, int out_dim, double* y) {
  ECG_DISPATCH(dense_forward, x, batch, in_dim, w, b, out_dim, y);
}
void dense_backward(const double* x, const double* dy, int batch, int in_dim,
                    int out_dim, const double* w, double* dx, double* dw,
                    double* db) {
  ECG_DISPATCH(dense_backward, x, dy, batch, in_dim, out_dim, w, dx, dw, db);
}
void gap_forward(const double* x, int batch, int channels, int t, double* y) {
  ECG_DISPATCH(gap_forward, x, batch, channels, t, y);
}
void gap_backward(const double* dy, int batch, int channels, int t,
                  double* dx) {
  ECG_DISPATCH(gap_backward, dy, batch, channels, t, dx);
}
void scale_mask(const double* x, const double* mask, double* y, int64_t n) {
  ECG_DISPATCH(scale_mask, x, mask, y, n);
}
void add_elementwise(const double* a, const double* b, double* y, int64_t n) {
  ECG_DISPATCH(add_elementwise, a, b, y, n);
}

#undef ECG_DISPATCH

}  // namespace kernels
}  // namespace ecg::nn
