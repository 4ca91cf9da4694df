#pragma once

#include <cstdint>

namespace ecg::nn {

/// Thread count for the compute kernels. 1 selects the serial reference
/// implementation; >1 selects the OpenMP kernels with that many threads;
/// 0 selects the OpenMP kernels with the runtime default.
void set_num_threads(int n);
int num_threads();

/// True when the OpenMP path will be used at the current setting.
bool parallel_enabled();

// ---------------------------------------------------------------------------
// Kernel API. Each function exists twice, in kernels::serial (plain loops,
// the reference implementation) and kernels::omp (OpenMP). The two are
// bit-identical: every output element is owned by exactly one thread and the
// inner summation order matches the serial loops. The unqualified wrappers
// dispatch on the thread setting.
//
// Conventions: x is [B, Cin, T] row-major, w is [Cout, Cin, K], conv is
// cross-correlation with zero padding and no bias. Gradient kernels
// accumulate (+=) into their output buffers.
// ---------------------------------------------------------------------------

#define ECG_KERNEL_DECLS                                                      \
  void conv1d_forward(const double* x, int batch, int c_in, int t_in,         \
                      const double* w, int c_out, int k, int stride, int pad, \
                      double* y, int t_out);                                  \
  void conv1d_backward_input(const double* dy, int batch, int c_out,          \
                             int t_out, const double* w, int c_in, int k,     \
                             int stride, int pad, double* dx, int t_in);      \
  void conv1d_backward_weight(const double* x, const double* dy, int batch,   \
                              int c_in, int t_in, int c_out, int k,           \
                              int stride, int pad, double* dw, int t_out);    \
  void relu_forward(const double* x, double* y, int64_t n);                   \
  void relu_backward(const double* x, const double* dy, double* dx,           \
                     int64_t n);                                              \
  void channel_mean_var(const double* x, int batch, int channels, int t,      \
                        double* mean, double* var);                           \
  void bn_forward_affine(const double* x, int batch, int channels, int t,     \
                         const double* mean, const double* inv_std,           \
                         const double* gamma, const double* beta, double* y,  \
                         double* xhat);                                       \
  void bn_backward(const double* dy, const double* xhat, int batch,           \
                   int channels, int t, const double* gamma,                  \
                   const double* inv_std, double* dx, double* dgamma,         \
                   double* dbeta);                                            \
  void maxpool_forward(const double* x, int batch, int channels, int t,       \
                       int size, double* y, int* argmax, int t_out);          \
  void maxpool_backward(const double* dy, const int* argmax, int batch,       \
                        int channels, int t_out, int t_in, double* dx);       \
  void dense_forward(const double* x, int batch, int in_dim,                  \
                     const double* w, const double* b, int out_dim,           \
                     double* y);                                              \
  void dense_backward(const double* x, const double* dy, int batch,           \
                      int in_dim, int out_dim, const double* w, double* dx,   \
                      double* dw, double* db);                                \
  void gap_forward(const double* x, int batch, int channels, int t,           \
                   double* y);                                                \
  void gap_backward(const double* dy, int batch, int channels, int t,         \
                    double* dx);                                              \
  void scale_mask(const double* x, const double* mask, double* y, int64_t n); \
  void add_elementwise(const double* a, const double* b, double* y,           \
                       int64_t n);

namespace kernels {
namespace serial {
ECG_KERNEL_DECLS
}
namespace omp {
ECG_KERNEL_DECLS
}
ECG_KERNEL_DECLS
}  // namespace kernels

#undef ECG_KERNEL_DECLS

/// Output length of a conv/pool along time.
inline int conv_out_len(int t_in, int k, int stride, int pad) {
  return (t_in + 2 * pad - k) / stride + 1;
}

}  // namespace ecg::nn
