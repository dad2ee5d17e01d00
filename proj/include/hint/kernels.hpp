#pragma once

#include <cstddef>

namespace hint::kernels {

// Every kernel comes in a _serial and an _omp variant computing each output
// element with the same accumulation order, so the two are bit-identical and
// the serial one doubles as the reference implementation in tests. The
// unsuffixed entry points dispatch to OpenMP when parallelism is enabled and
// the problem is large enough to amortize the fork.

void set_parallel(bool on);
bool parallel_enabled();

// C(n,m) = A(n,k) * B(k,m); accumulate adds into C instead of overwriting
void matmul_nn_serial(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate = false);
void matmul_nn_omp(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate = false);
void matmul_nn(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate = false);

// C(n,m) = A(n,k) * B(m,k)^T
void matmul_nt_serial(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate = false);
void matmul_nt_omp(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate = false);
void matmul_nt(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate = false);

// C(k,m) = A(n,k)^T * B(n,m)
void matmul_tn_serial(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate = false);
void matmul_tn_omp(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate = false);
void matmul_tn(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate = false);

// Row-wise softmax; causal masks out columns j > i (square inputs only).
void softmax_rows_serial(const double* x, double* y, int n, int m, bool causal);
void softmax_rows_omp(const double* x, double* y, int n, int m, bool causal);
void softmax_rows(const double* x, double* y, int n, int m, bool causal);

// gx += y .* (gy - rowdot(gy, y)), the softmax Jacobian product
void softmax_rows_backward_serial(const double* y, const double* gy, double* gx, int n, int m);
void softmax_rows_backward_omp(const double* y, const double* gy, double* gx, int n, int m);
void softmax_rows_backward(const double* y, const double* gy, double* gx, int n, int m);

// Exact GELU, x/2 * (1 + erf(x/sqrt(2)))
void gelu_serial(const double* x, double* y, size_t n);
void gelu_omp(const double* x, double* y, size_t n);
void gelu(const double* x, double* y, size_t n);

void gelu_backward_serial(const double* x, const double* gy, double* gx, size_t n);
void gelu_backward_omp(const double* x, const double* gy, double* gx, size_t n);
void gelu_backward(const double* x, const double* gy, double* gx, size_t n);

// Row layernorm with affine gain/bias; xhat and rstd are saved for backward.
void layernorm_serial(const double* x, const double* gain, const double* bias,
                      double* y, double* xhat, double* rstd, int n, int m);
void layernorm_omp(const double* x, const double* gain, const double* bias,
                   double* y, double* xhat, double* rstd, int n, int m);
void layernorm(const double* x, const double* gain, const double* bias,
               double* y, double* xhat, double* rstd, int n, int m);

// gx accumulated; ggain/gbias must be reduced serially by the caller to keep
// summation order fixed, so this only produces gx.
void layernorm_backward_x_serial(const double* gy, const double* gain, const double* xhat,
                                 const double* rstd, double* gx, int n, int m);
void layernorm_backward_x_omp(const double* gy, const double* gain, const double* xhat,
                              const double* rstd, double* gx, int n, int m);
void layernorm_backward_x(const double* gy, const double* gain, const double* xhat,
                          const double* rstd, double* gx, int n, int m);

}  // namespace hint::kernels
