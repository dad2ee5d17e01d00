#include "hint/kernels.hpp"

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hint::kernels {

namespace {

bool g_parallel = true;

// below this much work the fork costs more than it saves; calibrate with
// the bench_kernels target when moving to other hardware
constexpr long kMatmulThreshold = 1L << 20;  // fused multiply-adds
constexpr long kRowThreshold = 1L << 14;     // elements

inline void nn_row(const double* a, const double* b, double* c, int k, int m, int i, bool accumulate) {
    double* ci = c + static_cast<size_t>(i) * m;
    if (!accumulate) {
        for (int j = 0; j < m; ++j) ci[j] = 0.0;
    }
    const double* ai = a + static_cast<size_t>(i) * k;
    for (int l = 0; l < k; ++l) {
        const double ail = ai[l];
        const double* bl = b + static_cast<size_t>(l) * m;
        for (int j = 0; j < m; ++j) ci[j] += ail * bl[j];
    }
}

inline void nt_row(const double* a, const double* b, double* c, int k, int m, int i, bool accumulate) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * m;
    for (int j = 0; j < m; ++j) {
        const double* bj = b + static_cast<size_t>(j) * k;
        double acc = 0.0;
        for (int l = 0; l < k; ++l) acc += ai[l] * bj[l];
        ci[j] = accumulate ? ci[j] + acc : acc;
    }
}

inline void tn_row(const double* a, const double* b, double* c, int n, int k, int m, int l, bool accumulate) {
    double* cl = c + static_cast<size_t>(l) * m;
    if (!accumulate) {
        for (int j = 0; j < m; ++j) cl[j] = 0.0;
    }
    for (int i = 0; i < n; ++i) {
        const double ail = a[static_cast<size_t>(i) * k + l];
        const double* bi = b + static_cast<size_t>(i) * m;
        for (int j = 0; j < m; ++j) cl[j] += ail * bi[j];
    }
}

inline void softmax_row(const double* x, double* y, int m, int limit, int i) {
    const double* xi = x + static_cast<size_t>(i) * m;
    double* yi = y + static_cast<size_t>(i) * m;
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < limit; ++j) mx = std::max(mx, xi[j]);
    double z = 0.0;
    for (int j = 0; j < limit; ++j) {
        yi[j] = std::exp(xi[j] - mx);
        z += yi[j];
    }
    const double inv = 1.0 / z;
    for (int j = 0; j < limit; ++j) yi[j] *= inv;
    for (int j = limit; j < m; ++j) yi[j] = 0.0;
}

inline void softmax_bwd_row(const double* y, const double* gy, double* gx, int m, int i) {
    const double* yi = y + static_cast<size_t>(i) * m;
    const double* gi = gy + static_cast<size_t>(i) * m;
    double* oi = gx + static_cast<size_t>(i) * m;
    double dot = 0.0;
    for (int j = 0; j < m; ++j) dot += gi[j] * yi[j];
    for (int j = 0; j < m; ++j) oi[j] += yi[j] * (gi[j] - dot);
}

inline double gelu_one(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

inline double gelu_grad_one(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
    const double pdf = std::exp(-0.5 * x * x) * 0.3989422804014326779;
    return cdf + x * pdf;
}

constexpr double kLnEps = 1e-5;

inline void layernorm_row(const double* x, const double* gain, const double* bias,
                          double* y, double* xhat, double* rstd, int m, int i) {
    const double* xi = x + static_cast<size_t>(i) * m;
    double* yi = y + static_cast<size_t>(i) * m;
    double* hi = xhat + static_cast<size_t>(i) * m;
    double mu = 0.0;
    for (int j = 0; j < m; ++j) mu += xi[j];
    mu /= m;
    double var = 0.0;
    for (int j = 0; j < m; ++j) {
        const double d = xi[j] - mu;
        var += d * d;
    }
    var /= m;
    const double rs = 1.0 / std::sqrt(var + kLnEps);
    rstd[i] = rs;
    for (int j = 0; j < m; ++j) {
        hi[j] = (xi[j] - mu) * rs;
        yi[j] = gain[j] * hi[j] + bias[j];
    }
}

inline void layernorm_bwd_row(const double* gy, const double* gain, const double* xhat,
                              const double* rstd, double* gx, int m, int i) {
    const double* gi = gy + static_cast<size_t>(i) * m;
    const double* hi = xhat + static_cast<size_t>(i) * m;
    double* oi = gx + static_cast<size_t>(i) * m;
    double sum_g = 0.0, sum_gh = 0.0;
    for (int j = 0; j < m; ++j) {
        const double gh = gi[j] * gain[j];
        sum_g += gh;
        sum_gh += gh * hi[j];
    }
    const double inv_m = 1.0 / m;
    for (int j = 0; j < m; ++j) {
        const double gh = gi[j] * gain[j];
        oi[j] += rstd[i] * (gh - sum_g * inv_m - hi[j] * sum_gh * inv_m);
    }
}

}  // namespace

void set_parallel(bool on) { g_parallel = on; }
bool parallel_enabled() { return g_parallel; }

void matmul_nn_serial(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate) {
    for (int i = 0; i < n; ++i) nn_row(a, b, c, k, m, i, accumulate);
}

void matmul_nn_omp(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) nn_row(a, b, c, k, m, i, accumulate);
}

void matmul_nn(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate) {
    if (g_parallel && static_cast<long>(n) * k * m >= kMatmulThreshold)
        matmul_nn_omp(a, b, c, n, k, m, accumulate);
    else
        matmul_nn_serial(a, b, c, n, k, m, accumulate);
}

void matmul_nt_serial(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate) {
    for (int i = 0; i < n; ++i) nt_row(a, b, c, k, m, i, accumulate);
}

void matmul_nt_omp(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) nt_row(a, b, c, k, m, i, accumulate);
}

void matmul_nt(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate) {
    if (g_parallel && static_cast<long>(n) * k * m >= kMatmulThreshold)
        matmul_nt_omp(a, b, c, n, k, m, accumulate);
    else
        matmul_nt_serial(a, b, c, n, k, m, accumulate);
}

void matmul_tn_serial(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate) {
    for (int l = 0; l < k; ++l) tn_row(a, b, c, n, k, m, l, accumulate);
}

void matmul_tn_omp(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (int l = 0; l < k; ++l) tn_row(a, b, c, n, k, m, l, accumulate);
}

void matmul_tn(const double* a, const double* b, double* c, int n, int k, int m, bool accumulate) {
    if (g_parallel && static_cast<long>(n) * k * m >= kMatmulThreshold)
        matmul_tn_omp(a, b, c, n, k, m, accumulate);
    else
        matmul_tn_serial(a, b, c, n, k, m, accumulate);
}

void softmax_rows_serial(const double* x, double* y, int n, int m, bool causal) {
    for (int i = 0; i < n; ++i) softmax_row(x, y, m, causal ? i + 1 : m, i);
}

void softmax_rows_omp(const double* x, double* y, int n, int m, bool causal) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) softmax_row(x, y, m, causal ? i + 1 : m, i);
}

void softmax_rows(const double* x, double* y, int n, int m, bool causal) {
    if (g_parallel && static_cast<long>(n) * m >= kRowThreshold)
        softmax_rows_omp(x, y, n, m, causal);
    else
        softmax_rows_serial(x, y, n, m, causal);
}

void softmax_rows_backward_serial(const double* y, const double* gy, double* gx, int n, int m) {
    for (int i = 0; i < n; ++i) softmax_bwd_row(y, gy, gx, m, i);
}

void softmax_rows_backward_omp(const double* y, const double* gy, double* gx, int n, int m) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) softmax_bwd_row(y, gy, gx, m, i);
}

void softmax_rows_backward(const double* y, const double* gy, double* gx, int n, int m) {
    if (g_parallel && static_cast<long>(n) * m >= kRowThreshold)
        softmax_rows_backward_omp(y, gy, gx, n, m);
    else
        softmax_rows_backward_serial(y, gy, gx, n, m);
}

void gelu_serial(const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = gelu_one(x[i]);
}

void gelu_omp(const double* x, double* y, size_t n) {
    const long ln = static_cast<long>(n);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < ln; ++i) y[i] = gelu_one(x[i]);
}

void gelu(const double* x, double* y, size_t n) {
    if (g_parallel && n >= static_cast<size_t>(kRowThreshold))
        gelu_omp(x, y, n);
    else
        gelu_serial(x, y, n);
}

void gelu_backward_serial(const double* x, const double* gy, double* gx, size_t n) {
    for (size_t i = 0; i < n; ++i) gx[i] += gy[i] * gelu_grad_one(x[i]);
}

void gelu_backward_omp(const double* x, const double* gy, double* gx, size_t n) {
    const long ln = static_cast<long>(n);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < ln; ++i) gx[i] += gy[i] * gelu_grad_one(x[i]);
}

void gelu_backward(const double* x, const double* gy, double* gx, size_t n) {
    if (g_parallel && n >= static_cast<size_t>(kRowThreshold))
        gelu_backward_omp(x, gy, gx, n);
    else
        gelu_backward_serial(x, gy, gx, n);
}

void layernorm_serial(const double* x, const double* gain, const double* bias,
                      double* y, double* xhat, double* rstd, int n, int m) {
    for (int i = 0; i < n; ++i) layernorm_row(x, gain, bias, y, xhat, rstd, m, i);
}

void layernorm_omp(const double* x, const double* gain, const double* bias,
                   double* y, double* xhat, double* rstd, int n, int m) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) layernorm_row(x, gain, bias, y, xhat, rstd, m, i);
}

void layernorm(const double* x, const double* gain, const double* bias,
               double* y, double* xhat, double* rstd, int n, int m) {
    if (g_parallel && static_cast<long>(n) * m >= kRowThreshold)
        layernorm_omp(x, gain, bias, y, xhat, rstd, n, m);
    else
        layernorm_serial(x, gain, bias, y, xhat, rstd, n, m);
}

void layernorm_backward_x_serial(const double* gy, const double* gain, const double* xhat,
                                 const double* rstd, double* gx, int n, int m) {
    for (int i = 0; i < n; ++i) layernorm_bwd_row(gy, gain, xhat, rstd, gx, m, i);
}

void layernorm_backward_x_omp(const double* gy, const double* gain, const double* xhat,
                              const double* rstd, double* gx, int n, int m) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) layernorm_bwd_row(gy, gain, xhat, rstd, gx, m, i);
}

void layernorm_backward_x(const double* gy, const double* gain, const double* xhat,
                          const double* rstd, double* gx, int n, int m) {
    if (g_parallel && static_cast<long>(n) * m >= kRowThreshold)
        layernorm_backward_x_omp(gy, gain, xhat, rstd, gx, n, m);
    else
        layernorm_backward_x_serial(gy, gain, xhat, rstd, gx, n, m);
}

}  // namespace hint::kernels
