#include "mrc/kernels.hpp"

#include <cassert>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mrc::kernels {

namespace {

int g_threads = 1;

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline void matmul_row(const Mat& a, const Mat& b, Mat& c, size_t i) {
  double* out = c.row(i);
  for (size_t j = 0; j < b.cols; ++j) out[j] = 0.0;
  for (size_t k = 0; k < a.cols; ++k) {
    double aik = a(i, k);
    const double* brow = b.row(k);
    for (size_t j = 0; j < b.cols; ++j) out[j] += aik * brow[j];
  }
}

inline void matmul_at_b_row(const Mat& a, const Mat& b, Mat& c, size_t i) {
  // c(i,:) = sum_k a(k,i) * b(k,:)
  double* out = c.row(i);
  for (size_t j = 0; j < b.cols; ++j) out[j] = 0.0;
  for (size_t k = 0; k < a.rows; ++k) {
    double aki = a(k, i);
    const double* brow = b.row(k);
    for (size_t j = 0; j < b.cols; ++j) out[j] += aki * brow[j];
  }
}

inline void matmul_a_bt_row(const Mat& a, const Mat& b, Mat& c, size_t i) {
  const double* arow = a.row(i);
  double* out = c.row(i);
  for (size_t j = 0; j < b.rows; ++j) {
    const double* brow = b.row(j);
    double sum = 0.0;
    for (size_t k = 0; k < a.cols; ++k) sum += arow[k] * brow[k];
    out[j] = sum;
  }
}

inline void softmax_row(Mat& a, size_t i) {
  double* row = a.row(i);
  double mx = row[0];
  for (size_t j = 1; j < a.cols; ++j) mx = std::max(mx, row[j]);
  double sum = 0.0;
  for (size_t j = 0; j < a.cols; ++j) {
    row[j] = std::exp(row[j] - mx);
    sum += row[j];
  }
  for (size_t j = 0; j < a.cols; ++j) row[j] /= sum;
}

inline void layer_norm_row(const Mat& x, const Vec& gain, const Vec& bias, double eps, Mat& y,
                           Vec& mean, Vec& rstd, size_t i) {
  const double* in = x.row(i);
  double* out = y.row(i);
  size_t d = x.cols;
  double m = 0.0;
  for (size_t j = 0; j < d; ++j) m += in[j];
  m /= static_cast<double>(d);
  double var = 0.0;
  for (size_t j = 0; j < d; ++j) {
    double c = in[j] - m;
    var += c * c;
  }
  var /= static_cast<double>(d);
  double r = 1.0 / std::sqrt(var + eps);
  mean[i] = m;
  rstd[i] = r;
  for (size_t j = 0; j < d; ++j) out[j] = gain[j] * (in[j] - m) * r + bias[j];
}

inline void layer_norm_backward_dx_row(const Mat& dy, const Mat& x, const Vec& gain,
                                       const Vec& mean, const Vec& rstd, Mat& dx, size_t i) {
  size_t d = x.cols;
  const double* dyr = dy.row(i);
  const double* xr = x.row(i);
  double* dxr = dx.row(i);
  double m = mean[i], r = rstd[i];
  double sum_g = 0.0, sum_gy = 0.0;
  for (size_t j = 0; j < d; ++j) {
    double yj = (xr[j] - m) * r;
    double gj = dyr[j] * gain[j];
    sum_g += gj;
    sum_gy += gj * yj;
  }
  double inv_d = 1.0 / static_cast<double>(d);
  for (size_t j = 0; j < d; ++j) {
    double yj = (xr[j] - m) * r;
    double gj = dyr[j] * gain[j];
    dxr[j] = r * (gj - inv_d * sum_g - yj * inv_d * sum_gy);
  }
}

}  // namespace

void set_threads(int n) { g_threads = n < 1 ? 1 : n; }
int threads() { return g_threads; }

void matmul_serial(const Mat& a, const Mat& b, Mat& c) {
  assert(a.cols == b.rows);
  c = Mat(a.rows, b.cols);
  for (size_t i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
}

void matmul(const Mat& a, const Mat& b, Mat& c) {
  assert(a.cols == b.rows);
  c = Mat(a.rows, b.cols);
  long n = static_cast<long>(a.rows);
#pragma omp parallel for num_threads(g_threads) schedule(static) if (g_threads > 1 && n > 1)
  for (long i = 0; i < n; ++i) matmul_row(a, b, c, static_cast<size_t>(i));
}

void matmul_at_b_serial(const Mat& a, const Mat& b, Mat& c) {
  assert(a.rows == b.rows);
  c = Mat(a.cols, b.cols);
  for (size_t i = 0; i < a.cols; ++i) matmul_at_b_row(a, b, c, i);
}

void matmul_at_b(const Mat& a, const Mat& b, Mat& c) {
  assert(a.rows == b.rows);
  c = Mat(a.cols, b.cols);
  long n = static_cast<long>(a.cols);
#pragma omp parallel for num_threads(g_threads) schedule(static) if (g_threads > 1 && n > 1)
  for (long i = 0; i < n; ++i) matmul_at_b_row(a, b, c, static_cast<size_t>(i));
}

void matmul_a_bt_serial(const Mat& a, const Mat& b, Mat& c) {
  assert(a.cols == b.cols);
  c = Mat(a.rows, b.rows);
  for (size_t i = 0; i < a.rows; ++i) matmul_a_bt_row(a, b, c, i);
}

void matmul_a_bt(const Mat& a, const Mat& b, Mat& c) {
  assert(a.cols == b.cols);
  c = Mat(a.rows, b.rows);
  long n = static_cast<long>(a.rows);
#pragma omp parallel for num_threads(g_threads) schedule(static) if (g_threads > 1 && n > 1)
  for (long i = 0; i < n; ++i) matmul_a_bt_row(a, b, c, static_cast<size_t>(i));
}

void add_row_bias_serial(Mat& a, const Vec& bias) {
  assert(a.cols == bias.size());
  for (size_t i = 0; i < a.rows; ++i) {
    double* row = a.row(i);
    for (size_t j = 0; j < a.cols; ++j) row[j] += bias[j];
  }
}

void add_row_bias(Mat& a, const Vec& bias) {
  assert(a.cols == bias.size());
  long n = static_cast<long>(a.rows);
#pragma omp parallel for num_threads(g_threads) schedule(static) if (g_threads > 1 && n > 1)
  for (long i = 0; i < n; ++i) {
    double* row = a.row(static_cast<size_t>(i));
    for (size_t j = 0; j < a.cols; ++j) row[j] += bias[j];
  }
}

void softmax_rows_serial(Mat& a) {
  for (size_t i = 0; i < a.rows; ++i) softmax_row(a, i);
}

void softmax_rows(Mat& a) {
  long n = static_cast<long>(a.rows);
#pragma omp parallel for num_threads(g_threads) schedule(static) if (g_threads > 1 && n > 1)
  for (long i = 0; i < n; ++i) softmax_row(a, static_cast<size_t>(i));
}

void layer_norm_serial(const Mat& x, const Vec& gain, const Vec& bias, double eps, Mat& y,
                       Vec& mean, Vec& rstd) {
  y = Mat(x.rows, x.cols);
  mean.assign(x.rows, 0.0);
  rstd.assign(x.rows, 0.0);
  for (size_t i = 0; i < x.rows; ++i) layer_norm_row(x, gain, bias, eps, y, mean, rstd, i);
}

void layer_norm(const Mat& x, const Vec& gain, const Vec& bias, double eps, Mat& y, Vec& mean,
                Vec& rstd) {
  y = Mat(x.rows, x.cols);
  mean.assign(x.rows, 0.0);
  rstd.assign(x.rows, 0.0);
  long n = static_cast<long>(x.rows);
#pragma omp parallel for num_threads(g_threads) schedule(static) if (g_threads > 1 && n > 1)
  for (long i = 0; i < n; ++i)
    layer_norm_row(x, gain, bias, eps, y, mean, rstd, static_cast<size_t>(i));
}

void layer_norm_backward_serial(const Mat& dy, const Mat& x, const Vec& gain, const Vec& mean,
                                const Vec& rstd, Mat& dx, Vec& dgain, Vec& dbias) {
  dx = Mat(x.rows, x.cols);
  for (size_t i = 0; i < x.rows; ++i) layer_norm_backward_dx_row(dy, x, gain, mean, rstd, dx, i);
  // Parameter gradients accumulate over rows in row order.
  for (size_t i = 0; i < x.rows; ++i) {
    const double* dyr = dy.row(i);
    const double* xr = x.row(i);
    for (size_t j = 0; j < x.cols; ++j) {
      double yj = (xr[j] - mean[i]) * rstd[i];
      dgain[j] += dyr[j] * yj;
      dbias[j] += dyr[j];
    }
  }
}

void layer_norm_backward(const Mat& dy, const Mat& x, const Vec& gain, const Vec& mean,
                         const Vec& rstd, Mat& dx, Vec& dgain, Vec& dbias) {
  dx = Mat(x.rows, x.cols);
  long n = static_cast<long>(x.rows);
#pragma omp parallel for num_threads(g_threads) schedule(static) if (g_threads > 1 && n > 1)
  for (long i = 0; i < n; ++i)
    layer_norm_backward_dx_row(dy, x, gain, mean, rstd, dx, static_cast<size_t>(i));
  // Row-order reduction kept serial so accumulation order is fixed.
  for (size_t i = 0; i < x.rows; ++i) {
    const double* dyr = dy.row(i);
    const double* xr = x.row(i);
    for (size_t j = 0; j < x.cols; ++j) {
      double yj = (xr[j] - mean[i]) * rstd[i];
      dgain[j] += dyr[j] * yj;
      dbias[j] += dyr[j];
    }
  }
}

double gelu_scalar(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad_scalar(double x) {
  double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  return cdf + x * pdf;
}

void gelu_serial(const Mat& x, Mat& y) {
  y = Mat(x.rows, x.cols);
  for (size_t i = 0; i < x.size(); ++i) y.data[i] = gelu_scalar(x.data[i]);
}

void gelu(const Mat& x, Mat& y) {
  y = Mat(x.rows, x.cols);
  long n = static_cast<long>(x.size());
#pragma omp parallel for num_threads(g_threads) schedule(static) if (g_threads > 1 && n > 64)
  for (long i = 0; i < n; ++i)
    y.data[static_cast<size_t>(i)] = gelu_scalar(x.data[static_cast<size_t>(i)]);
}

void gelu_backward_serial(const Mat& dy, const Mat& x, Mat& dx) {
  dx = Mat(x.rows, x.cols);
  for (size_t i = 0; i < x.size(); ++i) dx.data[i] = dy.data[i] * gelu_grad_scalar(x.data[i]);
}

void gelu_backward(const Mat& dy, const Mat& x, Mat& dx) {
  dx = Mat(x.rows, x.cols);
  long n = static_cast<long>(x.size());
#pragma omp parallel for num_threads(g_threads) schedule(static) if (g_threads > 1 && n > 64)
  for (long i = 0; i < n; ++i)
    dx.data[static_cast<size_t>(i)] =
        dy.data[static_cast<size_t>(i)] * gelu_grad_scalar(x.data[static_cast<size_t>(i)]);
}

}  // namespace mrc::kernels
