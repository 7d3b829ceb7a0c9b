#pragma once

#include "mrc/tensor.hpp"

namespace mrc::kernels {

/// OpenMP worker count for all kernels (1 = serial path). Every kernel is
/// bit-identical across thread counts: parallelism is over output rows and
/// each element keeps a fixed accumulation order.
void set_threads(int n);
int threads();

// C = A * B
void matmul(const Mat& a, const Mat& b, Mat& c);
void matmul_serial(const Mat& a, const Mat& b, Mat& c);

// C = A^T * B
void matmul_at_b(const Mat& a, const Mat& b, Mat& c);
void matmul_at_b_serial(const Mat& a, const Mat& b, Mat& c);

// C = A * B^T
void matmul_a_bt(const Mat& a, const Mat& b, Mat& c);
void matmul_a_bt_serial(const Mat& a, const Mat& b, Mat& c);

// A[i,:] += bias
void add_row_bias(Mat& a, const Vec& bias);
void add_row_bias_serial(Mat& a, const Vec& bias);

// Row-wise softmax in place.
void softmax_rows(Mat& a);
void softmax_rows_serial(Mat& a);

/// y = gain .* (x - mean)/sqrt(var + eps) + bias, per row; mean/rstd cached
/// per row for the backward pass.
void layer_norm(const Mat& x, const Vec& gain, const Vec& bias, double eps, Mat& y, Vec& mean,
                Vec& rstd);
void layer_norm_serial(const Mat& x, const Vec& gain, const Vec& bias, double eps, Mat& y,
                       Vec& mean, Vec& rstd);

/// Gradients of layer_norm. dgain/dbias are accumulated (+=), dx overwritten.
void layer_norm_backward(const Mat& dy, const Mat& x, const Vec& gain, const Vec& mean,
                         const Vec& rstd, Mat& dx, Vec& dgain, Vec& dbias);
void layer_norm_backward_serial(const Mat& dy, const Mat& x, const Vec& gain, const Vec& mean,
                                const Vec& rstd, Mat& dx, Vec& dgain, Vec& dbias);

// Exact erf-based GELU and its derivative.
double gelu_scalar(double x);
double gelu_grad_scalar(double x);
void gelu(const Mat& x, Mat& y);
void gelu_serial(const Mat& x, Mat& y);
void gelu_backward(const Mat& dy, const Mat& x, Mat& dx);
void gelu_backward_serial(const Mat& dy, const Mat& x, Mat& dx);

}  // namespace mrc::kernels
