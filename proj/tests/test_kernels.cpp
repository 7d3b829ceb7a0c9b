#include <doctest.h>

#include <cmath>

#include "mrc/kernels.hpp"
#include "mrc/rng.hpp"

using namespace mrc;
namespace k = mrc::kernels;

namespace {

Mat random_mat(size_t r, size_t c, Rng& rng) {
  Mat m(r, c);
  for (auto& x : m.data) x = rng.normal(0.0, 1.0);
  return m;
}

struct ThreadGuard {
  int saved;
  explicit ThreadGuard(int n) : saved(k::threads()) { k::set_threads(n); }
  ~ThreadGuard() { k::set_threads(saved); }
};

}  // namespace

TEST_CASE("matmul matches serial reference bit for bit") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Mat a = random_mat(17, 9, rng), b = random_mat(9, 13, rng);
    Mat serial, parallel;
    k::matmul_serial(a, b, serial);
    ThreadGuard guard(4);
    k::matmul(a, b, parallel);
    CHECK(serial == parallel);
  }
}

TEST_CASE("matmul_at_b and matmul_a_bt match serial") {
  Rng rng(12);
  Mat a = random_mat(14, 6, rng), b = random_mat(14, 10, rng);
  Mat s1, p1;
  k::matmul_at_b_serial(a, b, s1);
  {
    ThreadGuard guard(3);
    k::matmul_at_b(a, b, p1);
  }
  CHECK(s1 == p1);

  Mat c = random_mat(8, 6, rng), d = random_mat(12, 6, rng);
  Mat s2, p2;
  k::matmul_a_bt_serial(c, d, s2);
  {
    ThreadGuard guard(5);
    k::matmul_a_bt(c, d, p2);
  }
  CHECK(s2 == p2);
}

TEST_CASE("matmul agrees with naive triple loop") {
  Rng rng(13);
  Mat a = random_mat(5, 7, rng), b = random_mat(7, 4, rng);
  Mat c;
  k::matmul(a, b, c);
  for (size_t i = 0; i < 5; ++i)
    for (size_t j = 0; j < 4; ++j) {
      double expect = 0.0;
      for (size_t t = 0; t < 7; ++t) expect += a(i, t) * b(t, j);
      CHECK(c(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("transpose products agree with definitions") {
  Rng rng(14);
  Mat a = random_mat(6, 3, rng), b = random_mat(6, 5, rng);
  Mat atb;
  k::matmul_at_b(a, b, atb);
  REQUIRE(atb.rows == 3);
  REQUIRE(atb.cols == 5);
  for (size_t i = 0; i < 3; ++i)
    for (size_t j = 0; j < 5; ++j) {
      double expect = 0.0;
      for (size_t t = 0; t < 6; ++t) expect += a(t, i) * b(t, j);
      CHECK(atb(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }

  Mat x = random_mat(4, 3, rng), y = random_mat(7, 3, rng);
  Mat xyt;
  k::matmul_a_bt(x, y, xyt);
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 7; ++j) {
      double expect = 0.0;
      for (size_t t = 0; t < 3; ++t) expect += x(i, t) * y(j, t);
      CHECK(xyt(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("softmax rows are stochastic and match serial") {
  Rng rng(15);
  Mat a = random_mat(20, 9, rng);
  for (auto& x : a.data) x *= 10.0;
  Mat b = a;
  k::softmax_rows_serial(a);
  {
    ThreadGuard guard(4);
    k::softmax_rows(b);
  }
  CHECK(a == b);
  for (size_t i = 0; i < a.rows; ++i) {
    double sum = 0.0;
    for (size_t j = 0; j < a.cols; ++j) {
      CHECK(a(i, j) >= 0.0);
      sum += a(i, j);
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("softmax is shift invariant") {
  Mat a(1, 3);
  a(0, 0) = 1.0;
  a(0, 1) = 2.0;
  a(0, 2) = 3.0;
  Mat b(1, 3);
  b(0, 0) = 101.0;
  b(0, 1) = 102.0;
  b(0, 2) = 103.0;
  k::softmax_rows(a);
  k::softmax_rows(b);
  for (size_t j = 0; j < 3; ++j) CHECK(a(0, j) == doctest::Approx(b(0, j)).epsilon(1e-12));
}

TEST_CASE("layer norm normalizes rows before gain and bias") {
  Rng rng(16);
  Mat x = random_mat(12, 32, rng);
  Vec gain(32, 1.0), bias(32, 0.0), mean, rstd;
  Mat y;
  k::layer_norm(x, gain, bias, 1e-9, y, mean, rstd);
  for (size_t i = 0; i < y.rows; ++i) {
    double m = 0.0, v = 0.0;
    for (size_t j = 0; j < y.cols; ++j) m += y(i, j);
    m /= static_cast<double>(y.cols);
    for (size_t j = 0; j < y.cols; ++j) v += (y(i, j) - m) * (y(i, j) - m);
    v /= static_cast<double>(y.cols);
    CHECK(std::abs(m) < 1e-6);
    CHECK(std::abs(v - 1.0) < 1e-6);
  }

  Mat y2;
  Vec mean2, rstd2;
  k::layer_norm_serial(x, gain, bias, 1e-9, y2, mean2, rstd2);
  CHECK(y == y2);
}

TEST_CASE("layer norm backward matches finite differences") {
  Rng rng(17);
  size_t n = 4, d = 6;
  Mat x = random_mat(n, d, rng);
  Vec gain(d), bias(d);
  for (auto& g : gain) g = 1.0 + 0.1 * rng.normal();
  for (auto& b : bias) b = 0.1 * rng.normal();
  Mat dy = random_mat(n, d, rng);

  auto loss = [&](const Mat& xx, const Vec& gg, const Vec& bb) {
    Mat y;
    Vec mean, rstd;
    k::layer_norm(xx, gg, bb, 1e-9, y, mean, rstd);
    double s = 0.0;
    for (size_t i = 0; i < y.size(); ++i) s += y.data[i] * dy.data[i];
    return s;
  };

  Mat y;
  Vec mean, rstd;
  k::layer_norm(x, gain, bias, 1e-9, y, mean, rstd);
  Mat dx;
  Vec dgain(d, 0.0), dbias(d, 0.0);
  k::layer_norm_backward(dy, x, gain, mean, rstd, dx, dgain, dbias);

  {
    Mat ds;
    Vec dg2(d, 0.0), db2(d, 0.0);
    k::layer_norm_backward_serial(dy, x, gain, mean, rstd, ds, dg2, db2);
    CHECK(ds == dx);
    CHECK(dg2 == dgain);
    CHECK(db2 == dbias);
  }

  double h = 1e-6;
  for (size_t i = 0; i < x.size(); i += 5) {
    Mat xp = x, xm = x;
    xp.data[i] += h;
    xm.data[i] -= h;
    double fd = (loss(xp, gain, bias) - loss(xm, gain, bias)) / (2 * h);
    CHECK(dx.data[i] == doctest::Approx(fd).epsilon(1e-5));
  }
  for (size_t j = 0; j < d; ++j) {
    Vec gp = gain, gm = gain;
    gp[j] += h;
    gm[j] -= h;
    double fd = (loss(x, gp, bias) - loss(x, gm, bias)) / (2 * h);
    CHECK(dgain[j] == doctest::Approx(fd).epsilon(1e-5));
    Vec bp = bias, bm = bias;
    bp[j] += h;
    bm[j] -= h;
    fd = (loss(x, gain, bp) - loss(x, gain, bm)) / (2 * h);
    CHECK(dbias[j] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("gelu values and derivative") {
  CHECK(k::gelu_scalar(0.0) == 0.0);
  CHECK(k::gelu_scalar(10.0) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(k::gelu_scalar(-10.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(k::gelu_scalar(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));

  double h = 1e-6;
  for (double x : {-2.5, -1.0, -0.3, 0.0, 0.4, 1.7, 3.0}) {
    double fd = (k::gelu_scalar(x + h) - k::gelu_scalar(x - h)) / (2 * h);
    CHECK(k::gelu_grad_scalar(x) == doctest::Approx(fd).epsilon(1e-6));
  }

  Rng rng(18);
  Mat x = random_mat(9, 11, rng);
  Mat y1, y2;
  k::gelu_serial(x, y1);
  {
    ThreadGuard guard(4);
    k::gelu(x, y2);
  }
  CHECK(y1 == y2);
}

TEST_CASE("add_row_bias matches serial") {
  Rng rng(19);
  Mat a = random_mat(10, 8, rng);
  Vec bias(8);
  for (auto& b : bias) b = rng.normal();
  Mat a2 = a;
  k::add_row_bias_serial(a, bias);
  {
    ThreadGuard guard(4);
    k::add_row_bias(a2, bias);
  }
  CHECK(a == a2);
}
