#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>

#include "mrc/kernels.hpp"
#include "mrc/rng.hpp"

using namespace mrc;
using Clock = std::chrono::steady_clock;

namespace {

Mat random_mat(size_t r, size_t c, Rng& rng) {
  Mat m(r, c);
  for (auto& v : m.data) v = rng.normal(0.0, 1.0);
  return m;
}

double time_ms(int reps, const std::function<void()>& fn) {
  fn();  // warm up
  auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-18s %10.3f %12.3f %9.2fx   %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 5;
  kernels::set_threads((int)std::thread::hardware_concurrency());
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--threads" && i + 1 < argc) kernels::set_threads(std::atoi(argv[++i]));
    else if (arg == "--reps" && i + 1 < argc) reps = std::atoi(argv[++i]);
    else {
      std::fprintf(stderr, "usage: bench_kernels [--threads N] [--reps N]\n");
      return 1;
    }
  }

  Rng rng(1234);
  const size_t n = 384, k = 512, m = 384;
  Mat a = random_mat(n, k, rng);
  Mat b = random_mat(k, m, rng);
  Mat bt = random_mat(m, k, rng);
  Mat at = random_mat(k, n, rng);
  Mat big = random_mat(1024, 768, rng);
  Vec gain(big.cols, 1.1), bias(big.cols, 0.1);

  std::printf("threads: %d, reps: %d\n", kernels::threads(), reps);
  std::printf("%-18s %10s %12s %10s\n", "kernel", "serial ms", "parallel ms", "speedup");

  {
    Mat cs(n, m), cp(n, m);
    double s = time_ms(reps, [&] { kernels::matmul_serial(a, b, cs); });
    double p = time_ms(reps, [&] { kernels::matmul(a, b, cp); });
    report("matmul", s, p, cs == cp);
  }
  {
    Mat cs(n, m), cp(n, m);
    double s = time_ms(reps, [&] { kernels::matmul_at_b_serial(at, b, cs); });
    double p = time_ms(reps, [&] { kernels::matmul_at_b(at, b, cp); });
    report("matmul_at_b", s, p, cs == cp);
  }
  {
    Mat cs(n, m), cp(n, m);
    double s = time_ms(reps, [&] { kernels::matmul_a_bt_serial(a, bt, cs); });
    double p = time_ms(reps, [&] { kernels::matmul_a_bt(a, bt, cp); });
    report("matmul_a_bt", s, p, cs == cp);
  }
  {
    Mat xs = big, xp = big;
    double s = time_ms(reps, [&] { xs = big; kernels::softmax_rows_serial(xs); });
    double p = time_ms(reps, [&] { xp = big; kernels::softmax_rows(xp); });
    report("softmax_rows", s, p, xs == xp);
  }
  {
    Mat ys(big.rows, big.cols), yp(big.rows, big.cols);
    Vec ms(big.rows), rs(big.rows), mp(big.rows), rp(big.rows);
    double s =
        time_ms(reps, [&] { kernels::layer_norm_serial(big, gain, bias, 1e-9, ys, ms, rs); });
    double p = time_ms(reps, [&] { kernels::layer_norm(big, gain, bias, 1e-9, yp, mp, rp); });
    report("layer_norm", s, p, ys == yp && ms == mp && rs == rp);
  }
  {
    Mat ys(big.rows, big.cols), yp(big.rows, big.cols);
    double s = time_ms(reps, [&] { kernels::gelu_serial(big, ys); });
    double p = time_ms(reps, [&] { kernels::gelu(big, yp); });
    report("gelu", s, p, ys == yp);
  }
  return 0;
}
