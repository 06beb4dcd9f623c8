// Compares the serial and OpenMP matmul kernels and checks they agree
// bitwise.

#include <chrono>
#include <cstdio>
#include <functional>

#include "mtsum/kernels.hpp"
#include "mtsum/rng.hpp"

using namespace mtsum;

namespace {

Mat random_mat(int rows, int cols, Rng& rng) {
  Mat m(rows, cols);
  for (size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

double time_ms(const std::function<void()>& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
  Rng rng(7);
  std::printf("threads available: %d\n", kernels::max_threads());
  std::printf("%8s %12s %12s %8s %s\n", "size", "serial(ms)", "omp(ms)", "speedup", "bitwise");
  for (int n : {64, 128, 256, 512}) {
    const Mat a = random_mat(n, n, rng);
    const Mat b = random_mat(n, n, rng);
    Mat c_serial, c_omp;
    const int reps = n <= 128 ? 20 : 5;
    const double ts = time_ms([&] { kernels::matmul_serial(a, false, b, false, c_serial); }, reps);
    const double to = time_ms([&] { kernels::matmul_omp(a, false, b, false, c_omp); }, reps);
    std::printf("%8d %12.3f %12.3f %8.2fx %s\n", n, ts, to, ts / to,
                c_serial == c_omp ? "yes" : "NO");
  }
  return 0;
}
