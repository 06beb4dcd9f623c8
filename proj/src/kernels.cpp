#include "mtsum/kernels.hpp"

#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mtsum::kernels {

Backend& active_backend() {
#ifdef _OPENMP
  static Backend backend = Backend::OpenMP;
#else
  static Backend backend = Backend::Serial;
#endif
  return backend;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

struct Dims {
  int m, n, k;
};

Dims check_dims(const Mat& a, bool ta, const Mat& b, bool tb) {
  const int m = ta ? a.cols() : a.rows();
  const int k = ta ? a.rows() : a.cols();
  const int kb = tb ? b.cols() : b.rows();
  const int n = tb ? b.rows() : b.cols();
  if (k != kb) throw std::invalid_argument("matmul: inner dimensions disagree");
  return {m, n, k};
}

inline double cell(const Mat& a, bool ta, const Mat& b, bool tb, int i, int j, int k) {
  double acc = 0.0;
  for (int p = 0; p < k; ++p) {
    const double av = ta ? a(p, i) : a(i, p);
    const double bv = tb ? b(j, p) : b(p, j);
    acc += av * bv;
  }
  return acc;
}

}  // namespace

void matmul_acc_serial(const Mat& a, bool ta, const Mat& b, bool tb, Mat& out) {
  const Dims d = check_dims(a, ta, b, tb);
  if (out.rows() != d.m || out.cols() != d.n)
    throw std::invalid_argument("matmul: output shape mismatch");
  for (int i = 0; i < d.m; ++i)
    for (int j = 0; j < d.n; ++j) out(i, j) += cell(a, ta, b, tb, i, j, d.k);
}

void matmul_acc_omp(const Mat& a, bool ta, const Mat& b, bool tb, Mat& out) {
  const Dims d = check_dims(a, ta, b, tb);
  if (out.rows() != d.m || out.cols() != d.n)
    throw std::invalid_argument("matmul: output shape mismatch");
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (d.m * d.n * d.k > 4096)
#endif
  for (int i = 0; i < d.m; ++i)
    for (int j = 0; j < d.n; ++j) out(i, j) += cell(a, ta, b, tb, i, j, d.k);
}

void matmul_acc(const Mat& a, bool ta, const Mat& b, bool tb, Mat& out) {
  if (active_backend() == Backend::OpenMP)
    matmul_acc_omp(a, ta, b, tb, out);
  else
    matmul_acc_serial(a, ta, b, tb, out);
}

void matmul_serial(const Mat& a, bool ta, const Mat& b, bool tb, Mat& out) {
  const Dims d = check_dims(a, ta, b, tb);
  out = Mat(d.m, d.n);
  matmul_acc_serial(a, ta, b, tb, out);
}

void matmul_omp(const Mat& a, bool ta, const Mat& b, bool tb, Mat& out) {
  const Dims d = check_dims(a, ta, b, tb);
  out = Mat(d.m, d.n);
  matmul_acc_omp(a, ta, b, tb, out);
}

void matmul(const Mat& a, bool ta, const Mat& b, bool tb, Mat& out) {
  if (active_backend() == Backend::OpenMP)
    matmul_omp(a, ta, b, tb, out);
  else
    matmul_serial(a, ta, b, tb, out);
}

}  // namespace mtsum::kernels
