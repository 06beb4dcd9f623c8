#pragma once

#include "mtsum/mat.hpp"

namespace mtsum::kernels {

enum class Backend { Serial, OpenMP };

// Process-wide backend switch. Defaults to OpenMP when compiled with it.
Backend& active_backend();

// out = op(a) * op(b), where op is optional transpose. Parallelism is over
// output rows with a sequential inner loop, so both backends produce
// bitwise-identical results.
void matmul_serial(const Mat& a, bool ta, const Mat& b, bool tb, Mat& out);
void matmul_omp(const Mat& a, bool ta, const Mat& b, bool tb, Mat& out);
void matmul(const Mat& a, bool ta, const Mat& b, bool tb, Mat& out);

// out += op(a) * op(b)
void matmul_acc_serial(const Mat& a, bool ta, const Mat& b, bool tb, Mat& out);
void matmul_acc_omp(const Mat& a, bool ta, const Mat& b, bool tb, Mat& out);
void matmul_acc(const Mat& a, bool ta, const Mat& b, bool tb, Mat& out);

int max_threads();

}  // namespace mtsum::kernels
