#include "gsign/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace gsign::kernels {
namespace {

inline double hsum256(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void matvec_avx2(const double* a, const double* x, double* y,
                 std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = a + i * cols;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 8 <= cols; j += 8) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j),
                             _mm256_loadu_pd(x + j), acc0);
      acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j + 4),
                             _mm256_loadu_pd(x + j + 4), acc1);
    }
    for (; j + 4 <= cols; j += 4) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j),
                             _mm256_loadu_pd(x + j), acc0);
    }
    double acc = hsum256(_mm256_add_pd(acc0, acc1));
    for (; j < cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void axpy_avx2(double* y, double alpha, const double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_batch_avx2(double* y, const double* alphas, const double* const* xs,
                     std::size_t k, std::size_t n) {
  std::size_t r = 0;
  for (; r + 4 <= k; r += 4) {
    const __m256d a0 = _mm256_set1_pd(alphas[r]);
    const __m256d a1 = _mm256_set1_pd(alphas[r + 1]);
    const __m256d a2 = _mm256_set1_pd(alphas[r + 2]);
    const __m256d a3 = _mm256_set1_pd(alphas[r + 3]);
    const double* x0 = xs[r];
    const double* x1 = xs[r + 1];
    const double* x2 = xs[r + 2];
    const double* x3 = xs[r + 3];
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      __m256d vy = _mm256_loadu_pd(y + i);
      vy = _mm256_fmadd_pd(a0, _mm256_loadu_pd(x0 + i), vy);
      vy = _mm256_fmadd_pd(a1, _mm256_loadu_pd(x1 + i), vy);
      vy = _mm256_fmadd_pd(a2, _mm256_loadu_pd(x2 + i), vy);
      vy = _mm256_fmadd_pd(a3, _mm256_loadu_pd(x3 + i), vy);
      _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i)
      y[i] += alphas[r] * x0[i] + alphas[r + 1] * x1[i] +
              alphas[r + 2] * x2[i] + alphas[r + 3] * x3[i];
  }
  for (; r < k; ++r) axpy_avx2(y, alphas[r], xs[r], n);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double s = hsum256(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum256(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double sum_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
  }
  double s = hsum256(acc);
  for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

}  // namespace

const Ops* avx2_ops_impl() {
  static const Ops ops{"avx2", matvec_avx2, axpy_avx2, axpy_batch_avx2,
                       dot_avx2, sum_sq_diff_avx2, sum_abs_diff_avx2};
  return &ops;
}

}  // namespace gsign::kernels
