#include "gsign/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace gsign::kernels {
namespace {

void matvec_neon(const double* a, const double* x, double* y,
                 std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = a + i * cols;
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      acc0 = vfmaq_f64(acc0, vld1q_f64(row + j), vld1q_f64(x + j));
      acc1 = vfmaq_f64(acc1, vld1q_f64(row + j + 2), vld1q_f64(x + j + 2));
    }
    double acc = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; j < cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void axpy_neon(double* y, double alpha, const double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_batch_neon(double* y, const double* alphas, const double* const* xs,
                     std::size_t k, std::size_t n) {
  std::size_t r = 0;
  for (; r + 4 <= k; r += 4) {
    const float64x2_t a0 = vdupq_n_f64(alphas[r]);
    const float64x2_t a1 = vdupq_n_f64(alphas[r + 1]);
    const float64x2_t a2 = vdupq_n_f64(alphas[r + 2]);
    const float64x2_t a3 = vdupq_n_f64(alphas[r + 3]);
    const double* x0 = xs[r];
    const double* x1 = xs[r + 1];
    const double* x2 = xs[r + 2];
    const double* x3 = xs[r + 3];
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
      float64x2_t vy = vld1q_f64(y + i);
      vy = vfmaq_f64(vy, a0, vld1q_f64(x0 + i));
      vy = vfmaq_f64(vy, a1, vld1q_f64(x1 + i));
      vy = vfmaq_f64(vy, a2, vld1q_f64(x2 + i));
      vy = vfmaq_f64(vy, a3, vld1q_f64(x3 + i));
      vst1q_f64(y + i, vy);
    }
    for (; i < n; ++i)
      y[i] += alphas[r] * x0[i] + alphas[r + 1] * x1[i] +
              alphas[r + 2] * x2[i] + alphas[r + 3] * x3[i];
  }
  for (; r < k; ++r) axpy_neon(y, alphas[r], xs[r], n);
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_sq_diff_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double sum_abs_diff_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vaddq_f64(acc, vabsq_f64(d));
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

}  // namespace

const Ops* neon_ops_impl() {
  static const Ops ops{"neon", matvec_neon, axpy_neon, axpy_batch_neon,
                       dot_neon, sum_sq_diff_neon, sum_abs_diff_neon};
  return &ops;
}

}  // namespace gsign::kernels
