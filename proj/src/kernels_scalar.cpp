#include "gsign/kernels.hpp"

#include <cmath>

namespace gsign::kernels {
namespace {

void matvec_scalar(const double* a, const double* x, double* y,
                   std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = a + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void axpy_scalar(double* y, double alpha, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_batch_scalar(double* y, const double* alphas, const double* const* xs,
                       std::size_t k, std::size_t n) {
  std::size_t r = 0;
  for (; r + 4 <= k; r += 4) {
    const double a0 = alphas[r], a1 = alphas[r + 1];
    const double a2 = alphas[r + 2], a3 = alphas[r + 3];
    const double* x0 = xs[r];
    const double* x1 = xs[r + 1];
    const double* x2 = xs[r + 2];
    const double* x3 = xs[r + 3];
    for (std::size_t i = 0; i < n; ++i)
      y[i] += a0 * x0[i] + a1 * x1[i] + a2 * x2[i] + a3 * x3[i];
  }
  for (; r < k; ++r) axpy_scalar(y, alphas[r], xs[r], n);
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
  return acc;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{"scalar", matvec_scalar, axpy_scalar, axpy_batch_scalar,
                       dot_scalar, sum_sq_diff_scalar, sum_abs_diff_scalar};
  return ops;
}

}  // namespace gsign::kernels
