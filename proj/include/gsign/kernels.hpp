#pragma once

#include <cstddef>

// Data-parallel inner loops used by the estimators and metrics. A scalar
// reference implementation always exists; AVX2/NEON variants are selected at
// runtime when the CPU supports them. Set GSIGN_KERNELS=scalar (or avx2/neon)
// to force a backend.

namespace gsign::kernels {

struct Ops {
  const char* name;
  // y = A x, A row-major rows x cols
  void (*matvec)(const double* a, const double* x, double* y,
                 std::size_t rows, std::size_t cols);
  // y += alpha * x
  void (*axpy)(double* y, double alpha, const double* x, std::size_t n);
  // y += sum_r alphas[r] * xs[r] for r < k; fused so y is streamed through
  // once per block of rows instead of once per row
  void (*axpy_batch)(double* y, const double* alphas, const double* const* xs,
                     std::size_t k, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
};

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when not built or not supported by the CPU
const Ops* neon_ops();

// Backend picked at first use; stable for the lifetime of the process.
const Ops& active();

}  // namespace gsign::kernels
