#include "gsign/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace gsign::kernels {

#if defined(GSIGN_BUILD_AVX2)
const Ops* avx2_ops_impl();
#endif
#if defined(GSIGN_BUILD_NEON)
const Ops* neon_ops_impl();
#endif

const Ops* avx2_ops() {
#if defined(GSIGN_BUILD_AVX2)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return avx2_ops_impl();
  }
#endif
  return nullptr;
}

const Ops* neon_ops() {
#if defined(GSIGN_BUILD_NEON)
  // NEON is mandatory on aarch64.
  return neon_ops_impl();
#else
  return nullptr;
#endif
}

namespace {

const Ops& select() {
  if (const char* forced = std::getenv("GSIGN_KERNELS")) {
    if (std::strcmp(forced, "scalar") == 0) return scalar_ops();
    if (std::strcmp(forced, "avx2") == 0 && avx2_ops()) return *avx2_ops();
    if (std::strcmp(forced, "neon") == 0 && neon_ops()) return *neon_ops();
    return scalar_ops();  // unknown or unavailable backend requested
  }
  if (const Ops* ops = avx2_ops()) return *ops;
  if (const Ops* ops = neon_ops()) return *ops;
  return scalar_ops();
}

}  // namespace

const Ops& active() {
  static const Ops& ops = select();
  return ops;
}

}  // namespace gsign::kernels
