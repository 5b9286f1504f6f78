#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "calwav/simd/kernels.hpp"

namespace calwav::simd {

#if !defined(CALWAV_HAVE_AVX2)
const KernelTable* avx2_kernels() { return nullptr; }
#endif
#if !defined(CALWAV_HAVE_NEON)
const KernelTable* neon_kernels() { return nullptr; }
#endif

namespace {

const KernelTable& resolve() {
  const char* env = std::getenv("CALWAV_SIMD");
  const std::string want = env ? env : "auto";
  if (want == "scalar") return scalar_kernels();
  if (want == "avx2" || want == "neon") {
    const KernelTable* t = want == "avx2" ? avx2_kernels() : neon_kernels();
    if (!t) throw std::runtime_error("CALWAV_SIMD=" + want + " requested but not available on this machine");
    return *t;
  }
  if (want != "auto" && !want.empty())
    throw std::runtime_error("CALWAV_SIMD must be scalar, avx2, neon or auto (got '" + want + "')");
  if (const KernelTable* t = avx2_kernels()) return *t;
  if (const KernelTable* t = neon_kernels()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& kernels() {
  static const KernelTable& active = resolve();
  return active;
}

}  // namespace calwav::simd
