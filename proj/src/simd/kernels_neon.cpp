#include "calwav/simd/kernels.hpp"

#if defined(__ARM_NEON) && defined(__aarch64__)
#include <arm_neon.h>

#include "interp_scalar.hpp"

namespace calwav::simd {

namespace {

// NEON has no gathers, so the interpolation kernels reuse the scalar path;
// the complex multiply/accumulate loops are vectorized two lanes wide.

double orbit_sum(const Table& t, const Nodes& nd, double x, double y, Accum mode) {
  double s0 = 0.0, s1 = 0.0;
  std::size_t k = 0;
  for (; k + 2 <= nd.n; k += 2) {
    s0 += detail::orbit_term(t, nd, k, x, y, mode);
    s1 += detail::orbit_term(t, nd, k + 1, x, y, mode);
  }
  if (k < nd.n) s0 += detail::orbit_term(t, nd, k, x, y, mode);
  return s0 + s1;
}

void dilate_eval(const Table& t, const double* m, const double* xs, const double* ys, std::size_t n, double scale,
                 double* out_re, double* out_im) {
  for (std::size_t k = 0; k < n; ++k) {
    const double px = t.d == 1 ? m[0] * xs[k] : m[0] * xs[k] + m[1] * ys[k];
    const double py = t.d == 1 ? 0.0 : m[2] * xs[k] + m[3] * ys[k];
    double re, im;
    detail::interp(t, px, py, re, im);
    out_re[k] = scale * re;
    out_im[k] = scale * im;
  }
}

void mul_conj(const double* a, const double* b_re, const double* b_im, double s, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const float64x2_t va = vld1q_f64(a + 2 * k);
    const float64x2_t sw = vextq_f64(va, va, 1);
    const float64x2_t br = vdupq_n_f64(b_re[k]);
    const float64x2_t bi = vmulq_f64(vdupq_n_f64(b_im[k]), float64x2_t{1.0, -1.0});
    const float64x2_t r = vaddq_f64(vmulq_f64(va, br), vmulq_f64(sw, bi));
    vst1q_f64(out + 2 * k, vmulq_n_f64(r, s));
  }
}

void mul_accumulate(double* acc, const double* a, const double* b_re, const double* b_im, double s, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const float64x2_t va = vld1q_f64(a + 2 * k);
    const float64x2_t sw = vextq_f64(va, va, 1);
    const float64x2_t br = vdupq_n_f64(b_re[k]);
    const float64x2_t bi = vmulq_f64(vdupq_n_f64(b_im[k]), float64x2_t{-1.0, 1.0});
    const float64x2_t r = vaddq_f64(vmulq_f64(va, br), vmulq_f64(sw, bi));
    vst1q_f64(acc + 2 * k, vaddq_f64(vld1q_f64(acc + 2 * k), vmulq_n_f64(r, s)));
  }
}

double norm_sq(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const float64x2_t v = vld1q_f64(a + 2 * k);
    acc = vfmaq_f64(acc, v, v);
  }
  return vaddvq_f64(acc);
}

const KernelTable kNeon{"neon", orbit_sum, dilate_eval, mul_conj, mul_accumulate, norm_sq};

}  // namespace

const KernelTable* neon_kernels() { return &kNeon; }

}  // namespace calwav::simd

#endif
