#include <immintrin.h>

#include "calwav/simd/kernels.hpp"
#include "interp_scalar.hpp"

namespace calwav::simd {

namespace {

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

__m256d mask_vec(const MaskParams& m, __m256d x, __m256d y) {
  const __m256d zero = _mm256_setzero_pd();
  switch (m.kind) {
    case MaskKind::Full: {
      const __m256d r2 = _mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y));
      return _mm256_cmp_pd(r2, zero, _CMP_GT_OQ);
    }
    case MaskKind::Annulus: {
      const __m256d r2 = _mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y));
      return _mm256_and_pd(_mm256_cmp_pd(r2, _mm256_set1_pd(m.a * m.a), _CMP_GE_OQ),
                           _mm256_cmp_pd(r2, _mm256_set1_pd(m.b * m.b), _CMP_LE_OQ));
    }
    case MaskKind::HalfPlane: return _mm256_cmp_pd(x, zero, _CMP_NEQ_OQ);
    case MaskKind::Strip:
      return _mm256_and_pd(_mm256_cmp_pd(x, _mm256_set1_pd(m.a), _CMP_GT_OQ),
                           _mm256_cmp_pd(x, _mm256_set1_pd(m.b), _CMP_LT_OQ));
    case MaskKind::Quadrant: {
      __m256d c = m.s1 == 0.0 ? _mm256_cmp_pd(zero, zero, _CMP_EQ_OQ)
                              : _mm256_cmp_pd(_mm256_mul_pd(_mm256_set1_pd(m.s1), x), zero, _CMP_GT_OQ);
      if (m.s2 != 0.0) c = _mm256_and_pd(c, _mm256_cmp_pd(_mm256_mul_pd(_mm256_set1_pd(m.s2), y), zero, _CMP_GT_OQ));
      return c;
    }
    case MaskKind::Cone:
      return _mm256_cmp_pd(abs_pd(y), _mm256_mul_pd(_mm256_set1_pd(m.a), abs_pd(x)), _CMP_LT_OQ);
  }
  return zero;
}

// Locate one axis: returns validity mask, clamped cell index and fraction.
inline __m256d locate(__m256d u, double nmax, __m256d& cell, __m256d& frac) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d top = _mm256_set1_pd(nmax);
  const __m256d valid = _mm256_and_pd(_mm256_cmp_pd(u, zero, _CMP_GE_OQ), _mm256_cmp_pd(u, top, _CMP_LE_OQ));
  const __m256d uc = _mm256_blendv_pd(zero, u, valid);
  cell = _mm256_min_pd(_mm256_floor_pd(uc), _mm256_set1_pd(nmax - 1.0 < 0.0 ? 0.0 : nmax - 1.0));
  frac = _mm256_sub_pd(uc, cell);
  return valid;
}

inline __m256d gather(const double* base, __m128i idx) { return _mm256_i32gather_pd(base, idx, 8); }

// Interpolate 4 points; lanes outside the table or mask return ok = 0.
inline __m256d interp4(const Table& t, __m256d px, __m256d py, __m256d& re, __m256d& im) {
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d valid = mask_vec(t.mask, px, py);
  const __m256d u = _mm256_mul_pd(_mm256_sub_pd(px, _mm256_set1_pd(t.o0)), _mm256_set1_pd(t.inv_s0));
  __m256d ci, f;
  valid = _mm256_and_pd(valid, locate(u, static_cast<double>(t.n0 - 1), ci, f));
  if (t.d == 1) {
    const __m256d fidx = _mm256_blendv_pd(_mm256_setzero_pd(), ci, valid);
    const __m128i i0 = _mm256_cvtpd_epi32(fidx);
    const __m128i i1 = _mm_add_epi32(i0, _mm_set1_epi32(1));
    const __m256d w0 = _mm256_sub_pd(one, f), w1 = f;
    const __m256d wsum = _mm256_add_pd(_mm256_mul_pd(w0, gather(t.flag, i0)), _mm256_mul_pd(w1, gather(t.flag, i1)));
    const __m256d nre = _mm256_add_pd(_mm256_mul_pd(w0, gather(t.re, i0)), _mm256_mul_pd(w1, gather(t.re, i1)));
    const __m256d nim = _mm256_add_pd(_mm256_mul_pd(w0, gather(t.im, i0)), _mm256_mul_pd(w1, gather(t.im, i1)));
    const __m256d ok = _mm256_and_pd(valid, _mm256_cmp_pd(wsum, _mm256_set1_pd(1e-12), _CMP_GT_OQ));
    const __m256d safe = _mm256_blendv_pd(one, wsum, ok);
    re = _mm256_and_pd(ok, _mm256_div_pd(nre, safe));
    im = _mm256_and_pd(ok, _mm256_div_pd(nim, safe));
    return ok;
  }
  const __m256d v = _mm256_mul_pd(_mm256_sub_pd(py, _mm256_set1_pd(t.o1)), _mm256_set1_pd(t.inv_s1));
  __m256d cj, g;
  valid = _mm256_and_pd(valid, locate(v, static_cast<double>(t.n1 - 1), cj, g));
  const __m256d fidx = _mm256_blendv_pd(_mm256_setzero_pd(),
                                        _mm256_add_pd(_mm256_mul_pd(ci, _mm256_set1_pd(static_cast<double>(t.n1))), cj),
                                        valid);
  const __m128i k00 = _mm256_cvtpd_epi32(fidx);
  const __m128i k01 = _mm_add_epi32(k00, _mm_set1_epi32(1));
  const __m128i k10 = _mm_add_epi32(k00, _mm_set1_epi32(static_cast<int>(t.n1)));
  const __m128i k11 = _mm_add_epi32(k10, _mm_set1_epi32(1));
  const __m256d fm = _mm256_sub_pd(one, f), gm = _mm256_sub_pd(one, g);
  const __m256d w00 = _mm256_mul_pd(fm, gm), w01 = _mm256_mul_pd(fm, g);
  const __m256d w10 = _mm256_mul_pd(f, gm), w11 = _mm256_mul_pd(f, g);
  auto blend4 = [&](const double* base) {
    __m256d s = _mm256_mul_pd(w00, gather(base, k00));
    s = _mm256_add_pd(s, _mm256_mul_pd(w01, gather(base, k01)));
    s = _mm256_add_pd(s, _mm256_mul_pd(w10, gather(base, k10)));
    return _mm256_add_pd(s, _mm256_mul_pd(w11, gather(base, k11)));
  };
  const __m256d wsum = blend4(t.flag);
  const __m256d ok = _mm256_and_pd(valid, _mm256_cmp_pd(wsum, _mm256_set1_pd(1e-12), _CMP_GT_OQ));
  const __m256d safe = _mm256_blendv_pd(one, wsum, ok);
  re = _mm256_and_pd(ok, _mm256_div_pd(blend4(t.re), safe));
  im = _mm256_and_pd(ok, _mm256_div_pd(blend4(t.im), safe));
  return ok;
}

double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double orbit_sum(const Table& t, const Nodes& nd, double x, double y, Accum mode) {
  const __m256d vx = _mm256_set1_pd(x), vy = _mm256_set1_pd(y);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= nd.n; k += 4) {
    __m256d px, py;
    const __m256d m00 = _mm256_loadu_pd(nd.m00 + k);
    if (t.d == 1) {
      px = _mm256_mul_pd(m00, vx);
      py = _mm256_setzero_pd();
    } else {
      px = _mm256_add_pd(_mm256_mul_pd(m00, vx), _mm256_mul_pd(_mm256_loadu_pd(nd.m01 + k), vy));
      py = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(nd.m10 + k), vx), _mm256_mul_pd(_mm256_loadu_pd(nd.m11 + k), vy));
    }
    __m256d re, im;
    interp4(t, px, py, re, im);
    const __m256d term = mode == Accum::Power ? _mm256_add_pd(_mm256_mul_pd(re, re), _mm256_mul_pd(im, im)) : re;
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(nd.w + k), term, acc);
  }
  double s = hsum(acc);
  for (; k < nd.n; ++k) s += detail::orbit_term(t, nd, k, x, y, mode);
  return s;
}

void dilate_eval(const Table& t, const double* m, const double* xs, const double* ys, std::size_t n, double scale,
                 double* out_re, double* out_im) {
  const __m256d m00 = _mm256_set1_pd(m[0]);
  const __m256d vs = _mm256_set1_pd(scale);
  std::size_t k = 0;
  if (t.d == 1) {
    for (; k + 4 <= n; k += 4) {
      __m256d re, im;
      interp4(t, _mm256_mul_pd(m00, _mm256_loadu_pd(xs + k)), _mm256_setzero_pd(), re, im);
      _mm256_storeu_pd(out_re + k, _mm256_mul_pd(vs, re));
      _mm256_storeu_pd(out_im + k, _mm256_mul_pd(vs, im));
    }
  } else {
    const __m256d m01 = _mm256_set1_pd(m[1]), m10 = _mm256_set1_pd(m[2]), m11 = _mm256_set1_pd(m[3]);
    for (; k + 4 <= n; k += 4) {
      const __m256d x = _mm256_loadu_pd(xs + k), y = _mm256_loadu_pd(ys + k);
      const __m256d px = _mm256_add_pd(_mm256_mul_pd(m00, x), _mm256_mul_pd(m01, y));
      const __m256d py = _mm256_add_pd(_mm256_mul_pd(m10, x), _mm256_mul_pd(m11, y));
      __m256d re, im;
      interp4(t, px, py, re, im);
      _mm256_storeu_pd(out_re + k, _mm256_mul_pd(vs, re));
      _mm256_storeu_pd(out_im + k, _mm256_mul_pd(vs, im));
    }
  }
  for (; k < n; ++k) {
    double px, py;
    if (t.d == 1) {
      px = m[0] * xs[k];
      py = 0.0;
    } else {
      px = m[0] * xs[k] + m[1] * ys[k];
      py = m[2] * xs[k] + m[3] * ys[k];
    }
    double re, im;
    detail::interp(t, px, py, re, im);
    out_re[k] = scale * re;
    out_im[k] = scale * im;
  }
}

// Broadcast two planar values to [b0, b0, b1, b1].
inline __m256d dup_pairs(const double* p) {
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(p)), 0b01010000);
}

void mul_conj(const double* a, const double* b_re, const double* b_im, double s, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  const __m256d sign = _mm256_setr_pd(1.0, -1.0, 1.0, -1.0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d va = _mm256_loadu_pd(a + 2 * k);
    const __m256d br = dup_pairs(b_re + k), bi = dup_pairs(b_im + k);
    const __m256d sw = _mm256_permute_pd(va, 0b0101);
    const __m256d r = _mm256_add_pd(_mm256_mul_pd(va, br), _mm256_mul_pd(_mm256_mul_pd(sw, bi), sign));
    _mm256_storeu_pd(out + 2 * k, _mm256_mul_pd(vs, r));
  }
  for (; k < n; ++k) {
    const double ar = a[2 * k], ai = a[2 * k + 1];
    out[2 * k] = s * (ar * b_re[k] + ai * b_im[k]);
    out[2 * k + 1] = s * (ai * b_re[k] - ar * b_im[k]);
  }
}

void mul_accumulate(double* acc, const double* a, const double* b_re, const double* b_im, double s, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  const __m256d sign = _mm256_setr_pd(-1.0, 1.0, -1.0, 1.0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d va = _mm256_loadu_pd(a + 2 * k);
    const __m256d br = dup_pairs(b_re + k), bi = dup_pairs(b_im + k);
    const __m256d sw = _mm256_permute_pd(va, 0b0101);
    const __m256d r = _mm256_add_pd(_mm256_mul_pd(va, br), _mm256_mul_pd(_mm256_mul_pd(sw, bi), sign));
    _mm256_storeu_pd(acc + 2 * k, _mm256_add_pd(_mm256_loadu_pd(acc + 2 * k), _mm256_mul_pd(vs, r)));
  }
  for (; k < n; ++k) {
    const double ar = a[2 * k], ai = a[2 * k + 1];
    acc[2 * k] += s * (ar * b_re[k] - ai * b_im[k]);
    acc[2 * k + 1] += s * (ar * b_im[k] + ai * b_re[k]);
  }
}

double norm_sq(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  const std::size_t len = 2 * n;
  for (; k + 4 <= len; k += 4) {
    const __m256d v = _mm256_loadu_pd(a + k);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; k < len; ++k) s += a[k] * a[k];
  return s;
}

const KernelTable kAvx2{"avx2", orbit_sum, dilate_eval, mul_conj, mul_accumulate, norm_sq};

}  // namespace

const KernelTable* avx2_kernels() {
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &kAvx2;
  return nullptr;
}

}  // namespace calwav::simd
