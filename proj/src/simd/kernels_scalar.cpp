#include <cmath>

#include "calwav/simd/kernels.hpp"
#include "interp_scalar.hpp"

namespace calwav::simd {

bool mask_contains(const MaskParams& m, double x, double y) {
  switch (m.kind) {
    case MaskKind::Full: return x * x + y * y > 0.0;
    case MaskKind::Annulus: {
      const double r2 = x * x + y * y;
      return r2 >= m.a * m.a && r2 <= m.b * m.b;
    }
    case MaskKind::HalfPlane: return x != 0.0;
    case MaskKind::Strip: return x > m.a && x < m.b;
    case MaskKind::Quadrant: return (m.s1 == 0.0 || m.s1 * x > 0.0) && (m.s2 == 0.0 || m.s2 * y > 0.0);
    case MaskKind::Cone: return std::abs(y) < m.a * std::abs(x);
  }
  return false;
}

namespace {

double orbit_sum(const Table& t, const Nodes& nd, double x, double y, Accum mode) {
  double s = 0.0;
  for (std::size_t k = 0; k < nd.n; ++k) s += detail::orbit_term(t, nd, k, x, y, mode);
  return s;
}

void dilate_eval(const Table& t, const double* m, const double* xs, const double* ys, std::size_t n, double scale,
                 double* out_re, double* out_im) {
  for (std::size_t k = 0; k < n; ++k) {
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

void mul_conj(const double* a, const double* b_re, const double* b_im, double s, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double ar = a[2 * k], ai = a[2 * k + 1];
    out[2 * k] = s * (ar * b_re[k] + ai * b_im[k]);
    out[2 * k + 1] = s * (ai * b_re[k] - ar * b_im[k]);
  }
}

void mul_accumulate(double* acc, const double* a, const double* b_re, const double* b_im, double s, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double ar = a[2 * k], ai = a[2 * k + 1];
    acc[2 * k] += s * (ar * b_re[k] - ai * b_im[k]);
    acc[2 * k + 1] += s * (ar * b_im[k] + ai * b_re[k]);
  }
}

double norm_sq(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < 2 * n; ++k) s += a[k] * a[k];
  return s;
}

const KernelTable kScalar{"scalar", orbit_sum, dilate_eval, mul_conj, mul_accumulate, norm_sq};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace calwav::simd
