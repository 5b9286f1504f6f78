#pragma once

#include <cmath>

#include "calwav/simd/kernels.hpp"

// Scalar evaluation shared by the reference kernels and the tails of the
// vector kernels, so that lane and tail results agree bit-for-bit up to FMA
// contraction.

namespace calwav::simd::detail {

inline bool axis_locate(double u, long n, long& i, double& f) {
  if (!(u >= 0.0) || u > static_cast<double>(n - 1)) return false;
  i = static_cast<long>(u);
  if (i > n - 2) i = n - 2;
  f = u - static_cast<double>(i);
  return true;
}

inline bool interp(const Table& t, double x, double y, double& re, double& im) {
  re = 0.0;
  im = 0.0;
  if (!mask_contains(t.mask, x, y)) return false;
  long i;
  double f;
  if (!axis_locate((x - t.o0) * t.inv_s0, t.n0, i, f)) return false;
  if (t.d == 1) {
    const double w0 = 1.0 - f, w1 = f;
    const double wsum = w0 * t.flag[i] + w1 * t.flag[i + 1];
    if (wsum <= 1e-12) return false;
    re = (w0 * t.re[i] + w1 * t.re[i + 1]) / wsum;
    im = (w0 * t.im[i] + w1 * t.im[i + 1]) / wsum;
    return true;
  }
  long j;
  double g;
  if (!axis_locate((y - t.o1) * t.inv_s1, t.n1, j, g)) return false;
  const long k00 = i * t.n1 + j, k01 = k00 + 1, k10 = k00 + t.n1, k11 = k10 + 1;
  const double w00 = (1.0 - f) * (1.0 - g), w01 = (1.0 - f) * g, w10 = f * (1.0 - g), w11 = f * g;
  const double wsum = w00 * t.flag[k00] + w01 * t.flag[k01] + w10 * t.flag[k10] + w11 * t.flag[k11];
  if (wsum <= 1e-12) return false;
  re = (w00 * t.re[k00] + w01 * t.re[k01] + w10 * t.re[k10] + w11 * t.re[k11]) / wsum;
  im = (w00 * t.im[k00] + w01 * t.im[k01] + w10 * t.im[k10] + w11 * t.im[k11]) / wsum;
  return true;
}

inline double orbit_term(const Table& t, const Nodes& nd, std::size_t k, double x, double y, Accum mode) {
  double px, py;
  if (t.d == 1) {
    px = nd.m00[k] * x;
    py = 0.0;
  } else {
    px = nd.m00[k] * x + nd.m01[k] * y;
    py = nd.m10[k] * x + nd.m11[k] * y;
  }
  double re, im;
  if (!interp(t, px, py, re, im)) return 0.0;
  return nd.w[k] * (mode == Accum::Power ? re * re + im * im : re);
}

}  // namespace calwav::simd::detail
