#pragma once

#include <cstddef>

// Data-parallel inner loops. Each kernel has a scalar reference in
// kernels_scalar.cpp and ISA variants (AVX2+FMA, NEON) selected once at
// runtime. The CALWAV_SIMD environment variable (scalar|avx2|neon|auto)
// overrides the choice.

namespace calwav::simd {

enum class MaskKind : int { Full = 0, Annulus = 1, HalfPlane = 2, Strip = 3, Quadrant = 4, Cone = 5 };

/// Raw (unguarded) point predicate of a band mask, in a form every ISA can
/// evaluate lane-wise. 1D masks use y = 0; a zero quadrant sign means "ignore".
struct MaskParams {
  MaskKind kind = MaskKind::Full;
  double a = 0.0;  // annulus r1 / strip lower / cone slope
  double b = 0.0;  // annulus r2 / strip upper
  double s1 = 1.0;
  double s2 = 1.0;
};

bool mask_contains(const MaskParams& m, double x, double y);

/// Sampled table for 1D (n1 == 1) or 2D grids, row-major with axis 1
/// fastest. `flag` is 1 at grid points inside the mask and 0 elsewhere;
/// interpolation renormalizes over in-mask corners.
struct Table {
  int d = 1;
  long n0 = 0;
  long n1 = 1;
  double o0 = 0.0, o1 = 0.0;
  double inv_s0 = 1.0, inv_s1 = 1.0;
  const double* re = nullptr;
  const double* im = nullptr;
  const double* flag = nullptr;
  MaskParams mask;
};

/// Dual matrices M_i = h_i^T in structure-of-arrays form plus weights.
/// For d == 1 only m00 is read.
struct Nodes {
  const double* m00 = nullptr;
  const double* m01 = nullptr;
  const double* m10 = nullptr;
  const double* m11 = nullptr;
  const double* w = nullptr;
  std::size_t n = 0;
};

enum class Accum : int { Power = 0, Real = 1 };

struct KernelTable {
  const char* isa;

  /// sum_i w_i * g(T(M_i xi)) with g = |.|^2 (Power) or Re (Real).
  double (*orbit_sum)(const Table& t, const Nodes& nodes, double x, double y, Accum mode);

  /// out_k = scale * T(M (x_k, y_k)) for a batch of points.
  void (*dilate_eval)(const Table& t, const double* m, const double* xs, const double* ys, std::size_t n,
                      double scale, double* out_re, double* out_im);

  /// out_k = s * a_k * conj(b_k); a, out interleaved complex, b split planar.
  void (*mul_conj)(const double* a, const double* b_re, const double* b_im, double s, double* out, std::size_t n);

  /// acc_k += s * a_k * b_k; acc, a interleaved complex, b planar.
  void (*mul_accumulate)(double* acc, const double* a, const double* b_re, const double* b_im, double s,
                         std::size_t n);

  /// sum_k |a_k|^2 for interleaved complex a.
  double (*norm_sq)(const double* a, std::size_t n);
};

const KernelTable& scalar_kernels();
/// nullptr when the ISA was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

/// Active table (resolved once, honouring CALWAV_SIMD).
const KernelTable& kernels();

}  // namespace calwav::simd
