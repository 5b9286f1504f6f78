#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "calwav/group.hpp"
#include "calwav/spectral.hpp"
#include "calwav/transform.hpp"

namespace calwav::testing {

inline Grid grid1(long n, double half) {
  const long s[] = {n};
  const double h[] = {half};
  return Grid::centered(s, h);
}

inline Grid grid2(long n, double half) {
  const long s[] = {n, n};
  const double h[] = {half, half};
  return Grid::centered(s, h);
}

inline BandMask mask(const std::string& name, const nlohmann::json& params, const Grid& g) {
  BandMask m = mask_catalog(name, params, g.d());
  with_default_guard(m, g);
  return m;
}

/// exp(-|xi - c|^2 / (2 s^2)) restricted to the mask.
inline SpectralFunction gaussian_bump(const Grid& g, const BandMask& m, const Vec& c, double s) {
  return SpectralFunction::sample(g, m, [&](std::span<const double> xi) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < c.size(); ++a) r2 += (xi[a] - c[a]) * (xi[a] - c[a]);
    return cplx(std::exp(-r2 / (2.0 * s * s)), 0.0);
  });
}

/// (1 + |xi|^2 / s^2)^{-2} restricted to the mask.
inline SpectralFunction soft_bump(const Grid& g, const BandMask& m, double s = 1.0) {
  return SpectralFunction::sample(g, m, [&](std::span<const double> xi) {
    double r2 = 0.0;
    for (double v : xi) r2 += v * v;
    const double t = 1.0 + r2 / (s * s);
    return cplx(1.0 / (t * t), 0.0);
  });
}

inline QuadratureRule quadrature(const GroupModel& g, std::vector<int> res = {}) {
  if (res.empty())
    for (const auto& ax : g.axes) res.push_back(ax.kind == AxisKind::Sign ? 2 : 64);
  return build_quadrature(g, res, g.default_truncation);
}

/// Signal whose spectrum on the FFT grid paired with `freq` is `fhat`.
template <class F>
Signal band_limited(const Grid& freq, F fhat) {
  Fft fft(Grid::fft_dual_spatial(freq));
  std::vector<cplx> spec(fft.size());
  for (std::size_t k = 0; k < fft.size(); ++k) spec[k] = fhat(fft.frequency().point(k));
  Signal s = Signal::zeros(fft.spatial());
  fft.inverse(spec, s.values);
  return s;
}

inline std::vector<Vec> guarded_points(const Grid& g, const BandMask& m, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (m.guarded(g.point(k))) idx.push_back(k);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  if (idx.size() > n) idx.resize(n);
  std::vector<Vec> out;
  for (std::size_t k : idx) out.push_back(g.point(k));
  return out;
}

}  // namespace calwav::testing
