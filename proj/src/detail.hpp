#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>

#include "calwav/group.hpp"

namespace calwav::detail {

/// h^T packed as [m00, m01, m10, m11] for the 2D kernels (1D uses m00).
inline std::array<double, 4> dual4(const Mat& h) {
  if (h.rows == 1) return {h(0, 0), 0.0, 0.0, 0.0};
  return {h(0, 0), h(1, 0), h(0, 1), h(1, 1)};
}

/// Chart distance from the identity. Circle axes use the wrapped gap and a
/// flipped sign counts as distance 2.
inline double chart_norm(const GroupModel& g, std::span<const double> c) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double s = 0.0;
  for (int i = 0; i < g.k; ++i) {
    double dv = c[i] - g.id_coords[i];
    switch (g.axes[i].kind) {
      case AxisKind::Angle: {
        dv = std::fmod(std::abs(dv), two_pi);
        dv = std::min(dv, two_pi - dv);
        break;
      }
      case AxisKind::Sign: dv = c[i] == g.id_coords[i] ? 0.0 : 2.0; break;
      default: break;
    }
    s += dv * dv;
  }
  return std::sqrt(s);
}

}  // namespace calwav::detail
