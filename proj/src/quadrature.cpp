#include <cmath>
#include <numbers>

#include "calwav/group.hpp"

namespace calwav {

double QuadratureRule::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

nlohmann::json QuadratureRule::descriptor() const {
  return {{"truncation", truncation.to_json()}, {"resolution", resolution}, {"nodes", nodes.size()}};
}

QuadratureRule build_quadrature(const GroupModel& g, std::span<const int> resolution, const ChartBox& truncation) {
  if (g.discrete) throw Error("discrete group " + g.name + " has no chart quadrature");
  if (static_cast<int>(resolution.size()) != g.k) throw Error("resolution needs one count per chart axis");
  if (static_cast<int>(truncation.lo.size()) != g.k || static_cast<int>(truncation.hi.size()) != g.k)
    throw Error("truncation box dimension mismatch");

  std::vector<Vec> axis_nodes(g.k);
  std::vector<double> axis_width(g.k);
  QuadratureRule q;
  q.truncation = truncation;
  q.resolution.assign(resolution.begin(), resolution.end());

  for (int i = 0; i < g.k; ++i) {
    const int n = resolution[i];
    switch (g.axes[i].kind) {
      case AxisKind::Scale:
      case AxisKind::Linear: {
        const double lo = truncation.lo[i], hi = truncation.hi[i];
        if (!(hi > lo)) throw Error("empty truncation box");
        if (n < 2) throw Error("need at least 2 nodes per noncompact axis");
        const double h = (hi - lo) / n;
        for (int j = 0; j < n; ++j) axis_nodes[i].push_back(lo + (j + 0.5) * h);
        axis_width[i] = h;
        break;
      }
      case AxisKind::Angle: {
        if (n < 1) throw Error("need at least 1 node per circle axis");
        const double h = 2.0 * std::numbers::pi / n;
        for (int j = 0; j < n; ++j) axis_nodes[i].push_back(j * h);
        axis_width[i] = h;
        q.truncation.lo[i] = 0.0;
        q.truncation.hi[i] = 2.0 * std::numbers::pi;
        break;
      }
      case AxisKind::Sign:
        axis_nodes[i] = {1.0, -1.0};
        axis_width[i] = 1.0;
        q.truncation.lo[i] = -1.0;
        q.truncation.hi[i] = 1.0;
        q.resolution[i] = 2;
        break;
    }
  }

  std::size_t total = 1;
  for (const auto& a : axis_nodes) total *= a.size();
  q.nodes.reserve(total);
  q.weights.reserve(total);
  Vec c(g.k);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t r = flat;
    double cell = 1.0;
    for (int i = g.k - 1; i >= 0; --i) {
      const std::size_t n = axis_nodes[i].size();
      c[i] = axis_nodes[i][r % n];
      r /= n;
      cell *= axis_width[i];
    }
    const double w = g.haar_density(c) * cell;
    if (!(w > 0.0) || !std::isfinite(w)) throw Error("non-positive quadrature weight");
    q.nodes.push_back(c);
    q.weights.push_back(w);
    GroupElement e = g.element(c);
    q.delta.push_back(g.dilation_modulus(e));
    q.modular.push_back(g.modular_H(e));
    q.elements.push_back(std::move(e));
  }
  return q;
}

QuadratureRule extended_quadrature(const GroupModel& g, const QuadratureRule& q, double factor) {
  ChartBox box = q.truncation;
  std::vector<int> res = q.resolution;
  for (int i = 0; i < g.k; ++i) {
    if (g.axes[i].kind != AxisKind::Scale && g.axes[i].kind != AxisKind::Linear) continue;
    const double c = 0.5 * (box.lo[i] + box.hi[i]);
    const double w = 0.5 * (box.hi[i] - box.lo[i]);
    box.lo[i] = c - factor * w;
    box.hi[i] = c + factor * w;
    res[i] = static_cast<int>(std::lround(res[i] * factor));
  }
  return build_quadrature(g, res, box);
}

}  // namespace calwav
