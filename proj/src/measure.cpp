#include "calwav/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include "calwav/calderon.hpp"

namespace calwav {

using nlohmann::json;

json PseudoImage::to_json() const {
  json b = json::array();
  for (const auto& bin : bins) b.push_back({{"coord", bin.coord}, {"weight", bin.weight}, {"count", bin.count}});
  return {{"total", total}, {"bin_width", bin_width}, {"points", points}, {"failures", failures}, {"bins", b}};
}

namespace {

int continuous_index(const TransversalModel& t) {
  if (t.continuous_dims() > 1) throw Error("transversals with more than one continuous coordinate are not supported");
  for (int i = 0; i < t.m; ++i)
    if (t.continuous[i]) {
      if (t.continuous_dims() != t.m) throw Error("mixed discrete/continuous transversals are not supported");
      return i;
    }
  return -1;
}

}  // namespace

PseudoImage pseudo_image(const GroupModel& g, const SpectralFunction& phi, const BandMask& mask,
                         const TransversalModel& t) {
  const Grid& grid = phi.grid;
  const int ci = continuous_index(t);
  PseudoImage out;
  out.bin_width = ci >= 0 ? grid.max_spacing() : 0.0;
  const double vol = grid.cell_volume();
  std::map<Vec, PseudoBin> discrete;
  std::map<long, PseudoBin> continuous;
  double u0 = ci >= 0 && std::isfinite(t.domain.lo[ci]) ? t.domain.lo[ci] : 0.0;
  (void)g;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec x = grid.point(k);
    if (!mask.contains(x)) continue;
    ++out.points;
    Vec c;
    try {
      c = t.split(x).coords;
    } catch (const Error&) {
      ++out.failures;
      continue;
    }
    const double w = std::abs(phi.values[k]) * vol;
    out.total += w;
    if (ci < 0) {
      auto& b = discrete[c];
      b.coord = c;
      b.weight += w;
      ++b.count;
    } else {
      const long j = static_cast<long>(std::floor((c[ci] - u0) / out.bin_width));
      auto& b = continuous[j];
      b.coord = {u0 + (static_cast<double>(j) + 0.5) * out.bin_width};
      b.weight += w;
      ++b.count;
    }
  }
  if (out.points > 0 && static_cast<double>(out.failures) > 0.01 * static_cast<double>(out.points))
    throw Error("transversal inverse failed at more than 1% of masked points");
  for (auto& [key, b] : discrete) out.bins.push_back(b);
  for (auto& [key, b] : continuous) out.bins.push_back(b);
  return out;
}

double transversal_jacobian(const GroupModel& g, const TransversalModel& t, std::span<const double> u,
                            std::span<const double> c, double du, double dc) {
  const int d = g.d;
  std::vector<int> uvars, cvars;
  for (int i = 0; i < t.m; ++i)
    if (t.continuous[i]) uvars.push_back(i);
  for (int i = 0; i < g.k; ++i)
    if (g.axes[i].kind != AxisKind::Sign) cvars.push_back(i);
  if (static_cast<int>(uvars.size() + cvars.size()) != d)
    throw Error("transversal and group dimensions do not add up to d");

  auto F = [&](const Vec& uu, const Vec& cc) { return g.chart(cc).transpose().apply(t.param(uu)); };
  Mat J(d, d);
  int col = 0;
  Vec uu(u.begin(), u.end()), cc(c.begin(), c.end());
  for (int i : uvars) {
    Vec up = uu, dn = uu;
    up[i] += du;
    dn[i] -= du;
    const Vec a = F(up, cc), b = F(dn, cc);
    for (int r = 0; r < d; ++r) J(r, col) = (a[r] - b[r]) / (2.0 * du);
    ++col;
  }
  for (int i : cvars) {
    Vec up = cc, dn = cc;
    up[i] += dc;
    dn[i] -= dc;
    const Vec a = F(uu, up), b = F(uu, dn);
    for (int r = 0; r < d; ++r) J(r, col) = (a[r] - b[r]) / (2.0 * dc);
    ++col;
  }
  return std::abs(J.det());
}

double kappa_estimate(const GroupModel& g, const TransversalModel& t, std::span<const double> xi, double spacing) {
  const TransversalSplit s = t.split(xi);
  const double r = std::max(norm(xi), spacing);
  // Box of 4 spacings around xi: +-2 spacings in frequency units, mapped
  // to chart units through |xi|.
  const double du = 2.0 * spacing;
  const double dc = 2.0 * spacing / r;
  const double jac = transversal_jacobian(g, t, s.coords, s.h.coords, du, dc);
  const double haar = g.haar_density(s.h.coords);
  if (!(jac > 0.0) || !(haar > 0.0)) throw Error("mu-mass below floor");
  return jac / haar;
}

json Disintegration::to_json() const {
  return {{"transversal", transversal.to_json()},
          {"total_orbit_mass", orbit_weight.total},
          {"bins", orbit_weight.to_json()["bins"]},
          {"spacing", spacing},
          {"integration_coords", coords.size()},
          {"du", du}};
}

Disintegration make_disintegration(const GroupModel& g, const TransversalModel& t, const SpectralFunction& phi,
                                   const BandMask& mask) {
  Disintegration dis;
  dis.transversal = t;
  dis.spacing = phi.grid.max_spacing();
  dis.orbit_weight = pseudo_image(g, phi, mask, t);
  const int ci = continuous_index(t);
  if (ci < 0) {
    dis.coords = t.m == 0 ? std::vector<Vec>{Vec{}} : t.discrete_values;
    dis.du = 1.0;
    return dis;
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < phi.grid.size(); ++k) {
    const Vec x = phi.grid.point(k);
    if (!mask.contains(x)) continue;
    try {
      const double u = t.split(x).coords[ci];
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    } catch (const Error&) {
    }
  }
  if (!(hi > lo)) throw Error("transversal coordinate range is empty on this grid");
  lo = std::max(lo, t.domain.lo[ci]);
  hi = std::min(hi, t.domain.hi[ci]);
  const long n = std::max<long>(1, static_cast<long>(std::ceil((hi - lo) / dis.spacing)));
  dis.du = (hi - lo) / static_cast<double>(n);
  for (long j = 0; j < n; ++j) dis.coords.push_back({lo + (static_cast<double>(j) + 0.5) * dis.du});
  return dis;
}

IdentityCheck verify_disintegration(const GroupModel& g, const Disintegration& dis, const SpectralFunction& f,
                                    const BandMask& mask, const QuadratureRule& q) {
  IdentityCheck r;
  const Grid& grid = f.grid;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (mask.contains(grid.point(k))) r.lhs += f.values[k].real();
  r.lhs *= grid.cell_volume();

  const TransversalModel& t = dis.transversal;
  std::unique_ptr<InterpTable> table;
  if (g.d <= 2) table = std::make_unique<InterpTable>(f);
  const double step = 1e-6;
  double rhs = 0.0;
  for (const Vec& u : dis.coords) {
    const Vec base = t.param(u);
    double inner = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const Vec x = dual_action(g, base, q.elements[i]);
      if (!mask.contains(x)) continue;
      const double fv = table ? (*table)(x[0], g.d == 2 ? x[1] : 0.0).real() : f.evaluate(x).real();
      if (fv == 0.0) continue;
      const double jac = transversal_jacobian(g, t, u, q.nodes[i], step, step);
      inner += q.weights[i] / g.haar_density(q.nodes[i]) * jac * fv;
    }
    rhs += dis.du * inner;
  }
  r.rhs = rhs;
  r.rel_err = r.lhs != 0.0 ? std::abs(r.rhs - r.lhs) / std::abs(r.lhs) : std::abs(r.rhs);
  return r;
}

IdentityCheck phi_decomposition_identity(const GroupModel& g, const SpectralFunction& phi, const SpectralFunction& f,
                                         const QuadratureRule& q) {
  if (!(phi.grid == f.grid)) throw Error("phi and f must share a grid");
  const Grid& grid = f.grid;
  IdentityCheck r;
  for (const cplx& v : f.values) r.lhs += v.real();
  r.lhs *= grid.cell_volume();

  std::vector<Vec> support;
  std::vector<std::size_t> where;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (phi.values[k].real() > 0.0) {
      support.push_back(grid.point(k));
      where.push_back(k);
    }
  if (support.empty()) {
    r.rel_err = r.lhs != 0.0 ? 1.0 : 0.0;
    return r;
  }
  const std::vector<double> Phi = orbit_field(g, phi, support, q, simd::Accum::Real);
  std::vector<double> w(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) w[i] = q.weights[i] * q.delta[i] / q.modular[i];
  QuadratureRule weighted = q;
  weighted.weights = w;
  const std::vector<double> inner = orbit_field(g, f, support, weighted, simd::Accum::Real);
  double rhs = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (Phi[i] < 1e-12) throw Error("Phi-floor violation");
    rhs += phi.values[where[i]].real() / Phi[i] * inner[i];
  }
  r.rhs = rhs * grid.cell_volume();
  r.rel_err = r.lhs != 0.0 ? std::abs(r.rhs - r.lhs) / std::abs(r.lhs) : std::abs(r.rhs);
  return r;
}

json OrbitSpaceMass::to_json() const {
  return {{"mass", infinite ? json("inf") : json(mass)}, {"finite_estimate", mass}, {"infinite", infinite}, {"trace", trace}};
}

Grid enlarge_grid(const Grid& grid, double factor) {
  Grid out = grid;
  for (int a = 0; a < grid.d(); ++a) {
    out.shape[a] = static_cast<long>(std::lround(static_cast<double>(grid.shape[a]) * factor));
    const double centre = grid.origin[a] + 0.5 * static_cast<double>(grid.shape[a]) * grid.spacing[a];
    out.origin[a] = centre - 0.5 * static_cast<double>(out.shape[a]) * grid.spacing[a];
  }
  return out;
}

OrbitSpaceMass orbit_space_mass(const GroupModel& g, const SpectralFunction& phi,
                                const std::function<SpectralFunction(const Grid&)>& rebuild, double factor) {
  if (!g.unimodular()) throw Error("criterion not applicable");
  OrbitSpaceMass r;
  r.mass = phi.l2_norm_sq();
  r.trace.push_back({{"shape", phi.grid.shape}, {"upper", phi.grid.upper()}, {"mass", r.mass}});
  if (rebuild) {
    const Grid big = enlarge_grid(phi.grid, factor);
    const SpectralFunction phi2 = rebuild(big);
    const double m2 = phi2.l2_norm_sq();
    r.trace.push_back({{"shape", big.shape}, {"upper", big.upper()}, {"mass", m2}});
    const double change = std::abs(m2 - r.mass) / std::max(r.mass, 1e-300);
    r.infinite = change > 0.5;
  }
  return r;
}

}  // namespace calwav
