#include "calwav/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "simd/interp_scalar.hpp"

namespace calwav {

using nlohmann::json;

std::size_t Grid::size() const {
  std::size_t n = shape.empty() ? 0 : 1;
  for (long s : shape) n *= static_cast<std::size_t>(s);
  return n;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (double s : spacing) v *= s;
  return v;
}

std::vector<long> Grid::unflatten(std::size_t flat) const {
  std::vector<long> idx(shape.size());
  for (int a = d() - 1; a >= 0; --a) {
    idx[a] = static_cast<long>(flat % static_cast<std::size_t>(shape[a]));
    flat /= static_cast<std::size_t>(shape[a]);
  }
  return idx;
}

std::size_t Grid::flatten(std::span<const long> idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < d(); ++a) flat = flat * static_cast<std::size_t>(shape[a]) + static_cast<std::size_t>(idx[a]);
  return flat;
}

Vec Grid::point(std::size_t flat) const {
  Vec x(shape.size());
  for (int a = d() - 1; a >= 0; --a) {
    const auto n = static_cast<std::size_t>(shape[a]);
    x[a] = origin[a] + static_cast<double>(flat % n) * spacing[a];
    flat /= n;
  }
  return x;
}

Vec Grid::upper() const {
  Vec u(shape.size());
  for (int a = 0; a < d(); ++a) u[a] = origin[a] + static_cast<double>(shape[a] - 1) * spacing[a];
  return u;
}

bool Grid::in_box(std::span<const double> x) const {
  for (int a = 0; a < d(); ++a) {
    const double u = (x[a] - origin[a]) / spacing[a];
    if (!(u >= 0.0) || u > static_cast<double>(shape[a] - 1)) return false;
  }
  return true;
}

double Grid::max_spacing() const { return spacing.empty() ? 0.0 : *std::max_element(spacing.begin(), spacing.end()); }

json Grid::to_json() const { return {{"shape", shape}, {"spacing", spacing}, {"origin", origin}}; }

Grid Grid::from_json(const json& j) {
  Grid g;
  g.shape = j.at("shape").get<std::vector<long>>();
  g.spacing = j.at("spacing").get<Vec>();
  g.origin = j.at("origin").get<Vec>();
  if (g.spacing.size() != g.shape.size() || g.origin.size() != g.shape.size())
    throw Error("grid shape, spacing and origin must have equal length");
  for (std::size_t a = 0; a < g.shape.size(); ++a) {
    if (g.shape[a] < 2) throw Error("grid shape entries must be >= 2");
    if (!(g.spacing[a] > 0.0)) throw Error("grid spacing must be positive");
  }
  return g;
}

Grid Grid::centered(std::span<const long> shape, std::span<const double> half_extent) {
  if (shape.size() != half_extent.size()) throw Error("shape and extent length mismatch");
  Grid g;
  for (std::size_t a = 0; a < shape.size(); ++a) {
    if (shape[a] < 2) throw Error("grid shape entries must be >= 2");
    if (!(half_extent[a] > 0.0)) throw Error("grid extent must be positive");
    g.shape.push_back(shape[a]);
    g.spacing.push_back(2.0 * half_extent[a] / static_cast<double>(shape[a]));
    g.origin.push_back(-half_extent[a]);
  }
  return g;
}

Grid Grid::fft_dual(const Grid& s) {
  Grid f;
  f.shape = s.shape;
  for (int a = 0; a < s.d(); ++a) {
    const double dxi = 1.0 / (static_cast<double>(s.shape[a]) * s.spacing[a]);
    f.spacing.push_back(dxi);
    f.origin.push_back(-static_cast<double>(s.shape[a] / 2) * dxi);
  }
  return f;
}

Grid Grid::fft_dual_spatial(const Grid& f) {
  Grid s;
  s.shape = f.shape;
  for (int a = 0; a < f.d(); ++a) {
    const double dx = 1.0 / (static_cast<double>(f.shape[a]) * f.spacing[a]);
    s.spacing.push_back(dx);
    s.origin.push_back(-static_cast<double>(f.shape[a] / 2) * dx);
  }
  return s;
}

// ---------------------------------------------------------------- masks

namespace {

double sq_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

bool BandMask::contains(std::span<const double> xi) const {
  using simd::MaskKind;
  const double x = xi[0];
  const double y = d >= 2 ? xi[1] : 0.0;
  switch (p.kind) {
    case MaskKind::Full: return sq_norm(xi) > 0.0;
    case MaskKind::Annulus: {
      const double r2 = sq_norm(xi);
      return r2 >= p.a * p.a && r2 <= p.b * p.b;
    }
    case MaskKind::HalfPlane: return x != 0.0;
    case MaskKind::Strip: return x > p.a && x < p.b;
    case MaskKind::Quadrant:
      for (int i = 0; i < d; ++i)
        if (signs[i] != 0.0 && !(signs[i] * xi[i] > 0.0)) return false;
      return true;
    case MaskKind::Cone: return std::abs(y) < p.a * std::abs(x);
  }
  return false;
}

double BandMask::boundary_distance(std::span<const double> xi) const {
  using simd::MaskKind;
  const double r = std::sqrt(sq_norm(xi));
  const double x = xi[0];
  const double y = d >= 2 ? xi[1] : 0.0;
  switch (p.kind) {
    case MaskKind::Full: return r;
    case MaskKind::Annulus: return std::min({r, std::abs(r - p.a), std::abs(r - p.b)});
    case MaskKind::HalfPlane: return std::abs(x);
    case MaskKind::Strip: {
      double dist = std::abs(x - p.a);
      if (std::isfinite(p.b)) dist = std::min(dist, std::abs(x - p.b));
      return dist;
    }
    case MaskKind::Quadrant: {
      double dist = std::numeric_limits<double>::infinity();
      for (int i = 0; i < d; ++i)
        if (signs[i] != 0.0) dist = std::min(dist, std::abs(xi[i]));
      return dist;
    }
    case MaskKind::Cone: return std::min(r, std::abs(std::abs(y) - p.a * std::abs(x)) / std::sqrt(1.0 + p.a * p.a));
  }
  return 0.0;
}

bool BandMask::guarded(std::span<const double> xi) const {
  return contains(xi) && boundary_distance(xi) > null_guard;
}

std::string BandMask::descriptor() const {
  std::ostringstream os;
  os << name;
  if (!params.empty()) os << params.dump();
  os << " guard=" << null_guard;
  return os.str();
}

json BandMask::to_json() const {
  return {{"name", name}, {"params", params}, {"null_guard", null_guard}, {"d", d}};
}

simd::MaskParams BandMask::kernel_params() const {
  simd::MaskParams k = p;
  if (p.kind == simd::MaskKind::Quadrant) {
    k.s1 = signs.empty() ? 0.0 : signs[0];
    k.s2 = signs.size() > 1 ? signs[1] : 0.0;
  }
  return k;
}

std::vector<std::string> mask_names() { return {"full", "annulus", "halfplane", "strip", "halfplane_strip", "quadrant", "cone"}; }

BandMask mask_catalog(const std::string& name, const json& params, int d) {
  using simd::MaskKind;
  if (d < 1) throw Error("mask dimension must be >= 1");
  const json P = params.is_object() ? params : json::object();
  BandMask m;
  m.d = d;
  m.name = name;
  m.params = P;
  m.null_guard = P.value("null_guard", -1.0);
  m.params.erase("null_guard");
  if (name == "full") {
    m.p.kind = MaskKind::Full;
  } else if (name == "annulus") {
    m.p.kind = MaskKind::Annulus;
    m.p.a = P.value("r1", 1.0);
    m.p.b = P.value("r2", 2.0);
    if (!(m.p.a >= 0.0) || !(m.p.b > m.p.a)) throw Error("annulus needs 0 <= r1 < r2");
    m.params = {{"r1", m.p.a}, {"r2", m.p.b}};
  } else if (name == "halfplane") {
    m.p.kind = MaskKind::HalfPlane;
  } else if (name == "strip" || name == "halfplane_strip") {
    m.p.kind = MaskKind::Strip;
    m.p.a = P.value("lo", name == "strip" ? 1.0 : 0.0);
    m.p.b = P.value("hi", name == "strip" ? 2.0 : std::numeric_limits<double>::infinity());
    if (!(m.p.b > m.p.a)) throw Error("strip needs lo < hi");
    m.params = {{"lo", m.p.a}};
    if (std::isfinite(m.p.b)) m.params["hi"] = m.p.b;
  } else if (name == "quadrant") {
    m.p.kind = MaskKind::Quadrant;
    const std::string s = P.value("signs", std::string(static_cast<std::size_t>(d), '+'));
    if (static_cast<int>(s.size()) != d) throw Error("quadrant signs must have one character per axis");
    for (char c : s) {
      if (c == '+') m.signs.push_back(1.0);
      else if (c == '-') m.signs.push_back(-1.0);
      else if (c == '*') m.signs.push_back(0.0);
      else throw Error("quadrant signs use '+', '-' or '*'");
    }
    m.params = {{"signs", s}};
  } else if (name == "cone") {
    if (d != 2) throw Error("cone mask is two-dimensional");
    m.p.kind = MaskKind::Cone;
    m.p.a = P.value("slope", 1.0);
    if (!(m.p.a > 0.0)) throw Error("cone slope must be positive");
    m.params = {{"slope", m.p.a}};
  } else {
    throw Error("unknown mask '" + name + "'");
  }
  if (d > 2 && m.p.kind != MaskKind::Full && m.p.kind != MaskKind::Quadrant && m.p.kind != MaskKind::HalfPlane &&
      m.p.kind != MaskKind::Strip && m.p.kind != MaskKind::Annulus)
    throw Error("mask '" + name + "' is not available in dimension " + std::to_string(d));
  return m;
}

BandMask mask_from_json(const json& j, int d) {
  if (j.is_string()) return mask_catalog(j.get<std::string>(), json::object(), d);
  json params = j.value("params", json::object());
  if (j.contains("null_guard")) params["null_guard"] = j.at("null_guard");
  return mask_catalog(j.at("name").get<std::string>(), params, d);
}

void with_default_guard(BandMask& m, const Grid& grid) {
  if (!(m.null_guard >= 0.0)) m.null_guard = 2.0 * grid.max_spacing();
}

// ------------------------------------------------------ spectral functions

SpectralFunction::SpectralFunction(Grid g, BandMask m) : grid(std::move(g)), values(grid.size()), mask(std::move(m)) {
  if (mask.d != grid.d()) throw Error("mask and grid dimensions differ");
  for (long s : grid.shape)
    if (s < 2) throw Error("grid shape entries must be >= 2");
  with_default_guard(mask, grid);
}

SpectralFunction SpectralFunction::sample(const Grid& g, const BandMask& m,
                                          const std::function<cplx(std::span<const double>)>& fn) {
  SpectralFunction f(g, m);
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const Vec x = g.point(k);
    f.values[k] = f.mask.contains(x) ? fn(x) : cplx(0.0);
  }
  return f;
}

cplx SpectralFunction::evaluate(std::span<const double> xi) const {
  const int d = grid.d();
  if (!mask.contains(xi)) return 0.0;
  std::vector<long> base(d);
  Vec frac(d);
  for (int a = 0; a < d; ++a) {
    if (!simd::detail::axis_locate((xi[a] - grid.origin[a]) * (1.0 / grid.spacing[a]), grid.shape[a], base[a], frac[a]))
      return 0.0;
  }
  cplx num = 0.0;
  double wsum = 0.0;
  std::vector<long> idx(d);
  Vec corner(d);
  for (unsigned c = 0; c < (1u << d); ++c) {
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      const bool up = (c >> (d - 1 - a)) & 1u;
      idx[a] = base[a] + (up ? 1 : 0);
      w *= up ? frac[a] : 1.0 - frac[a];
      corner[a] = grid.origin[a] + static_cast<double>(idx[a]) * grid.spacing[a];
    }
    if (w == 0.0 || !mask.contains(corner)) continue;
    wsum += w;
    num += w * values[grid.flatten(idx)];
  }
  if (wsum <= 1e-12) return 0.0;
  return num / wsum;
}

double SpectralFunction::l2_norm_sq() const {
  double s = 0.0;
  for (const cplx& v : values) s += std::norm(v);
  return s * grid.cell_volume();
}

double SpectralFunction::l2_norm() const { return std::sqrt(l2_norm_sq()); }

double SpectralFunction::l1_norm() const {
  double s = 0.0;
  for (const cplx& v : values) s += std::abs(v);
  return s * grid.cell_volume();
}

double SpectralFunction::max_abs() const {
  double m = 0.0;
  for (const cplx& v : values) m = std::max(m, std::abs(v));
  return m;
}

double l2_norm(const SpectralFunction& f) { return f.l2_norm(); }

cplx evaluate_offgrid(const SpectralFunction& f, std::span<const double> xi) { return f.evaluate(xi); }

// ----------------------------------------------------------- kernel views

InterpTable::InterpTable(const SpectralFunction& f) {
  const int d = f.grid.d();
  if (d != 1 && d != 2) throw Error("kernel tables support d = 1 or 2");
  const std::size_t n = f.values.size();
  re_.resize(n);
  im_.resize(n);
  flag_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    flag_[k] = f.mask.contains(f.grid.point(k)) ? 1.0 : 0.0;
    re_[k] = flag_[k] * f.values[k].real();
    im_[k] = flag_[k] * f.values[k].imag();
  }
  t_.d = d;
  t_.n0 = f.grid.shape[0];
  t_.n1 = d == 2 ? f.grid.shape[1] : 1;
  t_.o0 = f.grid.origin[0];
  t_.o1 = d == 2 ? f.grid.origin[1] : 0.0;
  t_.inv_s0 = 1.0 / f.grid.spacing[0];
  t_.inv_s1 = d == 2 ? 1.0 / f.grid.spacing[1] : 1.0;
  t_.re = re_.data();
  t_.im = im_.data();
  t_.flag = flag_.data();
  t_.mask = f.mask.kernel_params();
}

cplx InterpTable::operator()(double x, double y) const {
  double re, im;
  simd::detail::interp(t_, x, y, re, im);
  return {re, im};
}

NodeTable::NodeTable(const QuadratureRule& q) : NodeTable(q, q.weights) {}

NodeTable::NodeTable(const QuadratureRule& q, std::span<const double> weights) {
  const std::size_t n = q.size();
  if (weights.size() != n) throw Error("node weight count mismatch");
  m00_.assign(n, 0.0);
  m01_.assign(n, 0.0);
  m10_.assign(n, 0.0);
  m11_.assign(n, 0.0);
  w_.assign(weights.begin(), weights.end());
  for (std::size_t i = 0; i < n; ++i) {
    const Mat& h = q.elements[i].matrix;
    if (h.rows > 2) throw Error("kernel node tables support d = 1 or 2");
    m00_[i] = h(0, 0);
    if (h.rows == 2) {
      m01_[i] = h(1, 0);
      m10_[i] = h(0, 1);
      m11_[i] = h(1, 1);
    }
  }
  n_ = {m00_.data(), m01_.data(), m10_.data(), m11_.data(), w_.data(), n};
}

// ------------------------------------------------------ invariance check

json InvarianceCheck::to_json() const {
  json ex = json::array();
  for (const auto& [a, b] : examples) ex.push_back({{"xi", a}, {"xi_h", b}});
  return {{"checked", checked}, {"violations", violations}, {"agreement", agreement}, {"passed", passed()},
          {"examples", ex}};
}

InvarianceCheck check_mask_invariance(const GroupModel& g, const BandMask& m, const Grid& grid, const QuadratureRule& q,
                                      std::size_t samples, std::mt19937_64& rng) {
  InvarianceCheck r;
  if (q.size() == 0 || grid.size() == 0) return r;
  std::uniform_int_distribution<std::size_t> pick_point(0, grid.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_node(0, q.size() - 1);
  const std::size_t max_attempts = 200 * samples + 1000;
  for (std::size_t attempt = 0; attempt < max_attempts && r.checked < samples; ++attempt) {
    const Vec xi = grid.point(pick_point(rng));
    const bool inside = m.contains(xi);
    if (inside && !m.guarded(xi)) continue;
    if (!inside && m.boundary_distance(xi) <= m.null_guard) continue;
    const Vec xh = dual_action(g, xi, q.elements[pick_node(rng)]);
    if (!grid.in_box(xh)) continue;
    if (m.boundary_distance(xh) <= 0.5 * m.null_guard) continue;
    ++r.checked;
    if (m.contains(xh) != inside) {
      ++r.violations;
      if (r.examples.size() < 10) r.examples.emplace_back(xi, xh);
    }
  }
  r.agreement = r.checked ? 1.0 - static_cast<double>(r.violations) / static_cast<double>(r.checked) : 1.0;
  return r;
}

}  // namespace calwav
