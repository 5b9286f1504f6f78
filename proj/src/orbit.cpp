#include "calwav/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "calwav/simd/kernels.hpp"

namespace calwav {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_angle(double t) {
  double r = std::fmod(t, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r;
}

double angle_gap(double a, double b) {
  const double r = std::abs(wrap_angle(a - b));
  return std::min(r, kTwoPi - r);
}

double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

std::vector<Vec> directions(int m) {
  std::vector<Vec> dirs;
  if (m == 1) return {{1.0}, {-1.0}};
  if (m == 2) {
    for (int j = 0; j < 24; ++j) dirs.push_back({std::cos(kTwoPi * j / 24), std::sin(kTwoPi * j / 24)});
    return dirs;
  }
  for (int i = 0; i < m; ++i)
    for (double s : {1.0, -1.0}) {
      Vec e(m, 0.0);
      e[i] = s;
      dirs.push_back(e);
    }
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  while (dirs.size() < 48) {
    Vec v(m);
    for (double& x : v) x = n(rng);
    const double len = norm(v);
    for (double& x : v) x /= len;
    dirs.push_back(v);
  }
  return dirs;
}

}  // namespace

json EpsilonProbe::to_json() const {
  return {{"bounded", bounded},
          {"infinite", infinite},
          {"bounding_radius", infinite ? json("inf") : json(bounding_radius)},
          {"eps", eps},
          {"last_hit_shell", last_hit_shell},
          {"shell_hits", shell_hits},
          {"spread", spread}};
}

ProbeLattice::ProbeLattice(const GroupModel& g, const ChartBox& box, int shells, double factor)
    : g_(&g), shells_(shells) {
  if (g.discrete) throw Error("epsilon-stabilizer probe needs a chart; " + g.name + " is discrete");
  if (shells < 2 || !(factor > 1.0)) throw Error("probe needs >= 2 shells and growth factor > 1");
  if (static_cast<int>(box.lo.size()) != g.k || static_cast<int>(box.hi.size()) != g.k)
    throw Error("search box dimension mismatch");

  std::vector<int> nc, ang, sig;
  for (int i = 0; i < g.k; ++i) {
    switch (g.axes[i].kind) {
      case AxisKind::Scale:
      case AxisKind::Linear: nc.push_back(i); break;
      case AxisKind::Angle: ang.push_back(i); break;
      case AxisKind::Sign: sig.push_back(i); break;
    }
  }
  double R = kInf;
  for (int i : nc) R = std::min({R, box.hi[i] - g.id_coords[i], g.id_coords[i] - box.lo[i]});
  if (!nc.empty() && !(R > 0.0)) throw Error("search box must contain the identity in its interior");

  radii_.resize(shells);
  const double r0 = nc.empty() ? 0.0 : R / std::pow(factor, shells - 1);
  for (int j = 0; j < shells; ++j) radii_[j] = r0 * std::pow(factor, j);

  // Compact part: angle grid times sign choices.
  const int n_ang = ang.size() <= 1 ? 128 : 32;
  std::vector<Vec> compact(1, Vec{});
  for (std::size_t a = 0; a < ang.size(); ++a) {
    std::vector<Vec> next;
    for (const Vec& c : compact)
      for (int j = 0; j < n_ang; ++j) {
        Vec e = c;
        e.push_back(kTwoPi * j / n_ang);
        next.push_back(e);
      }
    compact = std::move(next);
  }
  for (std::size_t s = 0; s < sig.size(); ++s) {
    std::vector<Vec> next;
    for (const Vec& c : compact)
      for (double v : {1.0, -1.0}) {
        Vec e = c;
        e.push_back(v);
        next.push_back(e);
      }
    compact = std::move(next);
  }

  const std::vector<Vec> dirs = nc.empty() ? std::vector<Vec>{Vec{}} : directions(static_cast<int>(nc.size()));
  const int per_shell = 6;
  const int d = g.d;
  Vec c(g.k);
  auto push = [&](int shell, const Vec& offset, double radius, const Vec& comp) {
    c = g.id_coords;
    for (std::size_t i = 0; i < nc.size(); ++i) c[nc[i]] += radius * offset[i];
    double dist2 = radius * radius;
    std::size_t p = 0;
    for (int i : ang) {
      c[i] = comp[p++];
      const double gap = angle_gap(c[i], g.id_coords[i]);
      dist2 += gap * gap;
    }
    for (int i : sig) {
      c[i] = comp[p++];
      if (c[i] != g.id_coords[i]) dist2 += 4.0;
    }
    const Mat m = g.chart(c);
    if (std::abs(m.det()) <= 1e-12) return;
    for (int r = 0; r < d; ++r)
      for (int q = 0; q < d; ++q) dual_.push_back(m(q, r));
    shell_of_.push_back(shell);
    chart_dist_.push_back(std::sqrt(dist2));
  };

  if (nc.empty()) {
    for (const Vec& comp : compact) push(0, Vec{}, 0.0, comp);
    return;
  }
  for (int j = 0; j < shells; ++j) {
    const double inner = j == 0 ? 0.0 : radii_[j - 1];
    const double outer = radii_[j];
    for (int s = 0; s < per_shell; ++s) {
      const double radius = j == 0 ? outer * s / (per_shell - 1) : inner + (outer - inner) * (s + 1) / per_shell;
      for (const Vec& dir : dirs) {
        for (const Vec& comp : compact) push(j, dir, radius, comp);
        if (radius == 0.0) break;
      }
    }
  }
}

EpsilonProbe ProbeLattice::probe(std::span<const double> xi, double eps) const {
  const int d = g_->d;
  if (static_cast<int>(xi.size()) != d) throw Error("frequency dimension mismatch");
  if (!(eps > 0.0)) throw Error("eps must be positive");
  EpsilonProbe p;
  p.eps = eps;
  p.shell_hits.assign(shells_, 0);
  const double eps2 = eps * eps;
  const std::size_t n = shell_of_.size();
  Vec out(d);
  for (std::size_t k = 0; k < n; ++k) {
    const double* m = &dual_[k * d * d];
    double dist2 = 0.0;
    for (int r = 0; r < d; ++r) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += m[r * d + c] * xi[c];
      const double diff = s - xi[r];
      dist2 += diff * diff;
    }
    if (dist2 < eps2) {
      ++p.shell_hits[shell_of_[k]];
      p.last_hit_shell = std::max(p.last_hit_shell, shell_of_[k]);
      p.spread = std::max(p.spread, chart_dist_[k]);
    }
  }
  p.infinite = p.last_hit_shell == shells_ - 1;
  p.bounded = p.last_hit_shell >= 0 && !p.infinite;
  p.bounding_radius = p.last_hit_shell >= 0 ? radii_[p.last_hit_shell] : 0.0;
  return p;
}

EpsilonProbe probe_epsilon_stabilizer(const GroupModel& g, std::span<const double> xi, double eps,
                                      const ChartBox& search_box, int shells, double factor) {
  return ProbeLattice(g, search_box, shells, factor).probe(xi, eps);
}

std::string to_string(StabilizerClass c) {
  switch (c) {
    case StabilizerClass::Trivial: return "trivial";
    case StabilizerClass::CompactNontrivial: return "compact_nontrivial";
    case StabilizerClass::Noncompact: return "noncompact";
    case StabilizerClass::Undetermined: return "undetermined";
  }
  return "undetermined";
}

StabilizerClass classify_stabilizer(const ProbeLattice& lattice, std::span<const double> xi, double eps,
                                    EpsilonProbe* at_eps) {
  const EpsilonProbe p1 = lattice.probe(xi, eps);
  if (at_eps) *at_eps = p1;
  if (p1.last_hit_shell < 0) return StabilizerClass::Undetermined;
  if (!p1.bounded) return StabilizerClass::Noncompact;
  if (p1.spread == 0.0) return StabilizerClass::Trivial;
  const EpsilonProbe p2 = lattice.probe(xi, 0.1 * eps);
  return p2.spread <= 0.5 * p1.spread ? StabilizerClass::Trivial : StabilizerClass::CompactNontrivial;
}

// ------------------------------------------------------------ transversals

int TransversalModel::continuous_dims() const {
  return static_cast<int>(std::count(continuous.begin(), continuous.end(), true));
}

json TransversalModel::to_json() const {
  json dom = json::array();
  for (int i = 0; i < m; ++i) {
    auto b = [](double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf"); };
    dom.push_back({{"lo", b(domain.lo[i])}, {"hi", b(domain.hi[i])}, {"continuous", static_cast<bool>(continuous[i])}});
  }
  return {{"description", description}, {"m", m}, {"domain", dom}, {"discrete_values", discrete_values}};
}

namespace {

[[noreturn]] void no_transversal() { throw Error("no closed-form transversal; orbit space may be non-regular"); }

void require_nonzero(double v, const char* what) {
  if (v == 0.0 || !std::isfinite(v)) throw Error(std::string("point lies on the singular set (") + what + ")");
}

// Sign vectors allowed by a mask on a product of half-lines.
std::vector<Vec> allowed_signs(const BandMask& mask, int d) {
  std::vector<Vec> out;
  for (int p = 0; p < (1 << d); ++p) {
    Vec s(d);
    bool ok = true;
    for (int i = 0; i < d; ++i) {
      s[i] = (p >> (d - 1 - i)) & 1 ? -1.0 : 1.0;
      if (mask.p.kind == simd::MaskKind::Quadrant && mask.signs[i] != 0.0 && mask.signs[i] != s[i]) ok = false;
    }
    if (ok) out.push_back(s);
  }
  return out;
}

}  // namespace

TransversalModel builtin_transversal(const GroupModel& g, const BandMask& mask) {
  using simd::MaskKind;
  if (mask.d != g.d) throw Error("mask and group dimensions differ");
  const MaskKind mk = mask.p.kind;
  TransversalModel t;
  const GroupModel* gp = &g;

  if (g.name == "dilation1d_pos") {
    if (mk != MaskKind::Full && mk != MaskKind::HalfPlane && mk != MaskKind::Quadrant) no_transversal();
    t.m = 1;
    t.continuous = {false};
    t.discrete_values = allowed_signs(mask, 1);
    t.domain = {{t.discrete_values.front()[0]}, {t.discrete_values.back()[0]}};
    if (t.domain.lo[0] > t.domain.hi[0]) std::swap(t.domain.lo[0], t.domain.hi[0]);
    t.description = "C = {-1, +1} (one point per half-line)";
    t.param = [](std::span<const double> c) { return Vec{c[0]}; };
    t.split = [gp](std::span<const double> xi) {
      require_nonzero(xi[0], "xi = 0");
      return TransversalSplit{{sgn(xi[0])}, gp->element(Vec{std::log(std::abs(xi[0]))})};
    };
  } else if (g.name == "dilation1d_full") {
    if (mk != MaskKind::Full && mk != MaskKind::HalfPlane) no_transversal();
    t.m = 0;
    t.description = "C = {1} (R* acts transitively on R \\ {0})";
    t.param = [](std::span<const double>) { return Vec{1.0}; };
    t.split = [gp](std::span<const double> xi) {
      require_nonzero(xi[0], "xi = 0");
      return TransversalSplit{{}, gp->element(Vec{std::log(std::abs(xi[0])), sgn(xi[0])})};
    };
  } else if (g.name == "diag_pos") {
    if (mk != MaskKind::Quadrant) no_transversal();
    for (double s : mask.signs)
      if (s == 0.0) no_transversal();
    const int d = g.d;
    t.m = d;
    t.continuous.assign(d, false);
    t.discrete_values = {mask.signs};
    t.domain = {mask.signs, mask.signs};
    t.description = "C = {sign vector of the quadrant}";
    t.param = [](std::span<const double> c) { return Vec(c.begin(), c.end()); };
    t.split = [gp, d](std::span<const double> xi) {
      Vec s(d), tc(d);
      for (int i = 0; i < d; ++i) {
        require_nonzero(xi[i], "coordinate hyperplane");
        s[i] = sgn(xi[i]);
        tc[i] = std::log(std::abs(xi[i]));
      }
      return TransversalSplit{s, gp->element(tc)};
    };
  } else if (g.name == "similitude2") {
    if (mk != MaskKind::Full) no_transversal();
    t.m = 0;
    t.description = "C = {(1, 0)} (SIM(2) acts transitively on R^2 \\ {0})";
    t.param = [](std::span<const double>) { return Vec{1.0, 0.0}; };
    t.split = [gp](std::span<const double> xi) {
      const double r = std::hypot(xi[0], xi[1]);
      require_nonzero(r, "xi = 0");
      return TransversalSplit{{}, gp->element(Vec{std::log(r), wrap_angle(std::atan2(-xi[1], xi[0]))})};
    };
  } else if (g.name == "rotation2") {
    if (mk != MaskKind::Full && mk != MaskKind::Annulus) no_transversal();
    t.m = 1;
    t.continuous = {true};
    t.domain = mk == MaskKind::Annulus ? ChartBox{{mask.p.a}, {mask.p.b}} : ChartBox{{0.0}, {kInf}};
    t.description = "C = {(r, 0) : r > 0} (circles of radius r)";
    t.param = [](std::span<const double> c) { return Vec{c[0], 0.0}; };
    t.split = [gp](std::span<const double> xi) {
      const double r = std::hypot(xi[0], xi[1]);
      require_nonzero(r, "xi = 0");
      return TransversalSplit{{r}, gp->element(Vec{wrap_angle(std::atan2(-xi[1], xi[0]))})};
    };
  } else if (g.name == "shear2") {
    if (mk == MaskKind::Strip) {
      if (mask.p.a < 0.0 && mask.p.b > 0.0) no_transversal();
    } else if (mk != MaskKind::HalfPlane) {
      no_transversal();
    }
    t.m = 1;
    t.continuous = {true};
    t.domain = mk == MaskKind::Strip ? ChartBox{{mask.p.a}, {mask.p.b}} : ChartBox{{-kInf}, {kInf}};
    t.description = "C = {(c, 0) : c != 0} (vertical lines xi_1 = c)";
    t.param = [](std::span<const double> c) { return Vec{c[0], 0.0}; };
    t.split = [gp](std::span<const double> xi) {
      require_nonzero(xi[0], "xi_1 = 0");
      return TransversalSplit{{xi[0]}, gp->element(Vec{xi[1] / xi[0]})};
    };
  } else if (g.name == "shear_scale2") {
    const bool half = mk == MaskKind::HalfPlane;
    const bool quad = mk == MaskKind::Quadrant && mask.signs[0] != 0.0 && mask.signs[1] == 0.0;
    if (!half && !quad) no_transversal();
    t.m = 1;
    t.continuous = {false};
    t.discrete_values = half ? std::vector<Vec>{{-1.0}, {1.0}} : std::vector<Vec>{{mask.signs[0]}};
    t.domain = {{t.discrete_values.front()[0]}, {t.discrete_values.back()[0]}};
    t.description = "C = {(+-1, 0)} (transitive on each half-plane xi_1 != 0)";
    t.param = [](std::span<const double> c) { return Vec{c[0], 0.0}; };
    t.split = [gp](std::span<const double> xi) {
      require_nonzero(xi[0], "xi_1 = 0");
      return TransversalSplit{{sgn(xi[0])}, gp->element(Vec{std::log(std::abs(xi[0])), xi[1] / xi[0]})};
    };
  } else {
    no_transversal();
  }
  return t;
}

std::vector<CatalogPair> catalog_pairs() {
  return {
      {"dilation1d_pos", json::object(), {{"name", "full"}}},
      {"dilation1d_pos", json::object(), {{"name", "quadrant"}, {"params", {{"signs", "+"}}}}},
      {"dilation1d_full", json::object(), {{"name", "full"}}},
      {"diag_pos", {{"d", 2}}, {{"name", "quadrant"}, {"params", {{"signs", "++"}}}}},
      {"diag_pos", {{"d", 2}}, {{"name", "quadrant"}, {"params", {{"signs", "-+"}}}}},
      {"similitude2", json::object(), {{"name", "full"}}},
      {"rotation2", json::object(), {{"name", "full"}}},
      {"rotation2", json::object(), {{"name", "annulus"}, {"params", {{"r1", 1.0}, {"r2", 2.0}}}}},
      {"shear2", json::object(), {{"name", "strip"}, {"params", {{"lo", 1.0}, {"hi", 2.0}}}}},
      {"shear2", json::object(), {{"name", "halfplane"}}},
      {"shear_scale2", json::object(), {{"name", "halfplane"}}},
  };
}

// ----------------------------------------------------------- orbit measure

double orbit_measure_integral(const GroupModel& g, std::span<const double> xi, const SpectralFunction& f,
                              const QuadratureRule& q, double* offgrid_fraction) {
  double total = 0.0, off = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    wsum += q.weights[i];
    if (!f.grid.in_box(dual_action(g, xi, q.elements[i]))) off += q.weights[i];
  }
  if (offgrid_fraction) *offgrid_fraction = wsum > 0 ? off / wsum : 0.0;
  if (g.d <= 2) {
    const InterpTable t(f);
    const NodeTable n(q);
    const double x = xi[0], y = g.d == 2 ? xi[1] : 0.0;
    return simd::kernels().orbit_sum(t.view(), n.view(), x, y, simd::Accum::Power);
  }
  for (std::size_t i = 0; i < q.size(); ++i) total += q.weights[i] * std::norm(f.evaluate(dual_action(g, xi, q.elements[i])));
  return total;
}

json OrbitReport::to_json() const {
  json j = {{"representative", representative},
            {"stabilizer_class", to_string(stabilizer_class)},
            {"epsilon_used", epsilon_used},
            {"probe", probe.to_json()},
            {"chart_of_orbit", chart_of_orbit}};
  j["transversal_coord"] = transversal_coord ? json(*transversal_coord) : json(nullptr);
  if (!transversal_error.empty()) j["transversal_error"] = transversal_error;
  return j;
}

OrbitReport analyze_orbit(const GroupModel& g, const ProbeLattice& lattice, const TransversalModel* transversal,
                          std::span<const double> xi, double eps) {
  if (static_cast<int>(xi.size()) != g.d) throw Error("frequency dimension does not match the group");
  OrbitReport r;
  r.representative.assign(xi.begin(), xi.end());
  r.epsilon_used = eps;
  r.stabilizer_class = classify_stabilizer(lattice, xi, eps, &r.probe);
  switch (r.stabilizer_class) {
    case StabilizerClass::Trivial: r.chart_of_orbit = "h -> xi.h is injective near the identity; orbit ~ H"; break;
    case StabilizerClass::CompactNontrivial: r.chart_of_orbit = "orbit ~ H_xi \\ H with compact H_xi"; break;
    case StabilizerClass::Noncompact: r.chart_of_orbit = "stabilizer not bounded within the search box"; break;
    case StabilizerClass::Undetermined: r.chart_of_orbit = "undetermined"; break;
  }
  if (transversal) {
    try {
      r.transversal_coord = transversal->split(xi).coords;
    } catch (const Error& e) {
      r.transversal_error = e.what();
    }
  } else {
    r.transversal_error = "no closed-form transversal; orbit space may be non-regular";
  }
  return r;
}

double probe_epsilon_for(const BandMask& mask, std::span<const double> xi, double eps_rel) {
  const double dist = mask.boundary_distance(xi);
  const double r = norm(xi);
  if (dist > 0.0 && std::isfinite(dist)) return eps_rel * std::min(dist, r > 0 ? r : dist);
  return eps_rel * (r > 0.0 ? r : 1.0);
}

std::vector<Vec> orbit_points(const GroupModel& g, std::span<const double> xi, const QuadratureRule& q) {
  std::vector<Vec> pts;
  pts.reserve(q.size());
  for (const auto& h : q.elements) pts.push_back(dual_action(g, xi, h));
  return pts;
}

}  // namespace calwav
