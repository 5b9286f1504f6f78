#include "calwav/calderon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>

#include "calwav/simd/kernels.hpp"
#include "detail.hpp"

namespace calwav {

using nlohmann::json;

std::vector<double> orbit_field(const GroupModel& g, const SpectralFunction& f, const std::vector<Vec>& points,
                                const QuadratureRule& q, simd::Accum mode) {
  std::vector<double> out(points.size(), 0.0);
  if (q.size() == 0) return out;
  if (g.d <= 2) {
    const InterpTable t(f);
    const NodeTable n(q);
    const auto& k = simd::kernels();
    for (std::size_t p = 0; p < points.size(); ++p)
      out[p] = k.orbit_sum(t.view(), n.view(), points[p][0], g.d == 2 ? points[p][1] : 0.0, mode);
    return out;
  }
  for (std::size_t p = 0; p < points.size(); ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const cplx v = f.evaluate(dual_action(g, points[p], q.elements[i]));
      s += q.weights[i] * (mode == simd::Accum::Power ? std::norm(v) : v.real());
    }
    out[p] = s;
  }
  return out;
}

double calderon_integral(const GroupModel& g, const SpectralFunction& psi_hat, std::span<const double> xi,
                         const QuadratureRule& q) {
  return orbit_field(g, psi_hat, {Vec(xi.begin(), xi.end())}, q)[0];
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Admissible: return "admissible";
    case Verdict::WeaklyAdmissible: return "weakly_admissible";
    case Verdict::NotWeaklyAdmissible: return "not_weakly_admissible";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

json CalderonReport::to_json(bool with_samples) const {
  json j = {{"verdict", to_string(verdict)},
            {"ess_inf", ess_inf},
            {"ess_sup", ess_sup},
            {"max_deviation", max_deviation},
            {"leakage", leakage},
            {"truncation_leakage", truncation_leakage},
            {"edge_fraction", edge_fraction},
            {"offgrid_mass", offgrid_mass},
            {"samples", points.size()},
            {"excluded", excluded},
            {"tolerance_used", tolerance_used},
            {"truncation", truncation},
            {"phi_is", "un-rooted Calderon integral sum_i w_i |psi(xi.h_i)|^2"}};
  if (with_samples) {
    json s = json::array();
    for (std::size_t i = 0; i < points.size(); ++i)
      s.push_back({{"xi", points[i]}, {"phi", phi[i]}, {"phi_extended", phi_extended[i]}, {"counted", counted[i]}});
    j["phi_samples"] = s;
  }
  return j;
}

namespace {

bool has_noncompact(const GroupModel& g) { return g.noncompact_axes() > 0; }

double edge_fraction(const SpectralFunction& f) {
  double edge = 0.0, total = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const double v = std::norm(f.values[k]);
    if (v == 0.0) continue;
    total += v;
    const auto idx = f.grid.unflatten(k);
    for (int a = 0; a < f.grid.d(); ++a)
      if (idx[a] < 2 || idx[a] > f.grid.shape[a] - 3) {
        edge += v;
        break;
      }
  }
  return total > 0.0 ? edge / total : 0.0;
}

}  // namespace

CalderonReport classify(const GroupModel& g, const SpectralFunction& psi_hat, const BandMask& mask_in,
                        const QuadratureRule& q, const ClassifyOptions& opt) {
  if (!(opt.tol > 0.0)) throw Error("tolerance must be positive");
  BandMask mask = mask_in;
  with_default_guard(mask, psi_hat.grid);
  const Grid& grid = psi_hat.grid;

  std::vector<Vec> pts;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Vec x = grid.point(k);
    if (mask.guarded(x)) pts.push_back(std::move(x));
  }
  if (pts.empty()) throw Error("empty mask after null_guard");
  if (opt.sample_count > 0 && opt.sample_count < pts.size()) {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(opt.seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(opt.sample_count);
    std::sort(order.begin(), order.end());
    std::vector<Vec> sub;
    for (std::size_t i : order) sub.push_back(pts[i]);
    pts = std::move(sub);
  }

  CalderonReport r;
  r.tolerance_used = opt.tol;
  r.truncation = q.descriptor();
  r.points = pts;
  r.phi = orbit_field(g, psi_hat, pts, q);
  if (has_noncompact(g)) {
    const QuadratureRule ext = extended_quadrature(g, q, 2.0);
    r.phi_extended = orbit_field(g, psi_hat, pts, ext);
  } else {
    r.phi_extended = r.phi;
  }

  double sum_ext = 0.0, sum_gap = 0.0;
  r.counted.assign(pts.size(), false);
  r.ess_inf = std::numeric_limits<double>::infinity();
  r.ess_sup = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double a = r.phi[i], b = r.phi_extended[i];
    sum_ext += b;
    sum_gap += std::max(0.0, b - a);
    const double leak = b > 0.0 ? (b - a) / b : 0.0;
    if (leak > opt.tol) {
      ++r.excluded;
      continue;
    }
    r.counted[i] = true;
    r.ess_inf = std::min(r.ess_inf, a);
    r.ess_sup = std::max(r.ess_sup, a);
    r.max_deviation = std::max(r.max_deviation, std::abs(a - 1.0));
  }
  r.truncation_leakage = sum_ext > 0.0 ? sum_gap / sum_ext : 0.0;
  r.edge_fraction = edge_fraction(psi_hat);
  r.leakage = r.truncation_leakage + r.edge_fraction;

  {
    const std::size_t stride = std::max<std::size_t>(1, pts.size() / 256);
    double off = 0.0, all = 0.0;
    for (std::size_t i = 0; i < pts.size(); i += stride)
      for (std::size_t n = 0; n < q.size(); ++n) {
        all += q.weights[n];
        if (!grid.in_box(dual_action(g, pts[i], q.elements[n]))) off += q.weights[n];
      }
    r.offgrid_mass = all > 0.0 ? off / all : 0.0;
  }

  const std::size_t counted = pts.size() - r.excluded;
  if (counted == 0) {
    r.ess_inf = r.ess_sup = 0.0;
    r.verdict = Verdict::Inconclusive;
  } else if (r.leakage > opt.leakage_limit) {
    r.verdict = Verdict::Inconclusive;
  } else if (r.max_deviation <= opt.tol) {
    r.verdict = Verdict::Admissible;
  } else {
    const double ratio = r.ess_sup > 0.0 ? r.ess_inf / r.ess_sup : 0.0;
    if (ratio <= opt.zero_ratio) r.verdict = Verdict::NotWeaklyAdmissible;
    else if (ratio <= opt.gap_ratio) r.verdict = Verdict::Inconclusive;
    else r.verdict = Verdict::WeaklyAdmissible;
  }
  return r;
}

SpectralFunction normalize_to_admissible(const GroupModel& g, const SpectralFunction& psi0, const QuadratureRule& q,
                                         int passes) {
  std::vector<Vec> pts;
  std::vector<std::size_t> where;
  for (std::size_t k = 0; k < psi0.values.size(); ++k) {
    Vec x = psi0.grid.point(k);
    if (!psi0.mask.contains(x)) continue;
    pts.push_back(std::move(x));
    where.push_back(k);
  }
  constexpr double floor = 1e-12;
  SpectralFunction cur = psi0, best(psi0.grid, psi0.mask);
  double best_dev = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass <= std::max(passes, 1); ++pass) {
    const std::vector<double> phi = orbit_field(g, cur, pts, q);
    double dev = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (psi0.mask.guarded(pts[i])) {
        if (pass == 0 && phi[i] < floor) throw Error("not weakly admissible on this grid");
        dev = std::max(dev, std::abs(phi[i] - 1.0));
      }
    if (pass > 0) {
      if (dev >= best_dev) break;
      best = cur;
      best_dev = dev;
      if (dev < 1e-9 || pass == std::max(passes, 1)) break;
    }
    SpectralFunction out(psi0.grid, psi0.mask);
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (phi[i] >= floor) out.values[where[i]] = cur.values[where[i]] / std::sqrt(phi[i]);
    cur = std::move(out);
  }
  return best;
}

// ------------------------------------------------- weak admissibility

Cell cell_from_mask(const BandMask& m) {
  return {[m](std::span<const double> x) { return m.contains(x); }, -1.0, m.descriptor()};
}

json WeakNormalizerResult::to_json() const {
  return {{"min_orbit_integral", min_orbit_integral},
          {"max_orbit_integral", max_orbit_integral},
          {"total_integral", total_integral},
          {"cell_measures", cell_measures},
          {"verified", verified}};
}

WeakNormalizerResult weak_admissibility_normalizer(const GroupModel& g, const SpectralFunction& phi1,
                                                   const std::vector<Cell>& partition, const QuadratureRule& q) {
  if (partition.empty()) throw Error("partition must contain at least one cell");
  bool any = false;
  for (const cplx& v : phi1.values) {
    if (v.imag() != 0.0 || v.real() < 0.0) throw Error("input must be real and nonnegative");
    any = any || v.real() > 0.0;
  }
  if (!any) throw Error("input vanishes identically; its orbit integral must be positive");

  const Grid& grid = phi1.grid;
  WeakNormalizerResult r;
  r.cell_measures.resize(partition.size());
  for (std::size_t n = 0; n < partition.size(); ++n) {
    if (partition[n].measure >= 0.0) {
      r.cell_measures[n] = partition[n].measure;
      continue;
    }
    std::size_t count = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) count += partition[n].contains(grid.point(k)) ? 1 : 0;
    r.cell_measures[n] = static_cast<double>(count) * grid.cell_volume();
  }

  SpectralFunction phi2(grid, phi1.mask);
  std::vector<Vec> support;
  std::vector<std::size_t> where;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = phi1.values[k].real();
    if (v <= 0.0) continue;
    const Vec x = grid.point(k);
    for (std::size_t n = 0; n < partition.size(); ++n) {
      if (!partition[n].contains(x)) continue;
      phi2.values[k] = std::min(1.0, v) / (std::ldexp(1.0, static_cast<int>(n + 1)) * (1.0 + r.cell_measures[n]));
      support.push_back(x);
      where.push_back(k);
      break;
    }
  }
  if (support.empty()) throw Error("input support misses every partition cell");

  const std::vector<double> orbit = orbit_field(g, phi2, support, q, simd::Accum::Real);
  r.phi = SpectralFunction(grid, phi1.mask);
  for (std::size_t i = 0; i < support.size(); ++i) r.phi.values[where[i]] = phi2.values[where[i]] / (1.0 + orbit[i]);

  // Verify on (a sample of) the support.
  std::vector<Vec> check;
  const std::size_t stride = std::max<std::size_t>(1, support.size() / 2000);
  for (std::size_t i = 0; i < support.size(); i += stride) check.push_back(support[i]);
  const std::vector<double> after = orbit_field(g, r.phi, check, q, simd::Accum::Real);
  r.min_orbit_integral = *std::min_element(after.begin(), after.end());
  r.max_orbit_integral = *std::max_element(after.begin(), after.end());
  r.total_integral = r.phi.l1_norm();
  r.verified = r.min_orbit_integral > 0.0 && r.max_orbit_integral <= 1.0 && std::isfinite(r.total_integral);
  return r;
}

// ------------------------------------------------------------ mollifier

Mollifier make_mollifier(const GroupModel& g, double width, const ChartBox& truncation, int nodes_per_axis) {
  if (!(width > 0.0)) throw Error("mollifier width must be positive");
  if (nodes_per_axis < 1) throw Error("mollifier needs at least one node per axis");
  std::vector<Vec> axis_nodes(g.k);
  std::vector<double> cell(g.k, 1.0);
  for (int i = 0; i < g.k; ++i) {
    const double id = g.id_coords[i];
    switch (g.axes[i].kind) {
      case AxisKind::Scale:
      case AxisKind::Linear:
        if (id - width < truncation.lo[i] || id + width > truncation.hi[i])
          throw Error("mollifier width exceeds the truncation box");
        [[fallthrough]];
      case AxisKind::Angle: {
        if (g.axes[i].kind == AxisKind::Angle && width >= std::numbers::pi)
          throw Error("mollifier width exceeds the truncation box");
        const double h = 2.0 * width / nodes_per_axis;
        for (int j = 0; j < nodes_per_axis; ++j) axis_nodes[i].push_back(id - width + (j + 0.5) * h);
        cell[i] = h;
        break;
      }
      case AxisKind::Sign: axis_nodes[i] = {id}; break;
    }
  }
  Mollifier m;
  m.width = width;
  std::size_t total = 1;
  for (const auto& a : axis_nodes) total *= a.size();
  Vec c(g.k);
  double norm_sum = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t r = flat;
    double vol = 1.0;
    for (int i = g.k - 1; i >= 0; --i) {
      c[i] = axis_nodes[i][r % axis_nodes[i].size()];
      r /= axis_nodes[i].size();
      vol *= cell[i];
    }
    const double rho = detail::chart_norm(g, c) / width;
    if (rho >= 1.0) continue;
    const double nu = std::exp(-1.0 / (1.0 - rho * rho));
    GroupElement e = g.element(c);
    const double w = g.haar_density(c) * vol * nu;
    norm_sum += w / g.modular_H(e);
    m.elements.push_back(std::move(e));
    m.weights.push_back(w);
  }
  if (m.elements.empty() || !(norm_sum > 0.0)) throw Error("mollifier support contains no quadrature node");
  for (double& w : m.weights) w /= norm_sum;
  return m;
}

SpectralFunction mollify(const GroupModel& g, const SpectralFunction& phi, double nu_width, const QuadratureRule& q) {
  return mollify(g, phi, make_mollifier(g, nu_width, q.truncation));
}

SpectralFunction mollify(const GroupModel& g, const SpectralFunction& phi, const Mollifier& nu) {
  const Grid& grid = phi.grid;
  SpectralFunction out(grid, phi.mask);
  std::vector<std::size_t> where;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec x = grid.point(k);
    if (!phi.mask.contains(x)) continue;
    where.push_back(k);
    xs.push_back(x[0]);
    ys.push_back(g.d >= 2 ? x[1] : 0.0);
  }
  if (g.d <= 2) {
    const InterpTable t(phi);
    const auto& k = simd::kernels();
    std::vector<double> re(where.size()), im(where.size());
    for (std::size_t j = 0; j < nu.elements.size(); ++j) {
      const auto m = detail::dual4(nu.elements[j].matrix);
      k.dilate_eval(t.view(), m.data(), xs.data(), ys.data(), where.size(), nu.weights[j], re.data(), im.data());
      for (std::size_t i = 0; i < where.size(); ++i) out.values[where[i]] += cplx(re[i], im[i]);
    }
    return out;
  }
  for (std::size_t i = 0; i < where.size(); ++i) {
    const Vec x = grid.point(where[i]);
    cplx s = 0.0;
    for (std::size_t j = 0; j < nu.elements.size(); ++j) s += nu.weights[j] * phi.evaluate(dual_action(g, x, nu.elements[j]));
    out.values[where[i]] = s;
  }
  return out;
}

// ------------------------------------------------ nonunimodular series

json SeriesReport::to_json() const {
  return {{"h0", h0_coords},  {"delta_G_h0", delta_G_h0}, {"delta_H_h0", delta_H_h0},
          {"k", k},           {"band_norm_sq", band_norm_sq}, {"term_norm_sq", term_norm_sq},
          {"nu_norm_sq", nu_norm_sq}, {"bound", bound},   {"tail", tail}};
}

GroupElement pick_h0(const GroupModel& g, const QuadratureRule& q) {
  std::size_t best = q.size();
  double best_norm = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q.modular[i] / q.delta[i] < 0.5)) continue;
    const double n = detail::chart_norm(g, q.nodes[i]);
    if (n < best_norm - 1e-12 || (std::abs(n - best_norm) <= 1e-12 && q.nodes[i] < q.nodes[best])) {
      best = i;
      best_norm = std::min(best_norm, n);
    }
  }
  if (best == q.size()) throw Error("no h0 with Delta_G(h0) < 1/2 inside the truncation");
  return q.elements[best];
}

SpectralFunction restrict_to(const SpectralFunction& f, const BandMask& band) {
  SpectralFunction out = f;
  for (std::size_t k = 0; k < out.values.size(); ++k)
    if (!band.contains(f.grid.point(k))) out.values[k] = 0.0;
  return out;
}

SpectralFunction synthesize_nonunimodular(const GroupModel& g, const SpectralFunction& phi,
                                          const std::vector<BandMask>& bands, const QuadratureRule& q,
                                          SeriesReport* report) {
  if (g.unimodular()) throw Error("use unimodular criterion");
  if (bands.empty()) throw Error("need at least one band");
  const GroupElement h0 = pick_h0(g, q);
  const double dH = g.modular_H(h0);
  const Grid& grid = phi.grid;
  const double vol = grid.cell_volume();

  SeriesReport rep;
  rep.h0_coords = h0.coords;
  rep.delta_H_h0 = dH;
  rep.delta_G_h0 = modular_G(g, h0);

  std::vector<int> band_of(grid.size(), -1);
  rep.band_norm_sq.assign(bands.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec x = grid.point(k);
    for (std::size_t n = 0; n < bands.size(); ++n) {
      if (!bands[n].contains(x)) continue;
      if (band_of[k] >= 0) throw Error("bands must be disjoint");
      band_of[k] = static_cast<int>(n);
      rep.band_norm_sq[n] += std::norm(phi.values[k]) * vol;
    }
  }
  for (std::size_t n = 0; n < bands.size(); ++n) {
    const double target = std::ldexp(1.0, -static_cast<int>(n + 1));
    int k = 0;
    while (!(std::ldexp(rep.band_norm_sq[n], -k) < target)) {
      if (++k > 1000) throw Error("band norm is not finite");
    }
    rep.k.push_back(k);
    rep.bound += std::ldexp(rep.band_norm_sq[n], -k);
  }

  std::vector<Mat> powers(bands.size());
  for (std::size_t n = 0; n < bands.size(); ++n) {
    Mat p = Mat::identity(g.d);
    for (int j = 0; j < rep.k[n]; ++j) p = p * h0.matrix;
    powers[n] = p;
  }

  SpectralFunction nu(grid, phi.mask);
  std::unique_ptr<InterpTable> table;
  if (g.d <= 2) table = std::make_unique<InterpTable>(phi);
  rep.term_norm_sq.assign(bands.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (band_of[k] < 0) continue;
    const auto n = static_cast<std::size_t>(band_of[k]);
    const Vec x = grid.point(k);
    const Vec y = powers[n].transpose().apply(x);
    const cplx v = table ? (*table)(y[0], g.d == 2 ? y[1] : 0.0) : phi.evaluate(y);
    nu.values[k] = std::pow(dH, 0.5 * rep.k[n]) * v;
    rep.term_norm_sq[n] += std::norm(nu.values[k]) * vol;
  }
  rep.nu_norm_sq = nu.l2_norm_sq();
  double partial = 0.0;
  for (double t : rep.term_norm_sq) partial += t;
  rep.tail = rep.nu_norm_sq > 0.0 ? std::abs(rep.nu_norm_sq - partial) / rep.nu_norm_sq : 0.0;
  if (report) *report = rep;
  return nu;
}

}  // namespace calwav
