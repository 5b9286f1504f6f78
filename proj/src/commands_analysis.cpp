#include <algorithm>
#include <cmath>
#include <random>

#include "calwav/calderon.hpp"
#include "calwav/commands.hpp"
#include "calwav/measure.hpp"
#include "calwav/orbit.hpp"
#include "calwav/raster_io.hpp"
#include "calwav/sl2z.hpp"
#include "calwav/transform.hpp"
#include "commands_common.hpp"

namespace calwav {

using nlohmann::json;

namespace {

/// Up to n guarded masked grid points, drawn without replacement.
std::vector<Vec> sample_points(const Grid& grid, const BandMask& mask, std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (mask.guarded(grid.point(k))) idx.push_back(k);
  std::shuffle(idx.begin(), idx.end(), rng);
  if (idx.size() > n) idx.resize(n);
  std::vector<Vec> out;
  for (std::size_t k : idx) out.push_back(grid.point(k));
  return out;
}

Vec default_centre(int d) {
  if (d == 1) return {1.5};
  if (d == 2) return {0.9, 0.6};
  return Vec(d, 0.7);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

}  // namespace

CommandResult cmd_orbits(const JobConfig& cfg) {
  cli::require_continuous(cfg, "orbits");
  const GroupModel& g = cfg.group.group;
  const QuadratureRule q = cli::quadrature_for(cfg);
  cli::require_invariant(cfg, cfg.mask, q);

  std::optional<TransversalModel> t;
  std::string terr;
  try {
    t = builtin_transversal(g, cfg.mask);
  } catch (const Error& e) {
    terr = e.what();
  }
  std::mt19937_64 rng(cfg.options.value("seed", 1ULL));
  std::vector<Vec> points;
  if (cfg.options.contains("points")) {
    points = cfg.options["points"].get<std::vector<Vec>>();
  } else {
    points = sample_points(cfg.grid, cfg.mask, cfg.options.value("orbit_samples", std::size_t{16}), rng);
  }
  const double eps_rel = cfg.options.value("eps_rel", 0.05);
  const ProbeLattice lattice(g, cfg.group.truncation);

  json reports = json::array();
  std::size_t bounded = 0;
  std::vector<std::string> cols;
  for (int a = 0; a < g.d; ++a) cols.push_back("xi" + std::to_string(a));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec& xi = points[i];
    if (static_cast<int>(xi.size()) != g.d) throw ConfigError("orbit point dimension mismatch");
    const OrbitReport rep = analyze_orbit(g, lattice, t ? &*t : nullptr, xi, probe_epsilon_for(cfg.mask, xi, eps_rel));
    bounded += rep.probe.bounded;
    reports.push_back(rep.to_json());
    write_table_csv(cli::out_path(cfg, "orbit_" + std::to_string(i) + ".csv"), cols, orbit_points(g, xi, q),
                    cfg.resolved);
  }
  CommandResult res;
  res.report = {{"transversal", t ? t->to_json() : json(nullptr)},
                {"orbits", reports},
                {"bounded_fraction", points.empty() ? 0.0 : static_cast<double>(bounded) / points.size()}};
  if (!terr.empty()) res.report["transversal_error"] = terr;
  cli::write_report(cfg, "orbits.json", res.report);
  return res;
}

CommandResult cmd_disintegrate(const JobConfig& cfg) {
  cli::require_continuous(cfg, "disintegrate");
  const GroupModel& g = cfg.group.group;
  const QuadratureRule q = cli::quadrature_for(cfg);
  cli::require_invariant(cfg, cfg.mask, q);
  const TransversalModel t = builtin_transversal(g, cfg.mask);
  const SpectralFunction phi = cli::load_seed(cfg, cfg.mask);
  const Disintegration dis = make_disintegration(g, t, phi, cfg.mask);

  const Vec c = cfg.options.value("test_center", default_centre(g.d));
  const double s = cfg.options.value("test_sigma", 0.35);
  if (static_cast<int>(c.size()) != g.d) throw ConfigError("test_center needs one entry per dimension");
  const SpectralFunction f = SpectralFunction::sample(cfg.grid, cfg.mask, [&](std::span<const double> xi) {
    double r2 = 0.0;
    for (int a = 0; a < g.d; ++a) r2 += (xi[a] - c[a]) * (xi[a] - c[a]);
    return cplx(std::exp(-r2 / (2.0 * s * s)), 0.0);
  });
  const IdentityCheck check = verify_disintegration(g, dis, f, cfg.mask, q);

  std::mt19937_64 rng(cfg.options.value("seed", 1ULL));
  std::uniform_int_distribution<std::size_t> pick(0, q.size() - 1);
  const double spacing = cfg.grid.max_spacing();
  std::vector<double> errs;
  json kappa = json::array();
  for (const Vec& xi : sample_points(cfg.grid, cfg.mask, cfg.options.value("kappa_samples", std::size_t{200}), rng)) {
    const GroupElement& h = q.elements[pick(rng)];
    const Vec xh = dual_action(g, xi, h);
    if (!cfg.mask.guarded(xh) || !cfg.grid.in_box(xh)) continue;
    try {
      const double k0 = kappa_estimate(g, t, xi, spacing);
      const double k1 = kappa_estimate(g, t, xh, spacing);
      const double ratio = k1 * modular_G(g, h) / k0;
      errs.push_back(std::abs(ratio - 1.0));
      if (kappa.size() < 50) kappa.push_back({{"xi", xi}, {"h", h.coords}, {"kappa", k0}, {"ratio", ratio}});
    } catch (const Error&) {
    }
  }

  CommandResult res;
  res.report = {{"disintegration", dis.to_json()},
                {"identity", check.to_json()},
                {"test_function", {{"center", c}, {"sigma", s}}},
                {"kappa_cocycle", {{"samples", errs.size()}, {"median_rel_err", median(errs)}, {"examples", kappa}}}};
  cli::write_report(cfg, "disintegration.json", res.report);

  std::vector<std::string> cols;
  for (int i = 0; i < t.m; ++i) cols.push_back("u" + std::to_string(i));
  cols.push_back("weight");
  cols.push_back("count");
  std::vector<std::vector<double>> rows;
  for (const auto& b : dis.orbit_weight.bins) {
    std::vector<double> row(b.coord.begin(), b.coord.end());
    row.push_back(b.weight);
    row.push_back(static_cast<double>(b.count));
    rows.push_back(row);
  }
  write_table_csv(cli::out_path(cfg, "pseudo_image.csv"), cols, rows, cfg.resolved);
  return res;
}

CommandResult cmd_roundtrip(const JobConfig& cfg) {
  cli::require_continuous(cfg, "roundtrip");
  const GroupModel& g = cfg.group.group;
  const QuadratureRule q = cli::quadrature_for(cfg);
  cli::require_invariant(cfg, cfg.mask, q);

  CommandResult res;
  SpectralFunction psi;
  if (cfg.seed_psi.empty()) {
    try {
      psi = normalize_to_admissible(g, cli::default_seed(cfg, cfg.grid, cfg.mask), q);
    } catch (const Error& e) {
      res.exit_code = kExitNotWeaklyAdmissible;
      res.message = e.what();
      return res;
    }
  } else {
    psi = cli::load_seed(cfg, cfg.mask);
  }
  ClassifyOptions copt;
  copt.tol = cfg.tol;
  copt.leakage_limit = cfg.leakage;
  copt.sample_count = cfg.classify_samples > 0 ? cfg.classify_samples : 4000;
  const CalderonReport verdict = classify(g, psi, cfg.mask, q, copt);

  Signal f;
  if (!cfg.signal.empty()) {
    const Raster r = read_raster(cfg.signal);
    f.grid = r.grid;
    f.values = r.data;
    if (f.grid.d() != g.d) throw ConfigError("signal dimension does not match the group");
  } else {
    Fft fft(Grid::fft_dual_spatial(cfg.grid));
    const Vec c = cfg.options.value("signal_center", default_centre(g.d));
    const double s = cfg.options.value("signal_sigma", 0.3);
    std::vector<cplx> fhat(fft.size());
    for (std::size_t k = 0; k < fft.size(); ++k) {
      const Vec xi = fft.frequency().point(k);
      if (!cfg.mask.contains(xi)) continue;
      double r2 = 0.0;
      for (int a = 0; a < g.d; ++a) r2 += (xi[a] - c[a]) * (xi[a] - c[a]);
      fhat[k] = std::exp(-r2 / (2.0 * s * s));
    }
    f = Signal::zeros(fft.spatial());
    fft.inverse(fhat, f.values);
  }

  std::vector<std::size_t> nodes = cfg.options.value("export_nodes", std::vector<std::size_t>{});
  auto keep = [&](std::size_t i, std::span<const cplx> plane) {
    if (std::find(nodes.begin(), nodes.end(), i) == nodes.end()) return;
    write_raster(cli::out_path(cfg, "plane_" + std::to_string(i) + ".cwr"), f.grid, plane,
                 {{"kind", "wavelet_plane"}, {"node", i}, {"chart_coords", q.nodes[i]}, {"config", cfg.resolved}});
  };
  const RoundtripResult rt = roundtrip(g, f, psi, q, keep);

  res.report = rt.to_json();
  res.report["psi_verdict"] = to_string(verdict.verdict);
  res.report["within_tolerance"] = rt.rel_err <= cfg.roundtrip_tol;
  res.message = "relative L2 error " + std::to_string(rt.rel_err);
  cli::write_report(cfg, "roundtrip_report.json", res.report);
  write_raster(cli::out_path(cfg, "reconstruction.cwr"), f.grid, rt.reconstruction.values,
               {{"kind", "reconstruction"}, {"config", cfg.resolved}});
  return res;
}

CommandResult cmd_sl2z_demo(const JobConfig& cfg) {
  sl2z::Options opt;
  opt.entry_cap = cfg.options.value("entry_cap", opt.entry_cap);
  opt.radius = cfg.options.value("radius", opt.radius);
  opt.max_length = cfg.options.value("max_length", opt.max_length);
  const int samples = cfg.options.value("samples", 100);
  const double r1 = cfg.options.value("r1", 1.0), r2 = cfg.options.value("r2", 2.0);
  const sl2z::DemoResult demo = sl2z::run_demo(samples, r1, r2, cfg.options.value("seed", 1ULL), opt);

  std::vector<std::vector<double>> rows;
  for (int n = 0; n <= opt.max_length; ++n) {
    std::vector<double> col;
    for (const auto& s : demo.sums) col.push_back(s[static_cast<std::size_t>(n)]);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    double mean = 0.0;
    for (double v : col) mean += v;
    mean = col.empty() ? 0.0 : mean / static_cast<double>(col.size());
    rows.push_back({static_cast<double>(n), mean, col.empty() ? 0.0 : *lo, median(col), col.empty() ? 0.0 : *hi});
  }
  write_table_csv(cli::out_path(cfg, "sl2z_partial_sums.csv"), {"N", "mean", "min", "median", "max"}, rows,
                  cfg.resolved);
  std::vector<std::vector<double>> per;
  for (std::size_t i = 0; i < demo.samples.size(); ++i) {
    const auto& s = demo.sums[i];
    per.push_back({demo.samples[i][0], demo.samples[i][1], s[demo.n_low], s[demo.n_high],
                   s[demo.n_high] / std::max(s[demo.n_low], 1e-300)});
  }
  write_table_csv(cli::out_path(cfg, "sl2z_samples.csv"), {"xi0", "xi1", "S_low", "S_high", "ratio"}, per,
                  cfg.resolved);
  CommandResult res;
  res.report = demo.to_json();
  res.report["annulus"] = {r1, r2};
  res.report["entry_cap"] = opt.entry_cap;
  res.report["radius"] = opt.radius;
  cli::write_report(cfg, "sl2z_report.json", res.report);
  return res;
}

}  // namespace calwav
