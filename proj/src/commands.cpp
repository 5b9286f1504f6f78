#include "calwav/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "calwav/calderon.hpp"
#include "calwav/measure.hpp"
#include "calwav/raster_io.hpp"
#include "commands_common.hpp"

namespace calwav {

using nlohmann::json;

namespace cli {

std::filesystem::path out_path(const JobConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return cfg.out_dir / name;
}

void write_report(const JobConfig& cfg, const std::string& name, json report) {
  report["config"] = cfg.resolved;
  const auto path = out_path(cfg, name);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << report.dump(2) << '\n';
}

QuadratureRule quadrature_for(const JobConfig& cfg) {
  return build_quadrature(cfg.group.group, cfg.group.resolution, cfg.group.truncation);
}

void require_continuous(const JobConfig& cfg, const char* command) {
  if (cfg.group.group.discrete)
    throw ConfigError(std::string(command) + " needs a continuous group; " + cfg.group.group.name +
                      " supports group-info and sl2z-demo");
}

void require_invariant(const JobConfig& cfg, const BandMask& mask, const QuadratureRule& q) {
  std::mt19937_64 rng(cfg.options.value("seed", 1ULL));
  const InvarianceCheck c = check_mask_invariance(cfg.group.group, mask, cfg.grid, q, 2000, rng);
  if (!c.passed())
    throw ConfigError("mask " + mask.descriptor() + " is not invariant under " + cfg.group.group.name +
                      " (agreement " + std::to_string(c.agreement) + ")");
}

SpectralFunction default_seed(const JobConfig& cfg, const Grid& grid, const BandMask& mask) {
  const int d = grid.d();
  const double sigma = cfg.options.value("seed_sigma", 1.0);
  const Vec centre = cfg.options.value("seed_center", Vec(d, 0.0));
  if (static_cast<int>(centre.size()) != d) throw ConfigError("seed_center needs one entry per dimension");
  return SpectralFunction::sample(grid, mask, [&](std::span<const double> xi) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += (xi[a] - centre[a]) * (xi[a] - centre[a]);
    const double s = 1.0 + r2 / (sigma * sigma);
    return cplx(1.0 / (s * s), 0.0);
  });
}

SpectralFunction load_seed(const JobConfig& cfg, const BandMask& mask) {
  if (cfg.seed_psi.empty()) return default_seed(cfg, cfg.grid, mask);
  SpectralFunction f = load_spectral(cfg.seed_psi);
  if (f.grid.d() != cfg.d()) throw ConfigError("seed dimension does not match the group");
  f.mask = mask;
  with_default_guard(f.mask, f.grid);
  for (std::size_t k = 0; k < f.grid.size(); ++k)
    if (!f.mask.contains(f.grid.point(k))) f.values[k] = 0.0;
  return f;
}

Vec random_coords(const GroupModel& g, const ChartBox& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Vec c(g.k);
  for (int i = 0; i < g.k; ++i) {
    switch (g.axes[i].kind) {
      case AxisKind::Angle: c[i] = 2.0 * std::numbers::pi * U(rng); break;
      case AxisKind::Sign: c[i] = U(rng) < 0.5 ? -1.0 : 1.0; break;
      default: c[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * U(rng); break;
    }
  }
  return c;
}

}  // namespace cli

namespace {

const char* kind_name(AxisKind k) {
  switch (k) {
    case AxisKind::Scale: return "scale";
    case AxisKind::Linear: return "linear";
    case AxisKind::Angle: return "angle";
    case AxisKind::Sign: return "sign";
  }
  return "?";
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Phi values of a report written back onto the full grid (zero elsewhere).
std::vector<cplx> phi_on_grid(const Grid& grid, const CalderonReport& r) {
  std::vector<cplx> out(grid.size());
  std::vector<long> idx(grid.d());
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    for (int a = 0; a < grid.d(); ++a)
      idx[a] = std::lround((r.points[i][a] - grid.origin[a]) / grid.spacing[a]);
    out[grid.flatten(idx)] = r.phi[i];
  }
  return out;
}

ClassifyOptions classify_options(const JobConfig& cfg) {
  ClassifyOptions o;
  o.tol = cfg.tol;
  o.leakage_limit = cfg.leakage;
  o.sample_count = cfg.classify_samples;
  o.seed = cfg.options.value("seed", 1ULL);
  return o;
}

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::Inconclusive: return kExitInconclusive;
    case Verdict::NotWeaklyAdmissible: return kExitNotWeaklyAdmissible;
    default: return kExitOk;
  }
}

}  // namespace

CommandResult cmd_group_info(const JobConfig& cfg) {
  const GroupModel& g = cfg.group.group;
  CommandResult res;
  json axes = json::array();
  for (const auto& ax : g.axes) axes.push_back({{"name", ax.name}, {"kind", kind_name(ax.kind)}});
  json r = {{"name", g.name}, {"params", g.params}, {"d", g.d}, {"k", g.k}, {"axes", axes}, {"discrete", g.discrete}};
  if (g.discrete) {
    r["unimodular_G"] = true;
    r["haar"] = "counting measure";
    r["enumeration"] = "word length in S = [[0,-1],[1,0]], T = [[1,1],[0,1]]";
  } else {
    r["unimodular_G"] = g.unimodular();
    r["truncation"] = cfg.group.truncation.to_json();
    r["resolution"] = cfg.group.resolution;
    std::mt19937_64 rng(cfg.options.value("seed", 1ULL));
    json samples = json::array();
    double e_delta = 0.0, e_modH = 0.0, e_modG = 0.0, e_chart = 0.0;
    const int pairs = 200;
    for (int i = 0; i < pairs; ++i) {
      const GroupElement x = g.element(cli::random_coords(g, cfg.group.truncation, rng));
      const GroupElement y = g.element(cli::random_coords(g, cfg.group.truncation, rng));
      const GroupElement xy = g.compose(x, y);
      e_delta = std::max(e_delta, rel(g.dilation_modulus(xy), g.dilation_modulus(x) * g.dilation_modulus(y)));
      e_modH = std::max(e_modH, rel(g.modular_H(xy), g.modular_H(x) * g.modular_H(y)));
      e_modG = std::max(e_modG, rel(modular_G(g, xy), modular_G(g, x) * modular_G(g, y)));
      const Mat back = g.chart(g.chart_inverse(x.matrix));
      double err = 0.0;
      for (int a = 0; a < g.d; ++a)
        for (int b = 0; b < g.d; ++b) err = std::max(err, std::abs(back(a, b) - x.matrix(a, b)));
      e_chart = std::max(e_chart, err);
      if (i < 5)
        samples.push_back({{"coords", x.coords},
                           {"delta", g.dilation_modulus(x)},
                           {"modular_H", g.modular_H(x)},
                           {"modular_G", modular_G(g, x)}});
    }
    r["samples"] = samples;
    r["homomorphism"] = {{"pairs", pairs},
                         {"delta_max_rel_err", e_delta},
                         {"modular_H_max_rel_err", e_modH},
                         {"modular_G_max_rel_err", e_modG},
                         {"chart_roundtrip_max_err", e_chart}};
  }
  res.report = r;
  cli::write_report(cfg, "group_info.json", r);
  return res;
}

CommandResult cmd_classify(const JobConfig& cfg) {
  cli::require_continuous(cfg, "classify");
  if (cfg.seed_psi.empty()) throw ConfigError("classify needs a psi_hat raster (--seed-psi or seed_psi)");
  const GroupModel& g = cfg.group.group;
  const QuadratureRule q = cli::quadrature_for(cfg);
  cli::require_invariant(cfg, cfg.mask, q);
  const SpectralFunction psi = cli::load_seed(cfg, cfg.mask);
  const CalderonReport rep = classify(g, psi, cfg.mask, q, classify_options(cfg));

  CommandResult res;
  res.report = rep.to_json();
  res.exit_code = exit_for(rep.verdict);
  res.message = "verdict: " + to_string(rep.verdict);
  cli::write_report(cfg, "classify_report.json", res.report);
  const auto phi = phi_on_grid(psi.grid, rep);
  write_raster(cli::out_path(cfg, "calderon.cwr"), psi.grid, phi,
               {{"kind", "calderon_integral"}, {"mask", cfg.mask.to_json()}, {"config", cfg.resolved}});
  write_csv(cli::out_path(cfg, "calderon.csv"), psi.grid, phi, cfg.resolved);
  return res;
}

CommandResult cmd_synthesize(const JobConfig& cfg) {
  cli::require_continuous(cfg, "synthesize");
  const GroupModel& g = cfg.group.group;
  const QuadratureRule q = cli::quadrature_for(cfg);
  cli::require_invariant(cfg, cfg.mask, q);
  const SpectralFunction seed = cli::load_seed(cfg, cfg.mask);

  CommandResult res;
  auto normalize = [&](const SpectralFunction& s) {
    try {
      return normalize_to_admissible(g, s, q);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error&) {
      res.exit_code = kExitNotWeaklyAdmissible;
      throw;
    }
  };

  SpectralFunction out;
  json r = json::object();
  try {
    const SpectralFunction phi = normalize(seed);
    if (g.unimodular()) {
      r["branch"] = "unimodular";
      std::function<SpectralFunction(const Grid&)> rebuild;
      if (cfg.seed_psi.empty())
        rebuild = [&](const Grid& big) { return normalize(cli::default_seed(cfg, big, cfg.mask)); };
      const OrbitSpaceMass mass = orbit_space_mass(g, phi, rebuild);
      r["orbit_space_mass"] = mass.to_json();
      if (!rebuild) r["orbit_space_mass"]["extent_check"] = "skipped for file seeds";
      if (mass.infinite) {
        res.exit_code = kExitNoAdmissible;
        res.message = "no admissible vector: unimodular with infinite orbit-space measure";
        r["error"] = res.message;
        res.report = r;
        cli::write_report(cfg, "synthesize_report.json", r);
        return res;
      }
      out = phi;
    } else {
      r["branch"] = "nonunimodular";
      for (const auto& b : cfg.bands) cli::require_invariant(cfg, b, q);
      SeriesReport series;
      out = synthesize_nonunimodular(g, phi, cfg.bands, q, &series);
      r["series"] = series.to_json();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    if (res.exit_code != kExitNotWeaklyAdmissible) throw;
    res.message = e.what();
    r["error"] = res.message;
    res.report = r;
    cli::write_report(cfg, "synthesize_report.json", r);
    return res;
  }

  const CalderonReport check = classify(g, out, cfg.mask, q, classify_options(cfg));
  r["classify"] = check.to_json();
  res.exit_code = check.verdict == Verdict::Inconclusive ? kExitInconclusive : kExitOk;
  res.message = "output verdict: " + to_string(check.verdict);
  res.report = r;
  cli::write_report(cfg, "synthesize_report.json", r);
  save_spectral(cli::out_path(cfg, "admissible.cwr"), out, cfg.resolved, "admissible_vector");
  write_csv(cli::out_path(cfg, "admissible.csv"), out.grid, out.values, cfg.resolved);
  return res;
}

CommandResult run_command(const std::string& name, const JobConfig& cfg) {
  try {
    if (name == "group-info") return cmd_group_info(cfg);
    if (name == "classify") return cmd_classify(cfg);
    if (name == "synthesize") return cmd_synthesize(cfg);
    if (name == "orbits") return cmd_orbits(cfg);
    if (name == "disintegrate") return cmd_disintegrate(cfg);
    if (name == "roundtrip") return cmd_roundtrip(cfg);
    if (name == "sl2z-demo") return cmd_sl2z_demo(cfg);
    return {kExitConfig, "unknown command: " + name, {}};
  } catch (const ConfigError& e) {
    return {kExitConfig, e.what(), {}};
  } catch (const std::filesystem::filesystem_error& e) {
    return {kExitConfig, e.what(), {}};
  } catch (const Error& e) {
    return {kExitConfig, e.what(), {}};
  }
}

}  // namespace calwav
