#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "calwav/commands.hpp"
#include "calwav/config.hpp"

int main(int argc, char** argv) {
  using namespace calwav;
  CLI::App app{"Continuous wavelet transforms on R^d x| H: admissibility, orbits, synthesis"};
  app.require_subcommand(1);

  std::string config_path, out;
  double tol = 0.0;
  std::vector<int> resolution;
  std::vector<double> truncation;
  std::string seed_psi;
  app.add_option("--config", config_path, "JSON job config (default: $CALWAV_CONFIG)");
  app.add_option("--out", out, "output directory");
  app.add_option("--tol", tol, "classification tolerance");
  app.add_option("--resolution", resolution, "quadrature nodes per chart axis");
  app.add_option("--truncation", truncation, "chart box as lo/hi pairs per axis");
  app.add_option("--seed-psi", seed_psi, "psi_hat raster");

  const char* names[] = {"group-info", "classify", "synthesize", "orbits", "disintegrate", "roundtrip", "sl2z-demo"};
  const char* help[] = {"group catalog entry with modular functions",
                        "Calderon classification of a psi_hat raster",
                        "construct an admissible vector",
                        "orbit and stabilizer analysis",
                        "measure disintegration over dual orbits",
                        "analysis/synthesis round trip",
                        "SL(2,Z) divergence witness"};
  for (int i = 0; i < 7; ++i) app.add_subcommand(names[i], help[i])->fallthrough();

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    if (config_path.empty())
      if (const char* env = std::getenv("CALWAV_CONFIG")) config_path = env;
    if (config_path.empty()) throw ConfigError("no config: pass --config or set CALWAV_CONFIG");
    Overrides o;
    if (!out.empty()) o.out = out;
    if (tol > 0.0) o.tol = tol;
    if (!resolution.empty()) o.resolution = resolution;
    if (!truncation.empty()) o.truncation = truncation;
    if (!seed_psi.empty()) o.seed_psi = seed_psi;
    const JobConfig cfg = resolve_config(apply_overrides(read_config_file(config_path), o));
    const CommandResult r = run_command(command, cfg);
    std::cout << r.report.dump(2) << '\n';
    if (!r.message.empty()) (r.exit_code == 0 ? std::cout : std::cerr) << r.message << '\n';
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
