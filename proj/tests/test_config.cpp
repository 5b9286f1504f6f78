#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sys/wait.h>

#include "calwav/commands.hpp"
#include "calwav/config.hpp"
#include "calwav/raster_io.hpp"
#include "support.hpp"

namespace calwav {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class ConfigTest : public ::testing::Test {
 protected:
  fs::path dir;
  void SetUp() override {
    dir = fs::temp_directory_path() / ("calwav_cfg_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  json base(const std::string& group = "rotation2") const {
    return {{"version", 1},
            {"group", {{"name", group}}},
            {"grid", {{"shape", {64, 64}}, {"half_extent", {4.0, 4.0}}}},
            {"output", {{"dir", dir.string()}}}};
  }
};

TEST_F(ConfigTest, DefaultsAreFilled) {
  const JobConfig c = resolve_config(base());
  EXPECT_EQ(c.group.group.name, "rotation2");
  EXPECT_EQ(c.mask.name, "full");
  EXPECT_DOUBLE_EQ(c.tol, 1e-3);
  EXPECT_DOUBLE_EQ(c.leakage, 0.05);
  EXPECT_DOUBLE_EQ(c.roundtrip_tol, 1e-2);
  EXPECT_EQ(c.bands.size(), 1u);
  EXPECT_GT(c.mask.null_guard, 0.0);
  EXPECT_EQ(c.resolved.at("group").at("name"), "rotation2");

  json j = base("dilation1d_pos");
  j.erase("grid");
  const JobConfig d = resolve_config(j);
  EXPECT_EQ(d.grid.shape, (std::vector<long>{4096}));
}

TEST_F(ConfigTest, RejectsInvalidInput) {
  EXPECT_THROW(resolve_config(json::array()), ConfigError);
  json j = base();
  j["colour"] = "blue";
  EXPECT_THROW(resolve_config(j), ConfigError);
  j = base();
  j.erase("version");
  EXPECT_THROW(resolve_config(j), ConfigError);
  j = base();
  j["version"] = 2;
  EXPECT_THROW(resolve_config(j), ConfigError);
  j = base();
  j["group"]["name"] = "lorentz";
  EXPECT_THROW(resolve_config(j), ConfigError);
  j = base();
  j["grid"]["shape"] = {64};
  EXPECT_THROW(resolve_config(j), ConfigError);
  j = base();
  j["grid"]["half_extent"] = {4.0, -1.0};
  EXPECT_THROW(resolve_config(j), ConfigError);
  j = base();
  j["tolerances"] = {{"classify", 0.0}};
  EXPECT_THROW(resolve_config(j), ConfigError);
  j = base();
  j["mask"] = {{"name", "annulus"}, {"params", {{"r1", 3.0}, {"r2", 1.0}}}};
  EXPECT_THROW(resolve_config(j), ConfigError);
}

TEST_F(ConfigTest, OverridesApply) {
  Overrides o;
  o.tol = 5e-3;
  o.resolution = std::vector<int>{32};
  o.truncation = std::vector<double>{-3.0, 3.0};
  o.out = (dir / "other").string();
  const JobConfig c = resolve_config(apply_overrides(base(), o));
  EXPECT_DOUBLE_EQ(c.tol, 5e-3);
  EXPECT_EQ(c.group.resolution, (std::vector<int>{32}));
  EXPECT_DOUBLE_EQ(c.group.truncation.lo[0], -3.0);
  EXPECT_EQ(c.out_dir, dir / "other");
  Overrides bad;
  bad.truncation = std::vector<double>{1.0};
  EXPECT_THROW(apply_overrides(base(), bad), ConfigError);
}

TEST_F(ConfigTest, ReadsFiles) {
  std::ofstream(dir / "a.json") << base().dump();
  EXPECT_EQ(read_config_file(dir / "a.json"), base());
  std::ofstream(dir / "b.json") << "{ not json";
  EXPECT_THROW(read_config_file(dir / "b.json"), ConfigError);
  EXPECT_THROW(read_config_file(dir / "missing.json"), ConfigError);
}

TEST_F(ConfigTest, ExitCodes) {
  {
    json j = base();
    j["mask"] = {{"name", "annulus"}, {"params", {{"r1", 1.0}, {"r2", 2.0}}}};
    const CommandResult r = run_command("synthesize", resolve_config(j));
    EXPECT_EQ(r.exit_code, kExitOk) << r.message;
    EXPECT_TRUE(fs::exists(dir / "admissible.cwr"));
    EXPECT_TRUE(fs::exists(dir / "synthesize_report.json"));

    j["seed_psi"] = (dir / "admissible.cwr").string();
    const CommandResult c = run_command("classify", resolve_config(j));
    EXPECT_EQ(c.exit_code, kExitOk) << c.message;
    EXPECT_EQ(c.report.at("verdict"), "admissible");
  }
  {
    const CommandResult r = run_command("synthesize", resolve_config(base()));
    EXPECT_EQ(r.exit_code, kExitNoAdmissible) << r.message;
  }
  {
    // A ring seed leaves the rest of the plane without orbit mass.
    json j = base();
    const JobConfig cfg = resolve_config(j);
    const SpectralFunction ring = SpectralFunction::sample(cfg.grid, cfg.mask, [](std::span<const double> x) {
      const double u = (std::hypot(x[0], x[1]) - 1.5) / 0.5;
      return cplx(std::abs(u) < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0, 0.0);
    });
    save_spectral(dir / "ring.cwr", ring, cfg.resolved);
    j["seed_psi"] = (dir / "ring.cwr").string();
    j["classify"] = {{"samples", 800}};
    EXPECT_EQ(run_command("classify", resolve_config(j)).exit_code, kExitNotWeaklyAdmissible);
    EXPECT_EQ(run_command("synthesize", resolve_config(j)).exit_code, kExitNotWeaklyAdmissible);
  }
  EXPECT_EQ(run_command("classify", resolve_config(base())).exit_code, kExitConfig);
  EXPECT_EQ(run_command("transmogrify", resolve_config(base())).exit_code, kExitConfig);
  {
    json j = base();
    j["seed_psi"] = (dir / "nothing.cwr").string();
    EXPECT_EQ(run_command("classify", resolve_config(j)).exit_code, kExitConfig);
  }
  {
    json j = base();
    j.erase("grid");
    j["group"] = {{"name", "sl2z_demo"}};
    EXPECT_EQ(run_command("classify", resolve_config(j)).exit_code, kExitConfig);
    j["options"] = {{"samples", 3}, {"max_length", 8}, {"entry_cap", 30}};
    EXPECT_EQ(run_command("sl2z-demo", resolve_config(j)).exit_code, kExitOk);
    EXPECT_TRUE(fs::exists(dir / "sl2z_partial_sums.csv"));
  }
}

TEST_F(ConfigTest, GroupInfoReport) {
  const CommandResult r = run_command("group-info", resolve_config(base("shear_scale2")));
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_EQ(r.report.at("unimodular_G"), false);
  EXPECT_LT(r.report.at("homomorphism").at("modular_G_max_rel_err").get<double>(), 1e-12);
  EXPECT_TRUE(fs::exists(dir / "group_info.json"));
  json saved;
  std::ifstream(dir / "group_info.json") >> saved;
  EXPECT_EQ(saved.at("name"), "shear_scale2");
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CALWAV_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(ConfigTest, CommandLineExitCodes) {
  std::ofstream(dir / "ok.json") << base().dump();
  EXPECT_EQ(run_cli("group-info --config " + (dir / "ok.json").string()), kExitOk);
  EXPECT_EQ(run_cli("group-info --config " + (dir / "missing.json").string()), kExitConfig);
  json bad = base();
  bad["surprise"] = 1;
  std::ofstream(dir / "bad.json") << bad.dump();
  EXPECT_EQ(run_cli("group-info --config " + (dir / "bad.json").string()), kExitConfig);
  EXPECT_NE(run_cli("frobnicate"), kExitOk);
  EXPECT_EQ(run_cli("group-info --resolution 12 --config " + (dir / "ok.json").string()), kExitOk);
}

}  // namespace
}  // namespace calwav
