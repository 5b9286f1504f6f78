#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "calwav/group.hpp"
#include "calwav/spectral.hpp"
#include "json.hpp"

namespace calwav {

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kConfigVersion = 1;

/// Resolved job configuration. `resolved` is the full JSON after defaults
/// and command-line overrides; every output file embeds it.
struct JobConfig {
  nlohmann::json resolved;
  GroupSpec group;
  BandMask mask;
  std::vector<BandMask> bands;  // nonunimodular synthesis bands (default: {mask})
  Grid grid;                    // frequency grid
  double tol = 1e-3;
  double leakage = 0.05;
  double roundtrip_tol = 1e-2;
  std::size_t classify_samples = 0;
  nlohmann::json options = nlohmann::json::object();
  std::filesystem::path out_dir = "calwav_out";
  std::string seed_psi;
  std::string signal;

  int d() const { return group.group.d; }
};

struct Overrides {
  std::optional<std::string> out;
  std::optional<double> tol;
  std::optional<std::vector<int>> resolution;
  std::optional<std::vector<double>> truncation;  // lo_1 hi_1 lo_2 hi_2 ...
  std::optional<std::string> seed_psi;
};

nlohmann::json read_config_file(const std::filesystem::path& path);
nlohmann::json apply_overrides(nlohmann::json j, const Overrides& o);

/// Validates `j` and fills every default. Throws ConfigError.
JobConfig resolve_config(const nlohmann::json& j);

/// Default grid for a dimension: 4096 points on [-8, 8] in 1D, 192^2 on
/// [-6, 6]^2 in 2D, 32^d on [-4, 4]^d otherwise.
nlohmann::json default_grid_json(int d);

}  // namespace calwav
