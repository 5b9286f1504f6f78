#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "calwav/commands.hpp"
#include "calwav/config.hpp"
#include "calwav/group.hpp"
#include "calwav/spectral.hpp"
#include "json.hpp"

namespace calwav::cli {

/// Output file under cfg.out_dir with the resolved config embedded.
void write_report(const JobConfig& cfg, const std::string& name, nlohmann::json report);
std::filesystem::path out_path(const JobConfig& cfg, const std::string& name);

QuadratureRule quadrature_for(const JobConfig& cfg);
void require_continuous(const JobConfig& cfg, const char* command);
/// Rejects (group, mask) pairs whose mask is not H-invariant on the grid.
void require_invariant(const JobConfig& cfg, const BandMask& mask, const QuadratureRule& q);

/// (1 + |xi - c|^2 / sigma^2)^{-2} on the mask, from options seed_sigma and
/// seed_center.
SpectralFunction default_seed(const JobConfig& cfg, const Grid& grid, const BandMask& mask);
/// seed_psi file if configured, otherwise the default seed.
SpectralFunction load_seed(const JobConfig& cfg, const BandMask& mask);

Vec random_coords(const GroupModel& g, const ChartBox& box, std::mt19937_64& rng);

}  // namespace calwav::cli
