#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "calwav/spectral.hpp"
#include "json.hpp"

namespace calwav {

/// Binary raster: 8-byte magic "CWRAST01", little-endian uint64 header
/// length, UTF-8 JSON header (grid, kind, mask, config, ...), then
/// little-endian float64 (re, im) pairs in grid order.
struct Raster {
  nlohmann::json header;
  Grid grid;
  std::vector<cplx> data;
};

void write_raster(const std::filesystem::path& path, const Grid& grid, std::span<const cplx> data,
                  nlohmann::json header);
Raster read_raster(const std::filesystem::path& path);

void save_spectral(const std::filesystem::path& path, const SpectralFunction& f, const nlohmann::json& config,
                   const std::string& kind = "spectral");
SpectralFunction load_spectral(const std::filesystem::path& path);

/// CSV export: a "# config: {...}" comment line, then one row per grid
/// point with coordinates, re, im, abs. Grids with d > 2 are sliced through
/// the central index of the trailing axes.
void write_csv(const std::filesystem::path& path, const Grid& grid, std::span<const cplx> data,
               const nlohmann::json& config);

/// Plain table CSV with the same config comment line.
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows, const nlohmann::json& config);

}  // namespace calwav
