#include "calwav/raster_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace calwav {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'C', 'W', 'R', 'A', 'S', 'T', '0', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw Error("truncated raster file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  return os;
}

}  // namespace

void write_raster(const std::filesystem::path& path, const Grid& grid, std::span<const cplx> data, json header) {
  if (data.size() != grid.size()) throw Error("raster payload does not match grid size");
  header["grid"] = grid.to_json();
  header["format"] = "CWRAST01";
  header["encoding"] = "float64-le interleaved re,im";
  const std::string h = header.dump();
  std::ofstream os = open_out(path, true);
  os.write(kMagic, 8);
  put_u64(os, h.size());
  os.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const cplx& v : data) {
    put_u64(os, std::bit_cast<std::uint64_t>(v.real()));
    put_u64(os, std::bit_cast<std::uint64_t>(v.imag()));
  }
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

Raster read_raster(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw Error("'" + path.string() + "' is not a raster file");
  const std::uint64_t len = get_u64(is);
  if (len > (1u << 30)) throw Error("raster header too large");
  std::string h(len, '\0');
  if (!is.read(h.data(), static_cast<std::streamsize>(len))) throw Error("truncated raster header");
  Raster r;
  try {
    r.header = json::parse(h);
    r.grid = Grid::from_json(r.header.at("grid"));
  } catch (const json::exception& e) {
    throw Error(std::string("bad raster header: ") + e.what());
  }
  r.data.resize(r.grid.size());
  for (cplx& v : r.data) {
    const double re = std::bit_cast<double>(get_u64(is));
    const double im = std::bit_cast<double>(get_u64(is));
    v = {re, im};
  }
  return r;
}

void save_spectral(const std::filesystem::path& path, const SpectralFunction& f, const json& config,
                   const std::string& kind) {
  json h = {{"kind", kind}, {"mask", f.mask.to_json()}, {"mask_descriptor", f.mask.descriptor()}, {"config", config}};
  write_raster(path, f.grid, f.values, h);
}

SpectralFunction load_spectral(const std::filesystem::path& path) {
  Raster r = read_raster(path);
  BandMask m = r.header.contains("mask") ? mask_from_json(r.header.at("mask"), r.grid.d())
                                         : mask_catalog("full", json::object(), r.grid.d());
  SpectralFunction f(r.grid, m);
  for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] = f.mask.contains(r.grid.point(k)) ? r.data[k] : 0.0;
  return f;
}

void write_csv(const std::filesystem::path& path, const Grid& grid, std::span<const cplx> data, const json& config) {
  if (data.size() != grid.size()) throw Error("csv payload does not match grid size");
  std::ofstream os = open_out(path, false);
  os << "# config: " << config.dump() << "\n";
  const int d = grid.d();
  const int shown = std::min(d, 2);
  for (int a = 0; a < shown; ++a) os << "xi" << a << ",";
  os << "re,im,abs\n";
  os << std::setprecision(17);
  std::vector<long> idx(d);
  for (int a = shown; a < d; ++a) idx[a] = grid.shape[a] / 2;
  const long n0 = grid.shape[0];
  const long n1 = shown == 2 ? grid.shape[1] : 1;
  for (long i = 0; i < n0; ++i)
    for (long j = 0; j < n1; ++j) {
      idx[0] = i;
      if (shown == 2) idx[1] = j;
      const cplx v = data[grid.flatten(idx)];
      os << grid.origin[0] + static_cast<double>(i) * grid.spacing[0] << ",";
      if (shown == 2) os << grid.origin[1] + static_cast<double>(j) * grid.spacing[1] << ",";
      os << v.real() << "," << v.imag() << "," << std::abs(v) << "\n";
    }
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows, const json& config) {
  std::ofstream os = open_out(path, false);
  os << "# config: " << config.dump() << "\n";
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << "\n" << std::setprecision(17);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << "\n";
  }
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace calwav
