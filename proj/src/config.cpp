#include "calwav/config.hpp"

#include <fstream>
#include <set>

namespace calwav {

using nlohmann::json;

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

json apply_overrides(json j, const Overrides& o) {
  if (o.out) j["output"]["dir"] = *o.out;
  if (o.tol) j["tolerances"]["classify"] = *o.tol;
  if (o.resolution) j["group"]["resolution"] = *o.resolution;
  if (o.truncation) {
    const auto& t = *o.truncation;
    if (t.size() % 2 != 0) throw ConfigError("--truncation takes lo/hi pairs per chart axis");
    json lo = json::array(), hi = json::array();
    for (std::size_t i = 0; i < t.size(); i += 2) {
      lo.push_back(t[i]);
      hi.push_back(t[i + 1]);
    }
    j["group"]["truncation"] = {{"lo", lo}, {"hi", hi}};
  }
  if (o.seed_psi) j["seed_psi"] = *o.seed_psi;
  return j;
}

json default_grid_json(int d) {
  if (d == 1) return {{"shape", {4096}}, {"half_extent", {8.0}}};
  if (d == 2) return {{"shape", {192, 192}}, {"half_extent", {6.0, 6.0}}};
  return {{"shape", std::vector<long>(d, 32)}, {"half_extent", std::vector<double>(d, 4.0)}};
}

namespace {

const std::set<std::string> kTopLevel = {"version", "group", "mask", "bands", "grid", "tolerances",
                                         "classify", "options", "output", "seed_psi", "signal", "command"};

double positive(const json& t, const char* key, double fallback) {
  const double v = t.value(key, fallback);
  if (!(v > 0.0)) throw ConfigError(std::string("tolerance '") + key + "' must be > 0");
  return v;
}

}  // namespace

JobConfig resolve_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items())
    if (!kTopLevel.count(key)) throw ConfigError("unknown config key '" + key + "'");
  if (!j.contains("version")) throw ConfigError("config needs a version field");
  if (!j["version"].is_number_integer() || j["version"].get<int>() != kConfigVersion)
    throw ConfigError("unsupported config version (expected " + std::to_string(kConfigVersion) + ")");
  if (!j.contains("group") || !j["group"].is_object()) throw ConfigError("config needs a group object");

  JobConfig c;
  try {
    c.group = parse_group_spec(j["group"]);
    const int d = c.d();
    const json gj = j.value("grid", default_grid_json(d));
    if (gj.contains("spacing")) {
      c.grid = Grid::from_json(gj);
    } else {
      const auto shape = gj.at("shape").get<std::vector<long>>();
      const auto half = gj.at("half_extent").get<std::vector<double>>();
      if (static_cast<int>(shape.size()) != d || static_cast<int>(half.size()) != d)
        throw ConfigError("grid shape/half_extent must have one entry per dimension");
      for (long n : shape)
        if (n < 2) throw ConfigError("grid shape entries must be >= 2");
      for (double h : half)
        if (!(h > 0.0)) throw ConfigError("grid half_extent entries must be > 0");
      c.grid = Grid::centered(shape, half);
    }
    if (c.grid.d() != d) throw ConfigError("grid dimension does not match the group");

    c.mask = mask_from_json(j.value("mask", json("full")), d);
    with_default_guard(c.mask, c.grid);
    if (j.contains("bands")) {
      for (const auto& b : j["bands"]) {
        BandMask m = mask_from_json(b, d);
        with_default_guard(m, c.grid);
        c.bands.push_back(m);
      }
    } else {
      c.bands = {c.mask};
    }

    const json t = j.value("tolerances", json::object());
    c.tol = positive(t, "classify", 1e-3);
    c.leakage = positive(t, "leakage", 0.05);
    c.roundtrip_tol = positive(t, "roundtrip", 1e-2);
    const json cl = j.value("classify", json::object());
    c.classify_samples = cl.value("samples", std::size_t{0});
    c.options = j.value("options", json::object());
    if (!c.options.is_object()) throw ConfigError("options must be an object");
    c.out_dir = j.value("output", json::object()).value("dir", std::string("calwav_out"));
    c.seed_psi = j.value("seed_psi", std::string());
    c.signal = j.value("signal", std::string());
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  json bands = json::array();
  for (const auto& b : c.bands) bands.push_back(b.to_json());
  json group = {{"name", c.group.group.name},
                {"params", c.group.group.params},
                {"truncation", c.group.truncation.to_json()},
                {"resolution", c.group.resolution}};
  c.resolved = {{"version", kConfigVersion},
                {"group", group},
                {"mask", c.mask.to_json()},
                {"bands", bands},
                {"grid", c.grid.to_json()},
                {"tolerances", {{"classify", c.tol}, {"leakage", c.leakage}, {"roundtrip", c.roundtrip_tol}}},
                {"classify", {{"samples", c.classify_samples}}},
                {"options", c.options},
                {"output", {{"dir", c.out_dir.string()}}},
                {"seed_psi", c.seed_psi},
                {"signal", c.signal}};
  if (j.contains("command")) c.resolved["command"] = j["command"];
  return c;
}

}  // namespace calwav
