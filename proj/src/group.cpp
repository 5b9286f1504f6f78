#include "calwav/group.hpp"

#include <cmath>
#include <numbers>

namespace calwav {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double t) {
  double r = std::fmod(t, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r;
}

Mat rotation(double theta) {
  Mat m(2, 2);
  m(0, 0) = std::cos(theta);
  m(0, 1) = -std::sin(theta);
  m(1, 0) = std::sin(theta);
  m(1, 1) = std::cos(theta);
  return m;
}

double unit(const GroupElement&) { return 1.0; }
double unit_density(std::span<const double>) { return 1.0; }

ChartBox box_for(const std::vector<ChartAxis>& axes, double scale_half, double linear_half) {
  ChartBox b;
  for (const auto& ax : axes) {
    switch (ax.kind) {
      case AxisKind::Scale: b.lo.push_back(-scale_half); b.hi.push_back(scale_half); break;
      case AxisKind::Linear: b.lo.push_back(-linear_half); b.hi.push_back(linear_half); break;
      case AxisKind::Angle: b.lo.push_back(0.0); b.hi.push_back(kTwoPi); break;
      case AxisKind::Sign: b.lo.push_back(-1.0); b.hi.push_back(1.0); break;
    }
  }
  return b;
}

}  // namespace

bool ChartBox::empty() const {
  if (lo.empty() || lo.size() != hi.size()) return true;
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(hi[i] > lo[i])) return true;
  return false;
}

bool ChartBox::contains(std::span<const double> c) const {
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] < lo[i] || c[i] > hi[i]) return false;
  return true;
}

nlohmann::json ChartBox::to_json() const { return {{"lo", lo}, {"hi", hi}}; }

GroupElement GroupModel::element(std::span<const double> coords) const {
  if (static_cast<int>(coords.size()) != k) throw Error("chart coordinate count mismatch for " + name);
  GroupElement e{chart(coords), Vec(coords.begin(), coords.end())};
  if (std::abs(e.matrix.det()) <= 1e-12) throw Error("degenerate group element");
  return e;
}

GroupElement GroupModel::from_matrix(const Mat& m) const {
  if (std::abs(m.det()) <= 1e-12) throw Error("degenerate group element");
  return GroupElement{m, chart_inverse(m)};
}

GroupElement GroupModel::compose(const GroupElement& x, const GroupElement& y) const {
  return from_matrix(x.matrix * y.matrix);
}

GroupElement GroupModel::inverse(const GroupElement& x) const { return from_matrix(x.matrix.inverse()); }

double GroupModel::noncompact_radius(std::span<const double> coords) const {
  double s = 0.0;
  for (int i = 0; i < k; ++i) {
    if (axes[i].kind == AxisKind::Scale || axes[i].kind == AxisKind::Linear) {
      const double dv = coords[i] - id_coords[i];
      s += dv * dv;
    }
  }
  return std::sqrt(s);
}

int GroupModel::noncompact_axes() const {
  int n = 0;
  for (const auto& ax : axes) n += (ax.kind == AxisKind::Scale || ax.kind == AxisKind::Linear) ? 1 : 0;
  return n;
}

bool GroupModel::unimodular() const {
  if (discrete) return true;  // SL(2,Z): |det| = 1 with counting measure
  // Probe a 3^k lattice inside the default truncation box.
  std::size_t count = 1;
  for (int i = 0; i < k; ++i) count *= 3;
  Vec c(k);
  for (std::size_t p = 0; p < count; ++p) {
    std::size_t r = p;
    for (int i = 0; i < k; ++i) {
      const double frac = 0.15 + 0.35 * static_cast<double>(r % 3);
      r /= 3;
      const double lo = default_truncation.lo[i], hi = default_truncation.hi[i];
      c[i] = axes[i].kind == AxisKind::Sign ? (frac < 0.5 ? -1.0 : 1.0) : lo + frac * (hi - lo);
    }
    if (std::abs(modular_G(*this, element(c)) - 1.0) > 1e-12) return false;
  }
  return true;
}

Vec dual_action(const GroupModel& g, std::span<const double> xi, const GroupElement& h) {
  if (static_cast<int>(xi.size()) != g.d) throw Error("frequency dimension mismatch");
  if (std::abs(h.matrix.det()) <= 1e-12) throw Error("degenerate group element");
  Vec out(g.d, 0.0);
  for (int r = 0; r < g.d; ++r) {
    double s = 0.0;
    for (int c = 0; c < g.d; ++c) s += h.matrix(c, r) * xi[c];
    out[r] = s;
  }
  return out;
}

double modular_G(const GroupModel& g, const GroupElement& h) { return g.modular_H(h) / g.dilation_modulus(h); }

std::vector<std::string> builtin_group_names() {
  return {"dilation1d_full", "dilation1d_pos", "diag_pos", "similitude2", "shear_scale2", "shear2", "rotation2", "sl2z_demo"};
}

GroupModel builtin_group(const std::string& name, const nlohmann::json& params) {
  GroupModel g;
  g.name = name;
  g.params = params.is_null() ? nlohmann::json::object() : params;
  g.haar_density = unit_density;
  g.modular_H = unit;

  if (name == "dilation1d_pos") {
    g.d = 1;
    g.axes = {{AxisKind::Scale, "t"}};
    g.chart = [](std::span<const double> c) { return Mat::diag(std::vector<double>{std::exp(c[0])}); };
    g.chart_inverse = [](const Mat& m) {
      if (m(0, 0) <= 0) throw Error("matrix is not in dilation1d_pos");
      return Vec{std::log(m(0, 0))};
    };
    g.dilation_modulus = [](const GroupElement& h) { return std::exp(h.coords[0]); };
  } else if (name == "dilation1d_full") {
    g.d = 1;
    g.axes = {{AxisKind::Scale, "t"}, {AxisKind::Sign, "sign"}};
    g.chart = [](std::span<const double> c) {
      return Mat::diag(std::vector<double>{(c[1] < 0 ? -1.0 : 1.0) * std::exp(c[0])});
    };
    g.chart_inverse = [](const Mat& m) { return Vec{std::log(std::abs(m(0, 0))), m(0, 0) < 0 ? -1.0 : 1.0}; };
    g.dilation_modulus = [](const GroupElement& h) { return std::exp(h.coords[0]); };
  } else if (name == "diag_pos") {
    const int d = g.params.value("d", 2);
    if (d < 1 || d > 4) throw Error("diag_pos supports 1 <= d <= 4");
    g.params["d"] = d;
    g.d = d;
    for (int i = 0; i < d; ++i) g.axes.push_back({AxisKind::Scale, "t" + std::to_string(i + 1)});
    g.chart = [](std::span<const double> c) {
      Vec e(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) e[i] = std::exp(c[i]);
      return Mat::diag(e);
    };
    g.chart_inverse = [d](const Mat& m) {
      Vec c(d);
      for (int i = 0; i < d; ++i) {
        if (m(i, i) <= 0) throw Error("matrix is not in diag_pos");
        c[i] = std::log(m(i, i));
      }
      return c;
    };
    g.dilation_modulus = [](const GroupElement& h) {
      double s = 0.0;
      for (double t : h.coords) s += t;
      return std::exp(s);
    };
  } else if (name == "similitude2") {
    g.d = 2;
    g.axes = {{AxisKind::Scale, "t"}, {AxisKind::Angle, "theta"}};
    g.chart = [](std::span<const double> c) {
      Mat r = rotation(c[1]);
      for (double& v : r.a) v *= std::exp(c[0]);
      return r;
    };
    g.chart_inverse = [](const Mat& m) {
      return Vec{0.5 * std::log(std::abs(m.det())), wrap_angle(std::atan2(m(1, 0), m(0, 0)))};
    };
    g.dilation_modulus = [](const GroupElement& h) { return std::exp(2.0 * h.coords[0]); };
  } else if (name == "rotation2") {
    g.d = 2;
    g.axes = {{AxisKind::Angle, "theta"}};
    g.chart = [](std::span<const double> c) { return rotation(c[0]); };
    g.chart_inverse = [](const Mat& m) { return Vec{wrap_angle(std::atan2(m(1, 0), m(0, 0)))}; };
    g.dilation_modulus = unit;
  } else if (name == "shear_scale2") {
    // h = diag(a, sqrt a) [[1, s], [0, 1]] with a = e^t. Left Haar measure
    // is da/a ds = dt ds; right translation by (t0, s0) stretches s by
    // e^{-t0/2}, so Delta_H(h) = a^{-1/2}.
    g.d = 2;
    g.axes = {{AxisKind::Scale, "t"}, {AxisKind::Linear, "s"}};
    g.chart = [](std::span<const double> c) {
      const double a = std::exp(c[0]);
      Mat m(2, 2);
      m(0, 0) = a;
      m(0, 1) = a * c[1];
      m(1, 1) = std::sqrt(a);
      return m;
    };
    g.chart_inverse = [](const Mat& m) {
      if (m(0, 0) <= 0 || std::abs(m(1, 0)) > 1e-9) throw Error("matrix is not in shear_scale2");
      return Vec{std::log(m(0, 0)), m(0, 1) / m(0, 0)};
    };
    g.modular_H = [](const GroupElement& h) { return std::exp(-0.5 * h.coords[0]); };
    g.dilation_modulus = [](const GroupElement& h) { return std::exp(1.5 * h.coords[0]); };
  } else if (name == "shear2") {
    g.d = 2;
    g.axes = {{AxisKind::Linear, "s"}};
    g.chart = [](std::span<const double> c) {
      Mat m = Mat::identity(2);
      m(0, 1) = c[0];
      return m;
    };
    g.chart_inverse = [](const Mat& m) { return Vec{m(0, 1)}; };
    g.dilation_modulus = unit;
  } else if (name == "sl2z_demo") {
    g.d = 2;
    g.discrete = true;
    g.chart = [](std::span<const double>) { return Mat::identity(2); };
    g.chart_inverse = [](const Mat&) { return Vec{}; };
    g.dilation_modulus = unit;
  } else {
    throw Error("unknown group: " + name);
  }

  g.k = static_cast<int>(g.axes.size());
  for (const auto& ax : g.axes) g.id_coords.push_back(ax.kind == AxisKind::Sign ? 1.0 : 0.0);
  const double scale_half = g.params.value("scale_half_range", 4.0);
  const double linear_half = g.params.value("shear_half_range", 4.0);
  g.default_truncation = box_for(g.axes, scale_half, linear_half);
  return g;
}

GroupSpec parse_group_spec(const nlohmann::json& j) {
  if (!j.contains("name")) throw Error("group spec needs a name");
  GroupSpec s{builtin_group(j.at("name").get<std::string>(), j.value("params", nlohmann::json::object())), {}, {}};
  s.truncation = s.group.default_truncation;
  if (j.contains("truncation")) {
    const auto& t = j.at("truncation");
    s.truncation.lo = t.at("lo").get<Vec>();
    s.truncation.hi = t.at("hi").get<Vec>();
  }
  if (j.contains("resolution")) {
    s.resolution = j.at("resolution").get<std::vector<int>>();
  } else {
    for (const auto& ax : s.group.axes) s.resolution.push_back(ax.kind == AxisKind::Sign ? 2 : 64);
  }
  return s;
}

}  // namespace calwav
