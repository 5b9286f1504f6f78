#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "calwav/linalg.hpp"
#include "json.hpp"

namespace calwav {

/// Raised for invalid input that a caller can correct (bad names, bad boxes,
/// singular elements).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Chart axis types. Scale axes carry log coordinates (a = e^t), which makes
/// the Haar density constant along them.
enum class AxisKind { Scale, Linear, Angle, Sign };

struct ChartAxis {
  AxisKind kind;
  std::string name;
};

/// Axis-aligned box in chart coordinates. Angle axes ignore it (always the
/// full circle) and Sign axes always use both components.
struct ChartBox {
  Vec lo;
  Vec hi;

  bool empty() const;
  bool contains(std::span<const double> c) const;
  nlohmann::json to_json() const;
};

struct GroupElement {
  Mat matrix;
  Vec coords;
};

class GroupModel {
 public:
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  int d = 0;
  int k = 0;
  std::vector<ChartAxis> axes;
  Vec id_coords;
  ChartBox default_truncation;
  bool discrete = false;

  std::function<Mat(std::span<const double>)> chart;
  std::function<Vec(const Mat&)> chart_inverse;
  std::function<double(std::span<const double>)> haar_density;
  std::function<double(const GroupElement&)> modular_H;
  std::function<double(const GroupElement&)> dilation_modulus;

  GroupElement element(std::span<const double> coords) const;
  GroupElement from_matrix(const Mat& m) const;
  GroupElement identity() const { return element(id_coords); }
  GroupElement compose(const GroupElement& x, const GroupElement& y) const;
  GroupElement inverse(const GroupElement& x) const;

  /// Chart distance from the identity, measured on noncompact axes only
  /// (compact and discrete axes are bounded by construction).
  double noncompact_radius(std::span<const double> coords) const;
  int noncompact_axes() const;

  /// Sampled check that Delta_G = Delta_H / delta is identically one.
  bool unimodular() const;
};

/// xi.h = h^T xi, the dual action on characters x -> exp(2 pi i xi.x).
Vec dual_action(const GroupModel& g, std::span<const double> xi, const GroupElement& h);

double modular_G(const GroupModel& g, const GroupElement& h);

/// Builtin catalog: dilation1d_full, dilation1d_pos, diag_pos (params.d),
/// similitude2, shear_scale2, shear2, rotation2, sl2z_demo.
GroupModel builtin_group(const std::string& name, const nlohmann::json& params = nlohmann::json::object());
std::vector<std::string> builtin_group_names();

/// Tensor-product midpoint rule on noncompact axes, periodic trapezoid on
/// circles, both components on sign axes. Weights include the Haar density.
struct QuadratureRule {
  std::vector<Vec> nodes;
  std::vector<double> weights;
  ChartBox truncation;
  std::vector<int> resolution;

  std::vector<GroupElement> elements;
  std::vector<double> delta;    // dilation modulus per node
  std::vector<double> modular;  // Delta_H per node

  std::size_t size() const { return nodes.size(); }
  double total_weight() const;
  nlohmann::json descriptor() const;
};

QuadratureRule build_quadrature(const GroupModel& g, std::span<const int> resolution, const ChartBox& truncation);

/// Same spacing as `q` on an enlarged box (noncompact axes stretched by
/// `factor` about the box centre). Used to detect truncation-limited orbits.
QuadratureRule extended_quadrature(const GroupModel& g, const QuadratureRule& q, double factor = 2.0);

/// Parse {"name", "params", "truncation": {"lo","hi"}, "resolution": [...]}.
struct GroupSpec {
  GroupModel group;
  ChartBox truncation;
  std::vector<int> resolution;
};
GroupSpec parse_group_spec(const nlohmann::json& j);

}  // namespace calwav
