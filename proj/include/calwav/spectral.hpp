#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "calwav/group.hpp"
#include "calwav/linalg.hpp"
#include "calwav/simd/kernels.hpp"
#include "json.hpp"

namespace calwav {

using cplx = std::complex<double>;

/// Regular grid, row-major with the last axis fastest. Used for both
/// frequency and spatial samples.
struct Grid {
  std::vector<long> shape;
  Vec spacing;
  Vec origin;

  int d() const { return static_cast<int>(shape.size()); }
  std::size_t size() const;
  double cell_volume() const;
  Vec point(std::size_t flat) const;
  std::vector<long> unflatten(std::size_t flat) const;
  std::size_t flatten(std::span<const long> idx) const;
  /// Upper corner of the bounding box (origin + (n-1) spacing).
  Vec upper() const;
  bool in_box(std::span<const double> x) const;
  double max_spacing() const;
  bool operator==(const Grid& o) const = default;

  nlohmann::json to_json() const;
  static Grid from_json(const nlohmann::json& j);

  /// n points per axis with spacing 2L/n starting at -L (FFT layout: the
  /// grid contains 0 at index n/2 and stops one step short of +L).
  static Grid centered(std::span<const long> shape, std::span<const double> half_extent);
  /// Frequency grid paired with a spatial grid under the discrete Fourier
  /// transform: spacing 1/(n dx), zero frequency at index n/2.
  static Grid fft_dual(const Grid& spatial);
  /// Spatial grid paired with a frequency grid, centred on zero.
  static Grid fft_dual_spatial(const Grid& freq);
};

using FrequencyGrid = Grid;

/// Invariant frequency set X. `contains` is the raw predicate; `guarded`
/// further drops points within `null_guard` of the singular set (origin and
/// mask boundaries), which is how "almost everywhere" statistics are taken.
class BandMask {
 public:
  simd::MaskParams p;
  int d = 1;
  std::vector<double> signs;  // quadrant sign per axis, 0 = unconstrained
  double null_guard = 0.0;
  std::string name;
  nlohmann::json params = nlohmann::json::object();

  bool contains(std::span<const double> xi) const;
  bool guarded(std::span<const double> xi) const;
  /// Distance from xi to the singular set (origin plus boundary).
  double boundary_distance(std::span<const double> xi) const;
  std::string descriptor() const;
  nlohmann::json to_json() const;
  simd::MaskParams kernel_params() const;
};

/// Names: full, annulus {r1, r2}, halfplane, strip {lo, hi}, halfplane_strip
/// (strip with lo = 0 by default), quadrant {signs: "++", "+-", "+", "-",
/// ...}, cone {slope}. A negative or missing null_guard means "2 x max grid
/// spacing" is filled in later by `with_default_guard`.
BandMask mask_catalog(const std::string& name, const nlohmann::json& params, int d);
BandMask mask_from_json(const nlohmann::json& j, int d);
std::vector<std::string> mask_names();
void with_default_guard(BandMask& m, const Grid& grid);

class SpectralFunction {
 public:
  Grid grid;
  std::vector<cplx> values;
  BandMask mask;

  SpectralFunction() = default;
  SpectralFunction(Grid g, BandMask m);

  /// Samples `fn` on the grid and zeroes it off the mask.
  static SpectralFunction sample(const Grid& g, const BandMask& m, const std::function<cplx(std::span<const double>)>& fn);

  /// Multilinear interpolation renormalized over in-mask corners. Zero
  /// outside the bounding box and off the mask.
  cplx evaluate(std::span<const double> xi) const;
  double l2_norm() const;
  double l2_norm_sq() const;
  /// Sum of |values| weighted by the cell volume (the L1 norm for
  /// nonnegative real functions).
  double l1_norm() const;
  double max_abs() const;
};

double l2_norm(const SpectralFunction& f);
cplx evaluate_offgrid(const SpectralFunction& f, std::span<const double> xi);

/// Owning split-array copy of a 1D or 2D SpectralFunction in the layout the
/// vector kernels consume.
class InterpTable {
 public:
  explicit InterpTable(const SpectralFunction& f);
  InterpTable(const InterpTable&) = delete;
  InterpTable& operator=(const InterpTable&) = delete;

  const simd::Table& view() const { return t_; }
  cplx operator()(double x, double y = 0.0) const;

 private:
  std::vector<double> re_, im_, flag_;
  simd::Table t_;
};

/// Dual matrices M = h^T for every node, in kernel form.
class NodeTable {
 public:
  NodeTable(const QuadratureRule& q, std::span<const double> weights);
  explicit NodeTable(const QuadratureRule& q);
  NodeTable(const NodeTable&) = delete;
  NodeTable& operator=(const NodeTable&) = delete;
  const simd::Nodes& view() const { return n_; }

 private:
  std::vector<double> m00_, m01_, m10_, m11_, w_;
  simd::Nodes n_;
};

struct InvarianceCheck {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double agreement = 1.0;
  std::vector<std::pair<Vec, Vec>> examples;  // up to 10 violating (xi, xi.h)
  bool passed(double threshold = 0.99) const { return checked == 0 || agreement >= threshold; }
  nlohmann::json to_json() const;
};

/// Statistical H-invariance test: for random masked grid points and nodes,
/// mask(xi.h) must agree with mask(xi) whenever xi.h lands in the grid box.
/// Points within the null guard of the singular set are skipped.
InvarianceCheck check_mask_invariance(const GroupModel& g, const BandMask& m, const Grid& grid, const QuadratureRule& q,
                                      std::size_t samples, std::mt19937_64& rng);

}  // namespace calwav
