#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "calwav/group.hpp"
#include "calwav/spectral.hpp"
#include "json.hpp"

namespace calwav {

/// sum_i w_i |psi_hat(xi.h_i)|^2. The report stores this un-rooted integral.
double calderon_integral(const GroupModel& g, const SpectralFunction& psi_hat, std::span<const double> xi,
                         const QuadratureRule& q);

/// Batched variant over many frequencies (vector kernels for d <= 2).
/// `mode` Power gives the Calderon integral, Real the linear orbit integral
/// sum_i w_i Re f(xi.h_i).
std::vector<double> orbit_field(const GroupModel& g, const SpectralFunction& f, const std::vector<Vec>& points,
                                const QuadratureRule& q, simd::Accum mode = simd::Accum::Power);

enum class Verdict { Admissible, WeaklyAdmissible, NotWeaklyAdmissible, Inconclusive };
std::string to_string(Verdict v);

struct ClassifyOptions {
  double tol = 1e-3;
  /// 0 means every guarded masked grid point.
  std::size_t sample_count = 0;
  double leakage_limit = 0.05;
  /// ess_inf / ess_sup at or below `zero_ratio` reads as "vanishes on a
  /// set of positive measure"; up to `gap_ratio` it is inconclusive.
  double zero_ratio = 1e-12;
  double gap_ratio = 1e-9;
  std::uint64_t seed = 1;
};

struct CalderonReport {
  std::vector<Vec> points;
  std::vector<double> phi;
  std::vector<double> phi_extended;
  std::vector<bool> counted;
  double ess_inf = 0.0;
  double ess_sup = 0.0;
  double max_deviation = 0.0;  // max |Phi - 1| over counted samples
  double truncation_leakage = 0.0;
  double edge_fraction = 0.0;  // share of ||psi||^2 in the outer two grid cells
  double leakage = 0.0;
  double offgrid_mass = 0.0;  // share of quadrature weight landing outside the grid
  std::size_t excluded = 0;
  Verdict verdict = Verdict::Inconclusive;
  double tolerance_used = 0.0;
  nlohmann::json truncation;

  nlohmann::json to_json(bool with_samples = false) const;
};

CalderonReport classify(const GroupModel& g, const SpectralFunction& psi_hat, const BandMask& mask,
                        const QuadratureRule& q, const ClassifyOptions& opt = {});

/// phi = psi0_hat / sqrt(Phi). Throws if Phi falls below 1e-12 at a guarded
/// masked grid point. Further passes divide by the Calderon integral of the
/// previous result; the iterate closest to Phi == 1 on guarded points is kept.
SpectralFunction normalize_to_admissible(const GroupModel& g, const SpectralFunction& psi0_hat, const QuadratureRule& q,
                                         int passes = 8);

struct Cell {
  std::function<bool(std::span<const double>)> contains;
  double measure = -1.0;  // < 0: computed on the grid
  std::string name;
};
Cell cell_from_mask(const BandMask& m);

struct WeakNormalizerResult {
  SpectralFunction phi;
  double min_orbit_integral = 0.0;  // over sampled points of the support
  double max_orbit_integral = 0.0;
  double total_integral = 0.0;      // sum phi * cell volume
  std::vector<double> cell_measures;
  bool verified = false;
  nlohmann::json to_json() const;
};

/// phi2 = min(1, phi1) / (2^n (1 + lambda(X_n))) on X_n, then
/// phi = phi2 / (1 + int_H phi2(xi.h) dh).
WeakNormalizerResult weak_admissibility_normalizer(const GroupModel& g, const SpectralFunction& phi1,
                                                   const std::vector<Cell>& partition, const QuadratureRule& q);

struct Mollifier {
  std::vector<GroupElement> elements;
  std::vector<double> weights;  // quadrature weight times nu, normalized
  double width = 0.0;
};

/// Smooth bump of chart radius `width` around the identity on a local
/// quadrature, normalized so that sum w nu / Delta_H = 1.
Mollifier make_mollifier(const GroupModel& g, double width, const ChartBox& truncation, int nodes_per_axis = 17);

/// phi(xi) = int_H phi0(xi.g) nu(g) dg.
SpectralFunction mollify(const GroupModel& g, const SpectralFunction& phi, double nu_width, const QuadratureRule& q);
SpectralFunction mollify(const GroupModel& g, const SpectralFunction& phi, const Mollifier& nu);

struct SeriesReport {
  Vec h0_coords;
  double delta_G_h0 = 0.0;
  double delta_H_h0 = 0.0;
  std::vector<int> k;
  std::vector<double> band_norm_sq;  // ||1_{V_n} phi||^2
  std::vector<double> term_norm_sq;  // ||1_{V_n} nu||^2
  double nu_norm_sq = 0.0;
  double bound = 0.0;                // sum 2^{-k_n} ||1_{V_n} phi||^2
  double tail = 0.0;
  nlohmann::json to_json() const;
};

/// Smallest-chart-norm node with Delta_G < 1/2 (lexicographic tie-break).
GroupElement pick_h0(const GroupModel& g, const QuadratureRule& q);

/// nu = sum_n Delta_H(h0)^{k_n/2} phi(xi.h0^{k_n}) restricted to V_n.
SpectralFunction synthesize_nonunimodular(const GroupModel& g, const SpectralFunction& phi,
                                          const std::vector<BandMask>& bands, const QuadratureRule& q,
                                          SeriesReport* report = nullptr);

/// Copy of f with values zeroed outside `band` (the mask of f is kept).
SpectralFunction restrict_to(const SpectralFunction& f, const BandMask& band);

}  // namespace calwav
