#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calwav/group.hpp"
#include "calwav/spectral.hpp"
#include "json.hpp"

namespace calwav {

struct EpsilonProbe {
  bool bounded = false;
  bool infinite = false;  // hits reach the outermost shell
  double bounding_radius = 0.0;
  double eps = 0.0;
  int last_hit_shell = -1;
  std::vector<int> shell_hits;
  double spread = 0.0;  // largest chart distance from the identity among hits
  nlohmann::json to_json() const;
};

/// Fixed sample lattice over a chart box, organised in geometric shells of
/// noncompact chart radius. Built once and reused for many probes.
class ProbeLattice {
 public:
  ProbeLattice(const GroupModel& g, const ChartBox& search_box, int shells = 20, double factor = 1.5);

  EpsilonProbe probe(std::span<const double> xi, double eps) const;
  int shells() const { return shells_; }
  const std::vector<double>& radii() const { return radii_; }

 private:
  const GroupModel* g_;
  int shells_;
  std::vector<double> radii_;       // outer radius of each shell
  std::vector<int> shell_of_;       // per sample
  std::vector<double> dual_;        // per sample, row-major h^T
  std::vector<double> chart_dist_;  // per sample
};

/// {h : |xi.h - xi| < eps} sampled over geometric shells (factor 1.5, 20 by
/// default). Bounded iff hits stop before the outermost shell.
EpsilonProbe probe_epsilon_stabilizer(const GroupModel& g, std::span<const double> xi, double eps,
                                      const ChartBox& search_box, int shells = 20, double factor = 1.5);

enum class StabilizerClass { Trivial, CompactNontrivial, Noncompact, Undetermined };
std::string to_string(StabilizerClass c);

/// Classify from the probe at eps and eps/10: a bounded probe whose hit set
/// shrinks with eps is trivial, one that keeps its spread is compact.
StabilizerClass classify_stabilizer(const ProbeLattice& lattice, std::span<const double> xi, double eps,
                                    EpsilonProbe* at_eps = nullptr);

struct TransversalSplit {
  Vec coords;
  GroupElement h;
};

/// Closed-form transversal C with xi = param(coords).h.
struct TransversalModel {
  std::string description;
  int m = 0;
  std::vector<bool> continuous;  // per coordinate
  ChartBox domain;               // bounds per coordinate (discrete ones are sets of +-1)
  std::vector<Vec> discrete_values;  // admissible values of the discrete coordinates, if any
  std::function<Vec(std::span<const double>)> param;
  std::function<TransversalSplit(std::span<const double>)> split;

  int continuous_dims() const;
  nlohmann::json to_json() const;
};

TransversalModel builtin_transversal(const GroupModel& g, const BandMask& mask);

/// Pairs (group name + params, mask json) that carry a closed-form
/// transversal, used by the CLI catalog and the consistency checks.
struct CatalogPair {
  std::string group;
  nlohmann::json group_params;
  nlohmann::json mask;
};
std::vector<CatalogPair> catalog_pairs();

/// sum_i w_i |f(xi.h_i)|^2, the pushforward of Haar measure onto the orbit.
double orbit_measure_integral(const GroupModel& g, std::span<const double> xi, const SpectralFunction& f,
                              const QuadratureRule& q, double* offgrid_fraction = nullptr);

struct OrbitReport {
  Vec representative;
  StabilizerClass stabilizer_class = StabilizerClass::Undetermined;
  double epsilon_used = 0.0;
  EpsilonProbe probe;
  std::optional<Vec> transversal_coord;
  std::string chart_of_orbit;
  std::string transversal_error;
  nlohmann::json to_json() const;
};

OrbitReport analyze_orbit(const GroupModel& g, const ProbeLattice& lattice, const TransversalModel* transversal,
                          std::span<const double> xi, double eps);

/// eps used for a frequency when probing a masked point: a fraction of its
/// distance to the singular set of the mask (or of |xi| if that is zero).
double probe_epsilon_for(const BandMask& mask, std::span<const double> xi, double eps_rel);

/// Orbit point cloud xi.h_i for plotting.
std::vector<Vec> orbit_points(const GroupModel& g, std::span<const double> xi, const QuadratureRule& q);

}  // namespace calwav
