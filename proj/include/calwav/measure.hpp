#pragma once

#include <functional>
#include <span>
#include <vector>

#include "calwav/group.hpp"
#include "calwav/orbit.hpp"
#include "calwav/spectral.hpp"
#include "json.hpp"

namespace calwav {

struct PseudoBin {
  Vec coord;
  double weight = 0.0;
  std::size_t count = 0;
};

/// Grid mass phi * cell volume binned by the transversal coordinate of each
/// point's orbit.
struct PseudoImage {
  std::vector<PseudoBin> bins;
  double total = 0.0;
  double bin_width = 0.0;
  std::size_t points = 0;
  std::size_t failures = 0;
  nlohmann::json to_json() const;
};

PseudoImage pseudo_image(const GroupModel& g, const SpectralFunction& phi, const BandMask& mask,
                         const TransversalModel& transversal);

/// |det DF(u, c)| for F(u, c) = param(u).chart(c), by central differences
/// with steps `du` (transversal) and `dc` (chart).
double transversal_jacobian(const GroupModel& g, const TransversalModel& t, std::span<const double> u,
                            std::span<const double> c, double du, double dc);

/// kappa = d beta_O / d mu_O at xi, with the pseudo-image taken as Lebesgue
/// measure on continuous transversal coordinates and counting measure on
/// discrete ones. The difference box spans 4 grid spacings around xi.
double kappa_estimate(const GroupModel& g, const TransversalModel& t, std::span<const double> xi, double spacing);

struct Disintegration {
  TransversalModel transversal;
  PseudoImage orbit_weight;
  double spacing = 0.0;
  /// Transversal coordinate set used for integration: one entry per
  /// discrete value, or bin centres for a continuous coordinate.
  std::vector<Vec> coords;
  double du = 1.0;
  nlohmann::json to_json() const;
};

/// Bins the transversal over the part of its domain seen by `grid`
/// (continuous coordinate: bins of width `spacing`).
Disintegration make_disintegration(const GroupModel& g, const TransversalModel& t, const SpectralFunction& phi,
                                   const BandMask& mask);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_err = 0.0;
  nlohmann::json to_json() const { return {{"lhs", lhs}, {"rhs", rhs}, {"rel_err", rel_err}}; }
};

/// lhs = grid sum of f over the mask; rhs = sum over transversal bins and
/// quadrature nodes of kappa f(xi.h) w, written as the change of variables
/// sum du sum_i w_i |det DF(u, c_i)| f(F(u, c_i)) / haar(c_i).
IdentityCheck verify_disintegration(const GroupModel& g, const Disintegration& dis, const SpectralFunction& f,
                                    const BandMask& mask, const QuadratureRule& q);

/// int f = int phi/Phi int_H f(xi.h) delta(h) Delta_H(h)^{-1} dh dxi with
/// Phi(xi) = int_H phi(xi.h) dh.
IdentityCheck phi_decomposition_identity(const GroupModel& g, const SpectralFunction& phi, const SpectralFunction& f,
                                         const QuadratureRule& q);

struct OrbitSpaceMass {
  double mass = 0.0;
  bool infinite = false;
  nlohmann::json trace = nlohmann::json::array();
  nlohmann::json to_json() const;
};

/// lambda-bar(X/H) estimated as ||phi||^2 for admissible phi. `rebuild`
/// returns the admissible vector on an enlarged grid; a change of more
/// than 50% under doubling the extent raises the infinity flag.
OrbitSpaceMass orbit_space_mass(const GroupModel& g, const SpectralFunction& admissible_phi,
                                const std::function<SpectralFunction(const Grid&)>& rebuild, double factor = 2.0);

/// Same extent scaled by `factor` about the origin, same spacing.
Grid enlarge_grid(const Grid& grid, double factor);

}  // namespace calwav
