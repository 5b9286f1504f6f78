#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "calwav/orbit.hpp"
#include "support.hpp"

namespace calwav {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Stabilizer, TrivialOnRegularOrbits) {
  const std::vector<std::pair<std::string, Vec>> cases = {
      {"rotation2", {1.5, 0.0}}, {"similitude2", {0.4, -0.9}}, {"dilation1d_pos", {0.7}},
      {"shear2", {1.0, 0.3}},    {"shear_scale2", {-1.2, 0.5}}, {"diag_pos", {0.5, 1.5}}};
  for (const auto& [name, xi] : cases) {
    const GroupModel g = builtin_group(name);
    const ProbeLattice lattice(g, g.default_truncation);
    EpsilonProbe p;
    EXPECT_EQ(classify_stabilizer(lattice, xi, 0.05 * norm(xi), &p), StabilizerClass::Trivial) << name;
    EXPECT_TRUE(p.bounded) << name;
    EXPECT_FALSE(p.infinite) << name;
  }
}

TEST(Stabilizer, NoncompactOnSingularLines) {
  // Shears fix the xi_2 axis; the second diagonal scale fixes the xi_1 axis.
  const std::vector<std::pair<std::string, Vec>> cases = {{"shear2", {0.0, 1.0}}, {"diag_pos", {1.0, 0.0}}};
  for (const auto& [name, xi] : cases) {
    const GroupModel g = builtin_group(name);
    const ProbeLattice lattice(g, g.default_truncation);
    EpsilonProbe p;
    EXPECT_EQ(classify_stabilizer(lattice, xi, 0.05, &p), StabilizerClass::Noncompact) << name;
    EXPECT_FALSE(p.bounded) << name;
    EXPECT_TRUE(p.infinite) << name;
  }
}

TEST(Stabilizer, ProbeFunctionMatchesLattice) {
  const GroupModel g = builtin_group("similitude2");
  const ProbeLattice lattice(g, g.default_truncation);
  const Vec xi = {0.8, 0.1};
  const EpsilonProbe a = lattice.probe(xi, 0.02);
  const EpsilonProbe b = probe_epsilon_stabilizer(g, xi, 0.02, g.default_truncation);
  EXPECT_EQ(a.shell_hits, b.shell_hits);
  EXPECT_EQ(a.bounded, b.bounded);
}

TEST(Stabilizer, ShellsAreGeometric) {
  const GroupModel g = builtin_group("dilation1d_pos");
  const ProbeLattice lattice(g, g.default_truncation, 10, 1.5);
  ASSERT_EQ(lattice.shells(), 10);
  for (int i = 1; i < lattice.shells(); ++i) EXPECT_NEAR(lattice.radii()[i] / lattice.radii()[i - 1], 1.5, 1e-12);
}

TEST(StabilizerNames, RoundTrip) {
  EXPECT_EQ(to_string(StabilizerClass::Trivial), "trivial");
  EXPECT_EQ(to_string(StabilizerClass::Noncompact), "noncompact");
}

class CatalogTransversal : public ::testing::TestWithParam<std::size_t> {};

TEST_P(CatalogTransversal, SplitReconstructsPoint) {
  const CatalogPair pair = catalog_pairs()[GetParam()];
  const GroupModel g = builtin_group(pair.group, pair.group_params);
  const Grid grid = g.d == 1 ? testing::grid1(256, 4.0) : testing::grid2(64, 4.0);
  BandMask m = mask_from_json(pair.mask, g.d);
  with_default_guard(m, grid);
  const TransversalModel t = builtin_transversal(g, m);
  EXPECT_EQ(t.m, static_cast<int>(t.continuous.size()));
  for (const Vec& xi : testing::guarded_points(grid, m, 200, GetParam())) {
    const TransversalSplit s = t.split(xi);
    const Vec back = dual_action(g, t.param(s.coords), s.h);
    for (int a = 0; a < g.d; ++a) EXPECT_NEAR(back[a], xi[a], 1e-9) << pair.group;
    // The transversal coordinate is an orbit invariant.
    const Vec moved = dual_action(g, xi, g.element(Vec(g.id_coords.size(), 0.3)));
    if (!m.guarded(moved)) continue;
    const TransversalSplit s2 = t.split(moved);
    for (int i = 0; i < t.m; ++i) EXPECT_NEAR(s2.coords[i], s.coords[i], 1e-9) << pair.group;
  }
}

TEST_P(CatalogTransversal, MaskIsInvariant) {
  const CatalogPair pair = catalog_pairs()[GetParam()];
  const GroupModel g = builtin_group(pair.group, pair.group_params);
  const Grid grid = g.d == 1 ? testing::grid1(256, 4.0) : testing::grid2(64, 4.0);
  BandMask m = mask_from_json(pair.mask, g.d);
  with_default_guard(m, grid);
  std::mt19937_64 rng(GetParam());
  EXPECT_TRUE(check_mask_invariance(g, m, grid, testing::quadrature(g), 3000, rng).passed()) << pair.group;
}

INSTANTIATE_TEST_SUITE_P(Pairs, CatalogTransversal, ::testing::Range<std::size_t>(0, catalog_pairs().size()));

TEST(Transversal, ShapesOfCatalogEntries) {
  EXPECT_EQ(builtin_transversal(builtin_group("similitude2"), mask_catalog("full", {}, 2)).continuous_dims(), 0);
  EXPECT_EQ(builtin_transversal(builtin_group("rotation2"), mask_catalog("full", {}, 2)).continuous_dims(), 1);
  const TransversalModel ann =
      builtin_transversal(builtin_group("rotation2"), mask_catalog("annulus", {{"r1", 1.0}, {"r2", 2.0}}, 2));
  EXPECT_EQ(ann.domain.lo[0], 1.0);
  EXPECT_EQ(ann.domain.hi[0], 2.0);
  const TransversalModel full1 = builtin_transversal(builtin_group("dilation1d_full"), mask_catalog("full", {}, 1));
  // A single orbit: no coordinate at all.
  EXPECT_EQ(full1.m, 0);
  EXPECT_EQ(full1.param(Vec{}), (Vec{1.0}));
  const TransversalModel pos1 = builtin_transversal(builtin_group("dilation1d_pos"), mask_catalog("full", {}, 1));
  EXPECT_EQ(pos1.discrete_values.size(), 2u);
}

TEST(Transversal, UnavailableCombinationsThrow) {
  EXPECT_THROW(builtin_transversal(builtin_group("shear2"), mask_catalog("strip", {{"lo", -1.0}, {"hi", 1.0}}, 2)),
               Error);
  EXPECT_THROW(builtin_transversal(builtin_group("rotation2"), mask_catalog("full", {}, 1)), Error);
}

TEST(OrbitMeasure, RadialFunctionOnCircles) {
  const GroupModel g = builtin_group("rotation2");
  const Grid grid = testing::grid2(96, 3.0);
  const BandMask ann = testing::mask("annulus", {{"r1", 1.0}, {"r2", 2.0}}, grid);
  const SpectralFunction f = SpectralFunction::sample(grid, ann, [](std::span<const double>) { return cplx(0.5, 0.0); });
  double off = -1.0;
  EXPECT_NEAR(orbit_measure_integral(g, Vec{0.0, 1.5}, f, testing::quadrature(g), &off), 2.0 * kPi * 0.25, 1e-12);
  EXPECT_EQ(off, 0.0);
}

TEST(OrbitMeasure, OffgridFractionForDilations) {
  const GroupModel g = builtin_group("dilation1d_pos");
  const Grid grid = testing::grid1(64, 4.0);
  const SpectralFunction f(grid, mask_catalog("full", {}, 1));
  double off = 0.0;
  orbit_measure_integral(g, Vec{1.0}, f, testing::quadrature(g), &off);
  // e^t < 4 for t < ln 4 out of [-4, 4].
  EXPECT_NEAR(off, (4.0 - std::log(4.0)) / 8.0, 2.0 / 64);
}

TEST(OrbitPoints, LieOnTheCircle) {
  const GroupModel g = builtin_group("rotation2");
  const QuadratureRule q = testing::quadrature(g);
  const std::vector<Vec> pts = orbit_points(g, Vec{1.2, 0.5}, q);
  ASSERT_EQ(pts.size(), q.size());
  for (const Vec& p : pts) EXPECT_NEAR(std::hypot(p[0], p[1]), 1.3, 1e-12);
}

TEST(OrbitReport, AnalyzeFillsTransversal) {
  const GroupModel g = builtin_group("rotation2");
  const BandMask m = mask_catalog("annulus", {{"r1", 1.0}, {"r2", 2.0}}, 2);
  const TransversalModel t = builtin_transversal(g, m);
  const ProbeLattice lattice(g, g.default_truncation);
  const Vec xi = {0.0, -1.4};
  const OrbitReport r = analyze_orbit(g, lattice, &t, xi, probe_epsilon_for(m, xi, 0.05));
  ASSERT_TRUE(r.transversal_coord.has_value());
  EXPECT_NEAR((*r.transversal_coord)[0], 1.4, 1e-12);
  EXPECT_EQ(r.stabilizer_class, StabilizerClass::Trivial);
  EXPECT_NEAR(r.epsilon_used, 0.05 * 0.4, 1e-12);
}

}  // namespace
}  // namespace calwav
