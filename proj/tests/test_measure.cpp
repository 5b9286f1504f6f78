#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "calwav/measure.hpp"
#include "support.hpp"

namespace calwav {
namespace {

constexpr double kPi = std::numbers::pi;

struct KappaCase {
  std::string group;
  nlohmann::json mask;
  std::function<double(const Vec&)> kappa;
};

// Closed forms from dxi = kappa dmu_O du, worked out by hand per chart.
std::vector<KappaCase> kappa_cases() {
  return {
      {"dilation1d_pos", {{"name", "full"}}, [](const Vec& x) { return std::abs(x[0]); }},
      {"dilation1d_full", {{"name", "full"}}, [](const Vec& x) { return std::abs(x[0]); }},
      {"rotation2", {{"name", "full"}}, [](const Vec& x) { return std::hypot(x[0], x[1]); }},
      {"similitude2", {{"name", "full"}}, [](const Vec& x) { return x[0] * x[0] + x[1] * x[1]; }},
      {"diag_pos", {{"name", "quadrant"}, {"params", {{"signs", "-+"}}}},
       [](const Vec& x) { return std::abs(x[0] * x[1]); }},
      {"shear2", {{"name", "halfplane"}}, [](const Vec& x) { return std::abs(x[0]); }},
      {"shear_scale2", {{"name", "halfplane"}}, [](const Vec& x) { return x[0] * x[0]; }},
  };
}

class Kappa : public ::testing::TestWithParam<std::size_t> {};

// The estimator differences exp over chart steps of 2 h / |xi|; the central
// difference bias is step^2 / 6 per chart axis, at most two axes here.
double kappa_tol(const Vec& xi, double h) {
  const double step = 2.0 * h / std::max(norm(xi), h);
  return 1e-6 + step * step / 2.0;
}

TEST_P(Kappa, MatchesClosedForm) {
  const KappaCase c = kappa_cases()[GetParam()];
  const GroupModel g = builtin_group(c.group);
  const Grid grid = g.d == 1 ? testing::grid1(256, 4.0) : testing::grid2(128, 4.0);
  BandMask m = mask_from_json(c.mask, g.d);
  with_default_guard(m, grid);
  const TransversalModel t = builtin_transversal(g, m);
  for (const Vec& xi : testing::guarded_points(grid, m, 100, 17)) {
    const double k = kappa_estimate(g, t, xi, grid.max_spacing());
    EXPECT_NEAR(k / c.kappa(xi), 1.0, kappa_tol(xi, grid.max_spacing())) << c.group << " at " << nlohmann::json(xi).dump();
  }
}

TEST_P(Kappa, CocycleIdentity) {
  const KappaCase c = kappa_cases()[GetParam()];
  const GroupModel g = builtin_group(c.group);
  const Grid grid = g.d == 1 ? testing::grid1(256, 4.0) : testing::grid2(128, 4.0);
  BandMask m = mask_from_json(c.mask, g.d);
  with_default_guard(m, grid);
  const TransversalModel t = builtin_transversal(g, m);
  const QuadratureRule q = testing::quadrature(g);
  std::mt19937_64 rng(GetParam());
  std::uniform_int_distribution<std::size_t> pick(0, q.size() - 1);
  int checked = 0;
  for (const Vec& xi : testing::guarded_points(grid, m, 200, 23)) {
    const GroupElement& h = q.elements[pick(rng)];
    const Vec xh = dual_action(g, xi, h);
    if (!m.guarded(xh) || !grid.in_box(xh)) continue;
    const double s = grid.max_spacing();
    EXPECT_NEAR(kappa_estimate(g, t, xh, s) * modular_G(g, h) / kappa_estimate(g, t, xi, s), 1.0,
                kappa_tol(xi, s) + kappa_tol(xh, s))
        << c.group;
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

INSTANTIATE_TEST_SUITE_P(Catalog, Kappa, ::testing::Range<std::size_t>(0, 7));

TEST(Jacobian, RotationPolarCoordinates) {
  const GroupModel g = builtin_group("rotation2");
  const TransversalModel t = builtin_transversal(g, mask_catalog("full", {}, 2));
  for (double r : {0.5, 1.0, 2.5})
    EXPECT_NEAR(transversal_jacobian(g, t, Vec{r}, Vec{0.7}, 1e-4, 1e-4), r, 1e-7);
}

struct AnnulusFixture : ::testing::Test {
  GroupModel g = builtin_group("rotation2");
  Grid grid = testing::grid2(128, 2.5);
  BandMask m = testing::mask("annulus", {{"r1", 1.0}, {"r2", 2.0}}, grid);
  QuadratureRule q = testing::quadrature(g);
  TransversalModel t = builtin_transversal(g, m);
  SpectralFunction phi = SpectralFunction::sample(grid, m, [](std::span<const double>) {
    return cplx(1.0 / std::sqrt(2.0 * kPi), 0.0);
  });
};

TEST_F(AnnulusFixture, PseudoImageCarriesTotalMass) {
  const PseudoImage img = pseudo_image(g, phi, m, t);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& b : img.bins) {
    sum += b.weight;
    count += b.count;
    EXPECT_GE(b.coord[0], 1.0 - img.bin_width);
    EXPECT_LE(b.coord[0], 2.0 + img.bin_width);
  }
  EXPECT_NEAR(sum, img.total, 1e-12);
  EXPECT_NEAR(img.total, phi.l1_norm(), 1e-12);
  EXPECT_EQ(count + img.failures, img.points);
  EXPECT_EQ(img.failures, 0u);
}

TEST_F(AnnulusFixture, DisintegrationIdentity) {
  const Disintegration dis = make_disintegration(g, t, phi, m);
  const SpectralFunction f = testing::gaussian_bump(grid, m, {1.1, 0.6}, 0.4);
  const IdentityCheck c = verify_disintegration(g, dis, f, m, q);
  EXPECT_LT(c.rel_err, 1e-2) << c.to_json().dump();
  EXPECT_GT(c.lhs, 0.0);
}

TEST_F(AnnulusFixture, DecompositionIdentity) {
  const SpectralFunction f = testing::gaussian_bump(grid, m, {-0.9, 0.8}, 0.3);
  const IdentityCheck c = phi_decomposition_identity(g, phi, f, q);
  EXPECT_LT(c.rel_err, 1e-2) << c.to_json().dump();
}

TEST_F(AnnulusFixture, OrbitSpaceMassOfFiniteQuotient) {
  // ||(2 pi)^{-1/2} 1_{1 <= r <= 2}||^2 = 3 pi / (2 pi).
  auto rebuild = [this](const Grid& big) {
    BandMask mb = m;
    return SpectralFunction::sample(big, mb, [](std::span<const double>) { return cplx(1.0 / std::sqrt(2.0 * kPi), 0.0); });
  };
  const OrbitSpaceMass r = orbit_space_mass(g, phi, rebuild);
  EXPECT_NEAR(r.mass, 1.5, 0.02);
  EXPECT_FALSE(r.infinite);
  EXPECT_EQ(r.trace.size(), 2u);
}

TEST(OrbitSpaceMass, GrowsWithoutBoundOnFullPlane) {
  const GroupModel g = builtin_group("rotation2");
  const Grid grid = testing::grid2(64, 2.0);
  const BandMask full = testing::mask("full", {}, grid);
  auto build = [&](const Grid& gr) {
    return SpectralFunction::sample(gr, full, [](std::span<const double>) { return cplx(1.0 / std::sqrt(2.0 * kPi), 0.0); });
  };
  const OrbitSpaceMass r = orbit_space_mass(g, build(grid), build);
  EXPECT_TRUE(r.infinite);
  EXPECT_THROW(orbit_space_mass(builtin_group("similitude2"), build(grid), build), Error);
}

TEST(EnlargeGrid, KeepsSpacing) {
  const Grid g = testing::grid2(32, 2.0);
  const Grid b = enlarge_grid(g, 2.0);
  EXPECT_EQ(b.shape[0], 64);
  EXPECT_EQ(b.spacing, g.spacing);
  EXPECT_NEAR(b.origin[0], -4.0, 1e-12);
}

}  // namespace
}  // namespace calwav
