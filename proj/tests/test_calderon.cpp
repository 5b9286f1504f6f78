#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "calwav/calderon.hpp"
#include "support.hpp"

namespace calwav {
namespace {

constexpr double kPi = std::numbers::pi;

SpectralFunction log_gaussian(const Grid& g, const BandMask& m, double sigma) {
  return SpectralFunction::sample(g, m, [sigma](std::span<const double> xi) {
    const double l = std::log(std::abs(xi[0]));
    return cplx(std::exp(-l * l / (2.0 * sigma * sigma)), 0.0);
  });
}

// Smooth, compactly supported radial profile on 1 <= r <= 2.
double ring(std::span<const double> xi) {
  const double r = std::hypot(xi[0], xi[1]);
  const double u = (r - 1.5) / 0.5;
  return std::abs(u) < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
}

struct Dilation : ::testing::Test {
  GroupModel g = builtin_group("dilation1d_pos", {{"scale_half_range", 8.0}});
  Grid grid = testing::grid1(4096, 16.0);
  BandMask m = testing::mask("quadrant", {{"signs", "+"}}, grid);
  QuadratureRule q = testing::quadrature(g, {512});
};

TEST_F(Dilation, LogGaussianCalderonIntegral) {
  // int exp(-(t + ln xi)^2 / sigma^2) dt = sigma sqrt(pi).
  const double sigma = 0.5;
  const SpectralFunction psi = log_gaussian(grid, m, sigma);
  for (double x : {0.3, 0.8, 1.0, 2.7, 6.0}) {
    EXPECT_NEAR(calderon_integral(g, psi, Vec{x}, q), sigma * std::sqrt(kPi), 1e-4) << x;
  }
}

TEST_F(Dilation, BatchedFieldMatchesPointwise) {
  const SpectralFunction psi = log_gaussian(grid, m, 0.4);
  std::vector<Vec> pts;
  for (double x = 0.05; x < 15.0; x *= 1.37) pts.push_back({x});
  const std::vector<double> field = orbit_field(g, psi, pts, q);
  for (std::size_t i = 0; i < pts.size(); ++i)
    EXPECT_NEAR(field[i], calderon_integral(g, psi, pts[i], q), 1e-12 * (1.0 + field[i]));
}

TEST_F(Dilation, IndicatorOracle) {
  // 1_{[1,4]} / sqrt(ln 4) has Phi == 1 away from the grid edges.
  const SpectralFunction psi = SpectralFunction::sample(grid, m, [](std::span<const double> xi) {
    return cplx(xi[0] >= 1.0 && xi[0] <= 4.0 ? 1.0 / std::sqrt(std::log(4.0)) : 0.0, 0.0);
  });
  for (double x : {0.1, 0.5, 1.3, 3.0, 9.0}) EXPECT_NEAR(calderon_integral(g, psi, Vec{x}, q), 1.0, 0.03) << x;
}

TEST_F(Dilation, NormalizationReachesUnity) {
  const SpectralFunction psi = normalize_to_admissible(g, log_gaussian(grid, m, 0.5), q);
  ClassifyOptions opt;
  opt.sample_count = 400;
  const CalderonReport r = classify(g, psi, m, q, opt);
  EXPECT_EQ(r.verdict, Verdict::Admissible) << r.to_json().dump();
  EXPECT_LT(r.max_deviation, 1e-3);
}

TEST_F(Dilation, NormalizationIsIdempotent) {
  const SpectralFunction once = normalize_to_admissible(g, log_gaussian(grid, m, 0.5), q);
  const SpectralFunction twice = normalize_to_admissible(g, once, q);
  double diff = 0.0, ref = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!m.guarded(grid.point(k))) continue;
    diff = std::max(diff, std::abs(once.values[k] - twice.values[k]));
    ref = std::max(ref, std::abs(once.values[k]));
  }
  EXPECT_LT(diff, 1e-3 * ref);
}

TEST_F(Dilation, SeriesTermsArePulledBack) {
  std::vector<BandMask> bands;
  for (double lo : {1.0, 2.0, 4.0})
    bands.push_back(testing::mask("strip", {{"lo", lo}, {"hi", 2.0 * lo}}, grid));
  const SpectralFunction phi = log_gaussian(grid, m, 0.6);
  SeriesReport rep;
  const SpectralFunction nu = synthesize_nonunimodular(g, phi, bands, q, &rep);
  ASSERT_EQ(rep.k.size(), bands.size());
  EXPECT_LT(rep.delta_G_h0, 0.5);
  EXPECT_TRUE(std::isfinite(rep.bound));
  const double a0 = std::exp(rep.h0_coords[0]);
  for (std::size_t n = 0; n < bands.size(); ++n) {
    const double lo = bands[n].p.a;
    const Vec x = {1.37 * lo};
    const cplx want = phi.evaluate(Vec{x[0] * std::pow(a0, rep.k[n])});
    EXPECT_NEAR(std::abs(nu.evaluate(x) - want), 0.0, 1e-3 * (1.0 + std::abs(want))) << n;
  }
  EXPECT_EQ(nu.evaluate(Vec{0.5}), cplx(0.0, 0.0));
}

TEST(Calderon, PickH0) {
  const GroupModel g = builtin_group("similitude2");
  const QuadratureRule q = testing::quadrature(g, {16, 8});
  const GroupElement h0 = pick_h0(g, q);
  EXPECT_LT(modular_G(g, h0), 0.5);
  EXPECT_THROW(pick_h0(builtin_group("rotation2"), testing::quadrature(builtin_group("rotation2"))), Error);
}

TEST(Calderon, SeriesRejectsUnimodular) {
  const GroupModel g = builtin_group("rotation2");
  const Grid grid = testing::grid2(32, 3.0);
  const BandMask m = testing::mask("full", {}, grid);
  EXPECT_THROW(synthesize_nonunimodular(g, testing::soft_bump(grid, m), {m}, testing::quadrature(g)), Error);
}

struct Rotation : ::testing::Test {
  GroupModel g = builtin_group("rotation2");
  Grid grid = testing::grid2(128, 3.0);
  QuadratureRule q = testing::quadrature(g);
};

TEST_F(Rotation, ConstantOnAnnulusIsAdmissible) {
  const BandMask ann = testing::mask("annulus", {{"r1", 1.0}, {"r2", 2.0}}, grid);
  const double c = 1.0 / std::sqrt(2.0 * kPi);
  const SpectralFunction psi = SpectralFunction::sample(grid, ann, [c](std::span<const double>) { return cplx(c, 0.0); });
  for (const Vec& x : testing::guarded_points(grid, ann, 50, 3)) EXPECT_NEAR(calderon_integral(g, psi, x, q), 1.0, 1e-12);
  ClassifyOptions opt;
  opt.sample_count = 500;
  const CalderonReport r = classify(g, psi, ann, q, opt);
  EXPECT_EQ(r.verdict, Verdict::Admissible);
  EXPECT_NEAR(r.ess_inf, 1.0, 1e-12);
  EXPECT_NEAR(r.ess_sup, 1.0, 1e-12);

  // Rotated samples of a nonconstant profile carry O(h^2) bilinear error.
  const SpectralFunction norm = normalize_to_admissible(g, testing::soft_bump(grid, ann), q);
  for (std::size_t k = 0; k < grid.size(); k += 11)
    if (ann.guarded(grid.point(k))) EXPECT_NEAR(norm.values[k].real(), c, 1e-3 * c);
}

TEST_F(Rotation, RadialProfileIsWeaklyAdmissible) {
  const BandMask ann = testing::mask("annulus", {{"r1", 1.0}, {"r2", 2.0}}, grid);
  const SpectralFunction psi = SpectralFunction::sample(grid, ann, [](std::span<const double> xi) {
    return cplx(1.0 + 0.3 * std::hypot(xi[0], xi[1]), 0.0);
  });
  ClassifyOptions opt;
  opt.sample_count = 500;
  const CalderonReport r = classify(g, psi, ann, q, opt);
  EXPECT_EQ(r.verdict, Verdict::WeaklyAdmissible);
  // Phi = 2 pi g(r)^2 with r in [1, 2] less the guard.
  EXPECT_GT(r.ess_inf, 2.0 * kPi * 1.3 * 1.3 * 0.99);
  EXPECT_LT(r.ess_sup, 2.0 * kPi * 1.6 * 1.6 * 1.01);
}

TEST_F(Rotation, RingOnFullPlaneIsNotWeaklyAdmissible) {
  const BandMask full = testing::mask("full", {}, grid);
  const SpectralFunction psi = SpectralFunction::sample(grid, full, [](std::span<const double> xi) { return cplx(ring(xi), 0.0); });
  ClassifyOptions opt;
  opt.sample_count = 1000;
  EXPECT_EQ(classify(g, psi, full, q, opt).verdict, Verdict::NotWeaklyAdmissible);
  EXPECT_THROW(normalize_to_admissible(g, psi, q), Error);
}

TEST_F(Rotation, WeakNormalizerClosedForm) {
  const BandMask full = testing::mask("full", {}, grid);
  const BandMask ann = testing::mask("annulus", {{"r1", 1.0}, {"r2", 2.0}}, grid);
  const SpectralFunction phi1 = SpectralFunction::sample(grid, full, [](std::span<const double> xi) { return cplx(3.0 * ring(xi), 0.0); });
  const WeakNormalizerResult r = weak_admissibility_normalizer(g, phi1, {cell_from_mask(ann)}, q);
  EXPECT_TRUE(r.verified);
  ASSERT_EQ(r.cell_measures.size(), 1u);
  EXPECT_NEAR(r.cell_measures[0], 3.0 * kPi, 0.05);
  const double lambda = r.cell_measures[0];
  for (std::size_t k = 0; k < grid.size(); k += 5) {
    const Vec x = grid.point(k);
    // Orbit integral of a radial phi2 is 2 pi phi2. Near the rim of the
    // ring bilinear error dominates, so stay in its bulk.
    if (std::abs(std::hypot(x[0], x[1]) - 1.5) > 0.3) continue;
    const double phi2 = std::min(1.0, phi1.values[k].real()) / (2.0 * (1.0 + lambda));
    EXPECT_NEAR(r.phi.values[k].real(), phi2 / (1.0 + 2.0 * kPi * phi2), 2e-3 * phi2) << x[0] << "," << x[1];
  }
  EXPECT_THROW(weak_admissibility_normalizer(g, SpectralFunction(grid, full), {cell_from_mask(ann)}, q), Error);
  EXPECT_THROW(weak_admissibility_normalizer(g, phi1, {}, q), Error);
}

TEST_F(Rotation, MollifierPreservesRadialFunctions) {
  const BandMask full = testing::mask("full", {}, grid);
  const Mollifier nu = make_mollifier(g, 0.4, g.default_truncation);
  double total = 0.0;
  for (std::size_t i = 0; i < nu.elements.size(); ++i) total += nu.weights[i] / g.modular_H(nu.elements[i]);
  EXPECT_NEAR(total, 1.0, 1e-12);
  const SpectralFunction f = testing::soft_bump(grid, full, 1.2);
  const SpectralFunction out = mollify(g, f, nu);
  // Two bilinear passes, each off by at most h^2 max|f''| / 4 with
  // max|f''| = 4 / s^2 at the origin.
  const double h = grid.max_spacing(), tol = 2.0 * h * h * (4.0 / (1.2 * 1.2)) / 4.0;
  for (const Vec& x : testing::guarded_points(grid, full, 200, 8)) {
    if (std::hypot(x[0], x[1]) > 2.9) continue;  // rotations would leave the box
    EXPECT_NEAR(std::abs(out.evaluate(x) - f.evaluate(x)), 0.0, tol) << x[0] << "," << x[1];
  }
  EXPECT_THROW(make_mollifier(g, 0.0, g.default_truncation), Error);
}

TEST(Calderon, RestrictTo) {
  const Grid grid = testing::grid2(16, 2.0);
  const BandMask full = testing::mask("full", {}, grid);
  const BandMask q = mask_catalog("quadrant", {{"signs", "++"}}, 2);
  const SpectralFunction r = restrict_to(testing::soft_bump(grid, full), q);
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (!q.contains(grid.point(k))) EXPECT_EQ(r.values[k], cplx(0.0, 0.0));
  EXPECT_EQ(r.mask.descriptor(), full.descriptor());
}

TEST(Calderon, VerdictNames) {
  EXPECT_EQ(to_string(Verdict::Admissible), "admissible");
  EXPECT_EQ(to_string(Verdict::WeaklyAdmissible), "weakly_admissible");
  EXPECT_EQ(to_string(Verdict::NotWeaklyAdmissible), "not_weakly_admissible");
  EXPECT_EQ(to_string(Verdict::Inconclusive), "inconclusive");
}

}  // namespace
}  // namespace calwav
