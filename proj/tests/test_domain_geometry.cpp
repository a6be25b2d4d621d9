#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "billiard/domain_geometry.hpp"

using namespace billiard;

namespace {

constexpr double kPi = std::numbers::pi;

CurvatureProfile two_harmonic() {
  CurvatureProfile p;
  p.cos_coeffs = {1.0, 0.0, 0.1, 0.04};
  p.sin_coeffs = {0.0, 0.03, 0.0, -0.02};
  return p;
}

// Composite Simpson rule over arc length.
template <typename F>
double simpson(F f, int n) {
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) acc += ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0)) * f(static_cast<double>(i) / n);
  return acc / (3.0 * n);
}

} // namespace

TEST(DomainGeometry, CircleHasConstantRadius) {
  const auto c = build_boundary(preset_circle(), 128);
  for (double s : {0.0, 0.1, 0.37, 0.5, 0.99}) {
    EXPECT_NEAR(curvature_radius(c, s), 1.0 / (2.0 * kPi), 1e-15);
    EXPECT_NEAR((point(c, s).position - Vec2(0.0, 1.0 / (2.0 * kPi))).norm(), 1.0 / (2.0 * kPi), 1e-15);
  }
  EXPECT_EQ(c.perimeter(), 1.0);
}

TEST(DomainGeometry, CirclePeriodicityAndAntipodes) {
  const auto c = build_boundary(preset_circle(), 64);
  EXPECT_NEAR((point(c, 0.0).position - point(c, 1.0).position).norm(), 0.0, 1e-15);
  for (double s : {0.0, 0.2, 0.61}) EXPECT_NEAR((point(c, s).position - point(c, s + 0.5).position).norm(), 1.0 / kPi, 1e-14);
}

TEST(DomainGeometry, ClosureRejectsFirstHarmonic) {
  CurvatureProfile p{{1.0, 0.5}, {}, 0.0};
  EXPECT_THROW(build_boundary(p, 64), NotClosed);
  CurvatureProfile q{{1.0}, {0.2}, 0.0};
  EXPECT_THROW(build_boundary(q, 64), NotClosed);
  EXPECT_THROW(preset_perturbed_circle(1, 0.1), NotClosed);
}

TEST(DomainGeometry, ConvexityIsChecked) {
  EXPECT_THROW(preset_perturbed_circle(3, 1.2), NonConvex);
  CurvatureProfile p{{-1.0}, {}, 0.0};
  EXPECT_THROW(build_boundary(p, 64), NonConvex);
  for (int k = 2; k <= 6; ++k) EXPECT_NO_THROW(preset_perturbed_circle(k, 0.3));
}

TEST(DomainGeometry, TotalTurningIsTwoPi) {
  CurvatureProfile p{{1.0, 0.0, 0.1}, {}, 0.0};
  const auto c = build_boundary(p, 256);
  EXPECT_NEAR(c.total_turning(), 2.0 * kPi, 1e-8);
  EXPECT_NEAR(simpson([&](double s) { return 1.0 / curvature_radius(c, s); }, 2000), 2.0 * kPi, 1e-10);
  const auto e = build_boundary(preset_ellipse(0.5), 512);
  EXPECT_NEAR(e.total_turning(), 2.0 * kPi, 1e-8);
  EXPECT_NEAR(e.integrate_rho_power(-1.0), 2.0 * kPi, 1e-10);
}

TEST(DomainGeometry, PerimeterIsOne) {
  for (const auto& p : {preset_circle(), preset_ellipse(0.5), preset_ellipse(0.8), two_harmonic()}) {
    const auto c = build_boundary(p, 256);
    // Arc length through a full turn of the tangent.
    EXPECT_NEAR(c.arc_length_at(2.0 * kPi), 1.0, 1e-12);
    EXPECT_NEAR(c.integrate_rho_power(0.0), 1.0, 1e-12);
    // Closed: the table end meets its start.
    EXPECT_NEAR((c.position_at_angle(2.0 * kPi) - c.position_at_angle(0.0)).norm(), 0.0, 1e-14);
  }
}

TEST(DomainGeometry, TangentMatchesFiniteDifference) {
  const auto c = build_boundary(two_harmonic(), 256);
  const double h = 1e-5;
  for (int i = 0; i < 20; ++i) {
    const double s = 0.05 * i + 0.013;
    const Vec2 fd = (point(c, s + h).position - point(c, s - h).position) / (2.0 * h);
    const auto P = point(c, s);
    EXPECT_NEAR(P.tangent.norm(), 1.0, 1e-10);
    EXPECT_LT((fd - P.tangent).norm(), 1e-6);
    // 1 / |xi''| against the stored curvature radius.
    const Vec2 dd = (point(c, s + h).position - 2.0 * P.position + point(c, s - h).position) / (h * h);
    EXPECT_NEAR(1.0 / dd.norm(), curvature_radius(c, s), 1e-4);
  }
}

TEST(DomainGeometry, EllipseVertexIsExtremal) {
  const auto e = build_boundary(preset_ellipse(0.5), 256);
  double lo = 1e9, hi = 0.0;
  for (int i = 0; i < 4000; ++i) {
    const double r = curvature_radius(e, i / 4000.0);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  // s = 0 is the minor-axis vertex (flattest point), s = 1/4 the major-axis vertex.
  EXPECT_NEAR(curvature_radius(e, 0.0), hi, 1e-12);
  EXPECT_NEAR(curvature_radius(e, 0.25), lo, 1e-12);
  EXPECT_GT(e.lazutkin_integral(), 0.0);
}

TEST(DomainGeometry, EllipsePresets) {
  const auto one = preset_ellipse(1.0);
  EXPECT_NEAR(one.a(0), 1.0, 1e-14);
  for (int k = 1; k <= one.max_harmonic(); ++k) EXPECT_NEAR(one.a(k), 0.0, 1e-14);
  const auto half = preset_ellipse(0.5);
  EXPECT_GT(half.max_harmonic(), 10);
  for (int k = 1; k <= half.max_harmonic(); k += 2) EXPECT_EQ(half.a(k), 0.0);
  for (double b : {0.5, 0.5, 0.9}) {
    const auto p = preset_ellipse(b);
    // Curvature radius of the ellipse (1, b) at the minor-axis vertex is 1/b in raw units.
    EXPECT_NEAR(p.radius(0.0), 1.0 / b, 1e-12);
    EXPECT_LT(p.truncation_error, 1e-13);
  }
  EXPECT_THROW(preset_ellipse(0.0), BadAxisRatio);
  EXPECT_THROW(preset_ellipse(1.5), BadAxisRatio);
}

TEST(DomainGeometry, RotationInvariance) {
  const auto p = two_harmonic();
  const auto a = build_boundary(p, 256), b = build_boundary(p.rotated(0.7), 256);
  EXPECT_NEAR(a.lazutkin_integral(), b.lazutkin_integral(), 1e-10);
  EXPECT_NEAR(a.raw_perimeter(), b.raw_perimeter(), 1e-12);
  EXPECT_NEAR(a.profile().min_radius(), b.profile().min_radius(), 1e-10);
}

TEST(DomainGeometry, TrigonometricInterpolationConverges) {
  const auto exact = build_boundary(two_harmonic(), 64);
  double prev = 1.0;
  for (int n : {64, 128, 256}) {
    const auto interp = build_boundary(two_harmonic(), n, Interpolation::trigonometric);
    double err = 0.0;
    for (int i = 0; i < 97; ++i) {
      const double s = (i + 0.31) / 97.0;
      err = std::max(err, (interp.point(s).position - exact.point(s).position).norm());
      err = std::max(err, std::abs(interp.curvature_radius(s) - exact.curvature_radius(s)));
    }
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-12);
}
