#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "billiard/billiard_map.hpp"

using namespace billiard;

namespace {

constexpr double kPi = std::numbers::pi;

BoundaryCurve circle() { return build_boundary(preset_circle(), 128); }
BoundaryCurve ellipse() { return build_boundary(preset_ellipse(0.5), 256); }
BoundaryCurve bumpy() { return build_boundary(preset_perturbed_circle(3, 0.05), 256); }

} // namespace

TEST(BilliardMap, CircleChords) {
  const auto c = circle();
  EXPECT_NEAR(chord_action(c, 0.0, 0.5), -1.0 / kPi, 1e-15);
  for (int q = 2; q <= 9; ++q)
    for (int p = 1; p < q; ++p) {
      // Endpoints by direct coordinates on the radius-1/(2 pi) circle.
      const double R = 1.0 / (2.0 * kPi), a = 2.0 * kPi * p / q;
      const double direct = std::hypot(R * std::sin(a), R * (1.0 - std::cos(a)));
      EXPECT_NEAR(chord_action(c, 0.0, static_cast<double>(p) / q), -direct, 1e-15);
      EXPECT_NEAR(-direct, -std::sin(kPi * p / q) / kPi, 1e-15);
    }
  EXPECT_THROW(chord_action(c, 0.3, 1.3), DegenerateChord);
}

TEST(BilliardMap, ActionIsSymmetricAndPeriodic) {
  const auto e = ellipse();
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double x = u(rng), xb = x + 0.05 + 0.9 * u(rng);
    EXPECT_NEAR(chord_action(e, x, xb), chord_action(e, xb, x), 1e-15);
    EXPECT_NEAR(chord_action(e, x, xb), chord_action(e, x + 1.0, xb + 1.0), 1e-14);
    EXPECT_LE(chord_action(e, x, xb), 0.0);
  }
}

TEST(BilliardMap, PartialsAreCosinesOfAngles) {
  const auto c = circle();
  EXPECT_NEAR(chord_partials(c, 0.0, 0.5).d1, 0.0, 1e-15);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& curve : {circle(), ellipse(), bumpy()})
    for (int i = 0; i < 20; ++i) {
      const double x = u(rng), xb = x + 0.05 + 0.9 * u(rng);
      const auto P = curve.point(x), Q = curve.point(xb);
      const Vec2 d = (Q.position - P.position).normalized();
      const double v = std::acos(d.dot(P.tangent)), vb = std::acos(d.dot(Q.tangent));
      const auto dh = chord_partials(curve, x, xb);
      EXPECT_NEAR(dh.d1, std::cos(v), 1e-10);
      EXPECT_NEAR(dh.d2, -std::cos(vb), 1e-10);
      const double e = 1e-6;
      EXPECT_NEAR(dh.d1, (chord_action(curve, x + e, xb) - chord_action(curve, x - e, xb)) / (2 * e), 1e-6);
      EXPECT_NEAR(dh.d2, (chord_action(curve, x, xb + e) - chord_action(curve, x, xb - e)) / (2 * e), 1e-6);
    }
}

TEST(BilliardMap, HessianMatchesFiniteDifferences) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& curve : {ellipse(), bumpy()})
    for (int i = 0; i < 20; ++i) {
      const double x = u(rng), xb = x + 0.05 + 0.9 * u(rng), e = 1e-6;
      const auto H = chord_hessian(curve, x, xb);
      const auto px = chord_partials(curve, x + e, xb), mx = chord_partials(curve, x - e, xb);
      const auto pb = chord_partials(curve, x, xb + e), mb = chord_partials(curve, x, xb - e);
      EXPECT_NEAR(H.d11, (px.d1 - mx.d1) / (2 * e), 1e-6);
      EXPECT_NEAR(H.d12, (pb.d1 - mb.d1) / (2 * e), 1e-6);
      EXPECT_NEAR(H.d12, (px.d2 - mx.d2) / (2 * e), 1e-6);
      EXPECT_NEAR(H.d22, (pb.d2 - mb.d2) / (2 * e), 1e-6);
    }
}

TEST(BilliardMap, CircleStepIsRotation) {
  const auto c = circle();
  const auto d = step(c, {0.0, kPi / 2});
  EXPECT_NEAR(d.s, 0.5, 1e-12);
  EXPECT_NEAR(d.v, kPi / 2, 1e-12);
  const auto t = step(c, {0.0, kPi / 3});
  EXPECT_NEAR(t.s, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(t.v, kPi / 3, 1e-12);
  for (int i = 0; i < 10; ++i)
    for (int j = 1; j <= 10; ++j) {
      const double s = i / 10.0 + 0.03, v = kPi * j / 11.0;
      const auto r = step(c, {s, v});
      EXPECT_NEAR(circle_distance(r.s, s + v / kPi), 0.0, 1e-10);
      EXPECT_NEAR(r.v, v, 1e-10);
    }
}

TEST(BilliardMap, StepSatisfiesGeneratingIdentity) {
  for (const auto& curve : {ellipse(), bumpy()}) {
    PhasePoint p{0.123, 0.9};
    for (int i = 0; i < 30; ++i) {
      const auto r = step_lifted(curve, p.s, p.v);
      const auto dh = chord_partials(curve, p.s, r.s_lift);
      EXPECT_NEAR(-dh.d1, -std::cos(p.v), 1e-8);
      EXPECT_NEAR(dh.d2, -std::cos(r.v), 1e-8);
      p = {wrap_unit(r.s_lift), r.v};
    }
  }
}

TEST(BilliardMap, ReversibilityOnPhaseGrid) {
  const auto c = circle();
  for (int i = 0; i < 10; ++i) EXPECT_LT(reversibility_defect(c, {i / 10.0, 0.3 + 0.2 * i}), 1e-12);
  for (const auto& curve : {ellipse(), bumpy()}) {
    double worst = 0.0;
    for (int i = 0; i < 10; ++i)
      for (int j = 1; j <= 10; ++j) worst = std::max(worst, reversibility_defect(curve, {i / 10.0, kPi * j / 11.0}));
    EXPECT_LT(worst, 1e-8);
  }
}

TEST(BilliardMap, AreaPreservation) {
  for (const auto& curve : {circle(), ellipse(), bumpy()})
    for (int i = 0; i < 10; ++i)
      for (int j = 1; j <= 10; ++j) EXPECT_NEAR(area_jacobian(curve, {i / 10.0, kPi * j / 11.0}), 1.0, 1e-6);
}

TEST(BilliardMap, GlancingRaysAreRefused) {
  const auto c = circle();
  EXPECT_THROW(step(c, {0.0, 1e-7}), SolverFailure);
  EXPECT_THROW(step(c, {0.0, kPi - 1e-7}), SolverFailure);
  EXPECT_THROW(step(c, {0.0, 4.0}), SolverFailure);
}

TEST(BilliardMap, TwistIsPositive) {
  EXPECT_GT(twist_certificate(circle(), 0.0, 0.5).value, 0.0);
  const auto e = ellipse();
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double x = u(rng), xb = x + 0.01 + 0.98 * u(rng);
    const auto t = twist_certificate(e, x, xb);
    EXPECT_GT(t.value, 0.0);
    EXPECT_NEAR(t.value, -chord_hessian(e, x, xb).d12, 1e-5);
    EXPECT_FALSE(t.near_degenerate);
  }
  // Short chords: -h12 = sin v sin v' / |chord| -> gap / (4 rho^2), small but finite.
  const double rho = e.curvature_radius(0.2);
  for (double gap : {1e-2, 1e-3, 1e-4}) {
    const auto t = twist_certificate(e, 0.2, 0.2 + gap);
    EXPECT_TRUE(std::isfinite(t.value));
    EXPECT_GT(t.value, 0.0);
    EXPECT_NEAR(t.value / (gap / (4.0 * rho * rho)), 1.0, 20.0 * gap);
  }
  EXPECT_TRUE(twist_certificate(e, 0.2, 0.2 + 1e-4).near_degenerate);
}
