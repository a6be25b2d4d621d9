#pragma once

// The billiard map (s, v) -> (s', v') of a convex boundary and its generating
// function h(x, x') = -|xi(x) - xi(x')| on the universal cover.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "billiard/domain_geometry.hpp"
#include "billiard/errors.hpp"

namespace billiard {

/// Footpoint s in [0, 1) and angle v in (0, pi) between the outgoing ray and the tangent.
struct PhasePoint {
  double s;
  double v;
};

/// R(s, v) = (s, pi - v).
inline PhasePoint reverse(PhasePoint p) { return {p.s, std::numbers::pi - p.v}; }

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Distance between two footpoints on the circle R/Z.
inline double circle_distance(double a, double b) {
  const double d = wrap_unit(a - b);
  return std::min(d, 1.0 - d);
}

namespace detail {

struct Chord {
  BoundaryPoint from, to;
  Vec2 u; ///< unit vector from xi(x) to xi(x')
  double length;
};

inline Chord chord(const BoundaryCurve& curve, double x, double xb) {
  if (circle_distance(x, xb) < 1e-14)
    throw DegenerateChord("footpoints coincide mod 1 (x = " + std::to_string(x) + ", x' = " + std::to_string(xb) + ")");
  Chord c{curve.point(x), curve.point(xb), Vec2::Zero(), 0.0};
  const Vec2 d = c.to.position - c.from.position;
  c.length = d.norm();
  if (!(c.length > 0.0)) throw DegenerateChord("zero chord length");
  c.u = d / c.length;
  return c;
}

inline Vec2 left_normal(const Vec2& t) { return {-t.y(), t.x()}; }

} // namespace detail

/// h(x, x') = -|xi(x) - xi(x')|.
inline double chord_action(const BoundaryCurve& curve, double x, double xb) {
  return -detail::chord(curve, x, xb).length;
}

struct ChordPartials {
  double d1; ///< dh/dx = cos v
  double d2; ///< dh/dx' = -cos v'
};

inline ChordPartials chord_partials(const BoundaryCurve& curve, double x, double xb) {
  const auto c = detail::chord(curve, x, xb);
  return {c.u.dot(c.from.tangent), -c.u.dot(c.to.tangent)};
}

struct ChordHessian {
  double d11, d12, d22;
};

namespace detail {

inline ChordHessian hessian(const BoundaryCurve& curve, const Chord& c, double x, double xb) {
  // In exact mode the tangent angle of the footpoint gives rho without another inversion.
  auto rho = [&](const BoundaryPoint& P, double s) {
    return curve.interpolation() == Interpolation::exact ? curve.rho_at_angle(P.phi) : curve.curvature_radius(s);
  };
  const Vec2& t = c.from.tangent;
  const Vec2& tb = c.to.tangent;
  const double ut = c.u.dot(t), utb = c.u.dot(tb);
  const double kappa = 1.0 / rho(c.from, x), kappab = 1.0 / rho(c.to, xb);
  const double d = c.length;
  return {(ut * ut - 1.0) / d + kappa * c.u.dot(left_normal(t)), (t.dot(tb) - ut * utb) / d,
          (utb * utb - 1.0) / d - kappab * c.u.dot(left_normal(tb))};
}

} // namespace detail

/// Analytic second derivatives of h.
inline ChordHessian chord_hessian(const BoundaryCurve& curve, double x, double xb) {
  return detail::hessian(curve, detail::chord(curve, x, xb), x, xb);
}

/// h, its gradient and Hessian from one pair of footpoint evaluations.
struct ChordJet {
  double h;
  ChordPartials d;
  ChordHessian H;
};

inline ChordJet chord_jet(const BoundaryCurve& curve, double x, double xb) {
  const auto c = detail::chord(curve, x, xb);
  return {-c.length, {c.u.dot(c.from.tangent), -c.u.dot(c.to.tangent)}, detail::hessian(curve, c, x, xb)};
}

/// Arrival of a step in the universal cover: s_lift = s + sigma with sigma in (0, 1).
struct LiftedStep {
  double s_lift;
  double v;
};

/// Billiard map with the arrival footpoint kept in the lift.
inline LiftedStep step_lifted(const BoundaryCurve& curve, double s, double v) {
  constexpr double pi = std::numbers::pi;
  if (!(v > 0.0 && v < pi)) throw SolverFailure("angle " + std::to_string(v) + " outside (0, pi)");
  if (v < 1e-6 || pi - v < 1e-6) throw SolverFailure("glancing ray, v = " + std::to_string(v));

  const BoundaryPoint P = curve.point(s);
  const Vec2& t = P.tangent;
  // Angle of the chord xi(s) -> xi(s + sigma) measured from t; increases from 0 to pi.
  auto angle = [&](double sigma, double* slope) {
    const BoundaryPoint Q = curve.point(s + sigma);
    const Vec2 D = Q.position - P.position;
    const double c = cross(t, D), d = t.dot(D);
    if (slope) *slope = (d * cross(t, Q.tangent) - c * t.dot(Q.tangent)) / D.squaredNorm();
    return std::atan2(c, d);
  };

  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (angle(mid, nullptr) < v)
      lo = mid;
    else
      hi = mid;
  }
  double sigma = 0.5 * (lo + hi);
  double residual = 0.0;
  for (int it = 0; it < 8; ++it) {
    double slope = 0.0;
    residual = angle(sigma, &slope) - v;
    if (!(slope > 0.0)) break;
    const double next = sigma - residual / slope;
    if (!(next > lo - 1e-12 && next < hi + 1e-12)) break;
    const double delta = std::abs(next - sigma);
    sigma = next;
    if (delta < 1e-16) break;
  }
  residual = angle(sigma, nullptr) - v;
  if (!(std::abs(residual) < 1e-10))
    throw SolverFailure("no certified intersection: bracket [" + std::to_string(s + lo) + ", " +
                        std::to_string(s + hi) + "], angle residual " + std::to_string(residual));

  const BoundaryPoint Q = curve.point(s + sigma);
  const Vec2 u = (Q.position - P.position).normalized();
  return {s + sigma, std::atan2(-cross(Q.tangent, u), Q.tangent.dot(u))};
}

inline PhasePoint step(const BoundaryCurve& curve, PhasePoint p) {
  const auto r = step_lifted(curve, wrap_unit(p.s), p.v);
  return {wrap_unit(r.s_lift), r.v};
}

/// Orbit p, step(p), ..., n points in total.
inline std::vector<PhasePoint> iterate(const BoundaryCurve& curve, PhasePoint p, int n) {
  std::vector<PhasePoint> orbit;
  orbit.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    orbit.push_back(p);
    if (i + 1 < n) p = step(curve, p);
  }
  return orbit;
}

/// Distance between step(R(step(p))) and R(p); zero for a reversible map.
inline double reversibility_defect(const BoundaryCurve& curve, PhasePoint p) {
  const PhasePoint back = step(curve, reverse(step(curve, p)));
  const PhasePoint target = reverse(p);
  return std::hypot(circle_distance(back.s, target.s), back.v - target.v);
}

struct TwistCertificate {
  double value;        ///< -d^2 h / dx dx'
  bool near_degenerate; ///< footpoints closer than 1e-3 in arc length
};

/// -d12 h by central differences of chord_partials in the second argument.
inline TwistCertificate twist_certificate(const BoundaryCurve& curve, double x, double xb) {
  const double gap = circle_distance(x, xb);
  if (gap < 1e-14) throw DegenerateChord("footpoints coincide mod 1");
  const double eps = std::min(1e-5, 0.25 * gap);
  const double plus = chord_partials(curve, x, xb + eps).d1;
  const double minus = chord_partials(curve, x, xb - eps).d1;
  return {-(plus - minus) / (2.0 * eps), gap < 1e-3};
}

/// Determinant of the Jacobian of (s, cos v) -> (s', cos v') by fourth-order central differences.
inline double area_jacobian(const BoundaryCurve& curve, PhasePoint p, double eps = 1e-4) {
  auto map = [&](double s, double c) {
    const auto r = step_lifted(curve, s, std::acos(c));
    return Vec2(r.s_lift, std::cos(r.v));
  };
  const double s = wrap_unit(p.s), c = std::cos(p.v);
  // Keep the stencil inside the admissible angle range.
  const double hc = std::min(eps, 0.2 * (1.0 - std::abs(c)));
  auto diff = [](auto f, double h) -> Vec2 { return (8.0 * (f(h) - f(-h)) - (f(2 * h) - f(-2 * h))) / (12.0 * h); };
  const Vec2 ds = diff([&](double h) { return map(s + h, c); }, eps);
  const Vec2 dc = diff([&](double h) { return map(s, c + h); }, hc);
  return ds.x() * dc.y() - ds.y() * dc.x();
}

} // namespace billiard
