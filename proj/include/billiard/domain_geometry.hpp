#pragma once

// Strictly convex boundary curves described by their curvature radius as a
// function of the tangent angle,
//
//   r(phi) = a_0 + sum_k (a_k cos k phi + b_k sin k phi),
//
// realized as an arc-length parametrized curve of perimeter 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "billiard/errors.hpp"

namespace billiard {

using Vec2 = Eigen::Vector2d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wrap into [0, 1).
inline double wrap_unit(double s) {
  double r = s - std::floor(s);
  return r >= 1.0 ? 0.0 : r;
}

struct CurvatureProfile {
  std::vector<double> cos_coeffs; ///< a_0, a_1, ..., a_K
  std::vector<double> sin_coeffs; ///< b_1, ..., b_K
  /// Sup-norm bound of what was dropped when the profile approximates a
  /// non-polynomial curve (ellipse presets); zero for exact profiles.
  double truncation_error = 0.0;

  int max_harmonic() const {
    return static_cast<int>(std::max(cos_coeffs.empty() ? 0 : cos_coeffs.size() - 1, sin_coeffs.size()));
  }
  double a(int k) const { return k < static_cast<int>(cos_coeffs.size()) ? cos_coeffs[static_cast<std::size_t>(k)] : 0.0; }
  double b(int k) const {
    return k >= 1 && k <= static_cast<int>(sin_coeffs.size()) ? sin_coeffs[static_cast<std::size_t>(k - 1)] : 0.0;
  }

  double radius(double phi) const { return radius_derivative(phi, 0); }

  /// Calls f(k, cos k phi, sin k phi) for k = 1..K using angle addition.
  template <typename F>
  void for_each_harmonic(double phi, F f) const {
    const std::complex<double> w(std::cos(phi), std::sin(phi));
    std::complex<double> e = w;
    for (int k = 1; k <= max_harmonic(); ++k) {
      f(k, e.real(), e.imag());
      // Re-anchor periodically so rounding does not accumulate.
      e = (k % 32 == 31) ? std::complex<double>(std::cos((k + 1) * phi), std::sin((k + 1) * phi)) : e * w;
    }
  }

  /// m-th derivative of r with respect to phi.
  double radius_derivative(double phi, int m) const {
    double acc = m == 0 ? a(0) : 0.0;
    // d^m/dphi^m e^{ik phi} = (ik)^m e^{ik phi}
    for_each_harmonic(phi, [&](int k, double c, double s) {
      const double km = std::pow(static_cast<double>(k), m);
      double dc = c, ds = s; // derivative of cos, sin after quarter turns
      for (int i = 0; i < m % 4; ++i) {
        const double t = dc;
        dc = -ds;
        ds = t;
      }
      acc += km * (a(k) * dc + b(k) * ds);
    });
    return acc;
  }

  /// Profile of the curve rotated by theta: r'(phi) = r(phi - theta).
  CurvatureProfile rotated(double theta) const {
    CurvatureProfile r = *this;
    const int K = max_harmonic();
    r.cos_coeffs.assign(static_cast<std::size_t>(K) + 1, 0.0);
    r.sin_coeffs.assign(static_cast<std::size_t>(K), 0.0);
    r.cos_coeffs[0] = a(0);
    for (int k = 1; k <= K; ++k) {
      const double c = std::cos(k * theta), s = std::sin(k * theta);
      r.cos_coeffs[static_cast<std::size_t>(k)] = a(k) * c - b(k) * s;
      r.sin_coeffs[static_cast<std::size_t>(k - 1)] = a(k) * s + b(k) * c;
    }
    return r;
  }

  /// Minimum of r over [0, 2 pi): dense scan refined by golden-section search.
  double min_radius() const {
    const int n = 64 * (max_harmonic() + 1) + 256;
    int best = 0;
    double best_val = radius(0.0);
    for (int i = 1; i < n; ++i) {
      const double v = radius(kTwoPi * i / n);
      if (v < best_val) best_val = v, best = i;
    }
    double lo = kTwoPi * (best - 1) / n, hi = kTwoPi * (best + 1) / n;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 80; ++it) {
      const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
      if (radius(m1) < radius(m2))
        hi = m2;
      else
        lo = m1;
    }
    return std::min(best_val, radius(0.5 * (lo + hi)));
  }

  /// Throws NotClosed / NonConvex when the invariants fail.
  void validate(double closure_tol = 1e-12) const {
    if (cos_coeffs.empty() || !(a(0) > 0.0)) throw NonConvex("a_0 must be positive");
    const double tol = closure_tol * std::abs(a(0));
    if (std::abs(a(1)) > tol || std::abs(b(1)) > tol)
      throw NotClosed("first harmonic (a_1, b_1) = (" + std::to_string(a(1)) + ", " + std::to_string(b(1)) +
                      ") must vanish");
    const double rmin = min_radius();
    if (!(rmin > 0.0)) throw NonConvex("curvature radius reaches " + std::to_string(rmin));
  }
};

inline CurvatureProfile preset_circle() { return CurvatureProfile{{1.0}, {}, 0.0}; }

/// Ellipse with semi-axes 1 and axis_ratio; s = 0 sits on the minor-axis vertex.
///
/// The curvature radius in tangent angle is r(phi) = b^2 / (sin^2 phi + b^2 cos^2 phi)^{3/2};
/// it is expanded in cos(2 m phi) and truncated once coefficients fall below
/// 1e-15 a_0 (or at max_harmonic). A geometric bound on the dropped tail is kept in truncation_error.
inline CurvatureProfile preset_ellipse(double axis_ratio, int max_harmonic = 512) {
  if (!(axis_ratio > 0.0 && axis_ratio <= 1.0)) throw BadAxisRatio("axis ratio must lie in (0, 1], got " + std::to_string(axis_ratio));
  const double b = axis_ratio;
  auto r = [b](double phi) {
    const double s = std::sin(phi), c = std::cos(phi);
    return b * b / std::pow(s * s + b * b * c * c, 1.5);
  };
  const int P = std::max(8192, 8 * max_harmonic);
  std::vector<double> samples(static_cast<std::size_t>(P));
  for (int j = 0; j < P; ++j) samples[static_cast<std::size_t>(j)] = r(kTwoPi * j / P);
  auto cos_coeff = [&](int k) {
    double acc = 0.0;
    for (int j = 0; j < P; ++j) acc += samples[static_cast<std::size_t>(j)] * std::cos(kTwoPi * k * j / P);
    return (k == 0 ? 1.0 : 2.0) * acc / P;
  };
  CurvatureProfile prof;
  prof.cos_coeffs.push_back(cos_coeff(0));
  const double a0 = prof.cos_coeffs[0];
  // The coefficients decay geometrically until they hit the rounding floor of the
  // quadrature (~1e-16 a_0); stop at the first one below 1e-15 a_0.
  double last = a0, ratio = 0.0;
  for (int k = 2; k <= std::min(max_harmonic, P / 4); k += 2) {
    const double c = cos_coeff(k);
    if (std::abs(c) < 1e-15 * a0) break;
    ratio = std::abs(c) / std::abs(last);
    last = c;
    prof.cos_coeffs.resize(static_cast<std::size_t>(k) + 1, 0.0);
    prof.cos_coeffs[static_cast<std::size_t>(k)] = c;
  }
  // Geometric bound on the dropped tail, floored at the quadrature's rounding level.
  double tail = ratio < 1.0 ? std::abs(last) * ratio / (1.0 - ratio) : 0.0;
  tail = std::max(tail, 1e-15 * a0);
  prof.truncation_error = tail;
  return prof;
}

struct Perturbation {
  int harmonic;
  double cos_amplitude;
  double sin_amplitude = 0.0;
};

/// Unit circle profile plus the given harmonics; rejects first harmonics and non-convex sums.
inline CurvatureProfile preset_perturbed_circle(const std::vector<Perturbation>& terms) {
  CurvatureProfile prof = preset_circle();
  for (const auto& t : terms) {
    if (t.harmonic < 2) throw NotClosed("perturbation harmonic must be >= 2");
    const auto k = static_cast<std::size_t>(t.harmonic);
    if (prof.cos_coeffs.size() < k + 1) prof.cos_coeffs.resize(k + 1, 0.0);
    if (prof.sin_coeffs.size() < k) prof.sin_coeffs.resize(k, 0.0);
    prof.cos_coeffs[k] += t.cos_amplitude;
    prof.sin_coeffs[k - 1] += t.sin_amplitude;
  }
  prof.validate();
  return prof;
}

inline CurvatureProfile preset_perturbed_circle(int harmonic, double amplitude) {
  return preset_perturbed_circle({Perturbation{harmonic, amplitude, 0.0}});
}

enum class Interpolation { exact, trigonometric };

struct BoundarySample {
  double s;
  Vec2 position;
  double phi; ///< tangent angle, lifted so that phi(0) = 0
  double rho;
};

struct BoundaryPoint {
  Vec2 position;
  Vec2 tangent;
  double phi;
};

/// Arc-length parametrized boundary with perimeter 1. Immutable after construction.
class BoundaryCurve {
public:
  BoundaryCurve(CurvatureProfile profile, int n_samples, Interpolation mode = Interpolation::exact)
      : profile_(std::move(profile)), mode_(mode) {
    if (n_samples < 64) throw std::invalid_argument("n_samples must be at least 64");
    profile_.validate();
    if (profile_.cos_coeffs.size() > 1) profile_.cos_coeffs[1] = 0.0;
    if (!profile_.sin_coeffs.empty()) profile_.sin_coeffs[0] = 0.0;
    L_ = kTwoPi * profile_.a(0);

    samples_.reserve(static_cast<std::size_t>(n_samples));
    for (int j = 0; j < n_samples; ++j) {
      const double s = static_cast<double>(j) / n_samples;
      const double phi = phi_exact(s);
      samples_.push_back({s, position_at_angle(phi), phi, rho_at_angle(phi)});
    }
    build_interpolant();
  }

  const CurvatureProfile& profile() const { return profile_; }
  /// Length of the curve before normalization.
  double raw_perimeter() const { return L_; }
  double perimeter() const { return 1.0; }
  int n_samples() const { return static_cast<int>(samples_.size()); }
  const std::vector<BoundarySample>& samples() const { return samples_; }
  Interpolation interpolation() const { return mode_; }

  /// Arc length (lifted) at tangent angle phi.
  double arc_length_at(double phi) const {
    double acc = profile_.a(0) * phi;
    profile_.for_each_harmonic(phi, [&](int k, double c, double s) {
      if (k >= 2) acc += (profile_.a(k) * s + profile_.b(k) * (1.0 - c)) / k;
    });
    return acc / L_;
  }

  /// Curvature radius (perimeter units) at tangent angle phi.
  double rho_at_angle(double phi) const { return profile_.radius(phi) / L_; }

  /// Position at tangent angle phi: (1/L) int_0^phi r(t) (cos t, sin t) dt.
  Vec2 position_at_angle(double phi) const {
    const double c1 = std::cos(phi), s1 = std::sin(phi);
    double X = profile_.a(0) * s1, Y = profile_.a(0) * (1.0 - c1);
    profile_.for_each_harmonic(phi, [&](int k, double ck, double sk) {
      if (k < 2) return;
      const double ak = profile_.a(k), bk = profile_.b(k);
      if (ak == 0.0 && bk == 0.0) return;
      const double p = k + 1.0, m = k - 1.0;
      // cos, sin of (k +- 1) phi
      const double cp = ck * c1 - sk * s1, sp = sk * c1 + ck * s1;
      const double cm = ck * c1 + sk * s1, sm = sk * c1 - ck * s1;
      const double Sp = sp / p, Sm = sm / m, Cp = (1.0 - cp) / p, Cm = (1.0 - cm) / m;
      X += 0.5 * ak * (Sp + Sm) + 0.5 * bk * (Cp + Cm);
      Y += 0.5 * ak * (Cp - Cm) + 0.5 * bk * (Sm - Sp);
    });
    return Vec2(X, Y) / L_;
  }

  /// Lifted tangent angle at arc length s (phi(s + 1) = phi(s) + 2 pi).
  double tangent_angle(double s) const {
    if (mode_ == Interpolation::exact) return phi_exact(s);
    const double f = std::floor(s);
    return kTwoPi * s + trig_eval(phi_periodic_, s - f);
  }

  BoundaryPoint point(double s) const {
    const double phi = tangent_angle(s);
    const Vec2 t(std::cos(phi), std::sin(phi));
    if (mode_ == Interpolation::exact) return {position_at_angle(phi), t, phi};
    const double u = wrap_unit(s);
    return {Vec2(trig_eval(x_, u), trig_eval(y_, u)), t, phi};
  }

  double curvature_radius(double s) const {
    if (mode_ == Interpolation::exact) return rho_at_angle(phi_exact(s));
    return trig_eval(rho_, wrap_unit(s));
  }

  /// int_0^1 rho(s)^p ds by the periodic trapezoid rule in the tangent angle.
  double integrate_rho_power(double p, int nodes = 0) const {
    const int P = nodes > 0 ? nodes : std::max(4096, 64 * (profile_.max_harmonic() + 1));
    double acc = 0.0;
    for (int j = 0; j < P; ++j) acc += std::pow(rho_at_angle(kTwoPi * j / P), p + 1.0);
    return acc * kTwoPi / P;
  }

  /// int_0^1 rho^{-2/3} ds, the reciprocal of the Lazutkin constant C1.
  double lazutkin_integral() const { return integrate_rho_power(-2.0 / 3.0); }

  /// int_0^1 rho^{-1} ds from the arc-length table (trapezoid rule); 2 pi for a closed convex curve.
  double total_turning() const {
    double acc = 0.0;
    for (const auto& smp : samples_) acc += 1.0 / smp.rho;
    return acc / n_samples();
  }

  /// Same boundary evaluated with another interpolation mode.
  BoundaryCurve with_interpolation(Interpolation mode) const {
    BoundaryCurve c = *this;
    c.mode_ = mode;
    return c;
  }

private:
  double phi_exact(double s) const {
    const double f = std::floor(s);
    const double u = s - f;
    double lo = 0.0, hi = kTwoPi, phi = kTwoPi * u;
    for (int it = 0; it < 100; ++it) {
      const double g = arc_length_at(phi) - u;
      if (g > 0.0)
        hi = phi;
      else
        lo = phi;
      double next = phi - g / rho_at_angle(phi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double step = std::abs(next - phi);
      phi = next;
      if (step < 1e-15 * (1.0 + phi)) break;
    }
    return phi + kTwoPi * f;
  }

  using Harmonics = std::vector<std::complex<double>>;

  Harmonics trig_fit(const std::vector<double>& values) const {
    const int n = static_cast<int>(values.size());
    Harmonics c(static_cast<std::size_t>(n / 2 + 1));
    for (int k = 0; k <= n / 2; ++k) {
      std::complex<double> acc = 0.0;
      for (int j = 0; j < n; ++j) {
        const double a = -kTwoPi * static_cast<double>((static_cast<long>(k) * j) % n) / n;
        acc += values[static_cast<std::size_t>(j)] * std::complex<double>(std::cos(a), std::sin(a));
      }
      c[static_cast<std::size_t>(k)] = acc / static_cast<double>(n);
    }
    return c;
  }

  // Real trigonometric interpolant through the samples (Nyquist term split evenly).
  double trig_eval(const Harmonics& c, double s) const {
    const int n = n_samples();
    double acc = c[0].real();
    for (int k = 1; k <= n / 2; ++k) {
      const double w = (2 * k == n) ? 1.0 : 2.0;
      const std::complex<double> e(std::cos(kTwoPi * k * s), std::sin(kTwoPi * k * s));
      acc += w * (c[static_cast<std::size_t>(k)] * e).real();
    }
    return acc;
  }

  void build_interpolant() {
    std::vector<double> xs, ys, ps, rs;
    for (const auto& smp : samples_) {
      xs.push_back(smp.position.x());
      ys.push_back(smp.position.y());
      ps.push_back(smp.phi - kTwoPi * smp.s);
      rs.push_back(smp.rho);
    }
    x_ = trig_fit(xs);
    y_ = trig_fit(ys);
    phi_periodic_ = trig_fit(ps);
    rho_ = trig_fit(rs);
    if (n_samples() % 2 == 0) {
      // The Nyquist mode of a real interpolant is a pure cosine.
      for (auto* h : {&x_, &y_, &phi_periodic_, &rho_}) {
        auto& nyq = (*h)[static_cast<std::size_t>(n_samples() / 2)];
        nyq = {nyq.real(), 0.0};
      }
    }
  }

  CurvatureProfile profile_;
  Interpolation mode_;
  double L_ = 1.0;
  std::vector<BoundarySample> samples_;
  Harmonics x_, y_, phi_periodic_, rho_;
};

inline BoundaryCurve build_boundary(const CurvatureProfile& profile, int n_samples,
                                    Interpolation mode = Interpolation::exact) {
  return BoundaryCurve(profile, n_samples, mode);
}

inline BoundaryPoint point(const BoundaryCurve& curve, double s) { return curve.point(s); }

inline double curvature_radius(const BoundaryCurve& curve, double s) { return curve.curvature_radius(s); }

} // namespace billiard
