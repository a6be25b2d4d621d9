#pragma once

// Birkhoff normal form of the billiard map near the boundary.
//
// In Lazutkin coordinates
//
//   x = C1 int_0^s rho^{-2/3},   y = 4 C1 rho^{1/3} sin(v / 2),   C1 = (int_0^1 rho^{-2/3})^{-1},
//
// the map reads x' = x + zeta(y) + fx(x, y), y' = y + gy(x, y) with fx = O(y^k),
// gy = O(y^{k+1}). Each step of the iteration removes the x-dependence of the
// y^k term by an exact-symplectic change of variables and moves its average
// into zeta. The odd coefficients c_3, c_5, ... of the limit zeta are invariants.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "billiard/domain_geometry.hpp"
#include "billiard/errors.hpp"
#include "billiard/fourier_taylor_series.hpp"
#include "billiard/univariate_poly.hpp"

namespace billiard {

using FTS = FourierTaylorSeries;

struct MapExpansion {
  UnivariatePoly<double> zeta; ///< integrable part, y + ...
  FTS fx;                      ///< x' - x - zeta(y), starts at y^k
  FTS gy;                      ///< y' - y, starts at y^{k+1}
  int k = 3;

  int y_order() const { return fx.y_order(); }
  int harmonics() const { return fx.harmonics(); }
};

/// Lazutkin coordinate x(phi) = C1 int_0^phi (r / L)^{1/3} in the tangent angle.
class LazutkinChart {
public:
  explicit LazutkinChart(const BoundaryCurve& curve) : curve_(&curve) {
    const int Kp = curve.profile().max_harmonic();
    const int P = std::max(1024, 32 * (Kp + 1));
    std::vector<double> vals(static_cast<std::size_t>(P));
    for (int j = 0; j < P; ++j) vals[static_cast<std::size_t>(j)] = std::cbrt(curve.rho_at_angle(kTwoPi * j / P));
    // Real Fourier coefficients of rho^{1/3}; keep until they reach the rounding floor.
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= P;
    cos_.push_back(mean);
    sin_.push_back(0.0);
    const auto w = detail::twiddles(P, -1.0);
    std::size_t keep = 1;
    for (int k = 1; k < P / 2; ++k) {
      cplx acc = 0.0;
      for (int j = 0; j < P; ++j) acc += vals[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>((static_cast<long>(k) * j) % P)];
      acc *= 2.0 / P;
      cos_.push_back(acc.real());
      sin_.push_back(-acc.imag());
      if (std::abs(acc) > 1e-17 * mean) keep = cos_.size();
    }
    cos_.resize(keep);
    sin_.resize(keep);
    C1_ = 1.0 / (kTwoPi * mean);
  }

  double C1() const { return C1_; }

  double x_of_phi(double phi) const {
    double acc = cos_[0] * phi;
    for (std::size_t k = 1; k < cos_.size(); ++k) {
      const double kk = static_cast<double>(k);
      acc += (cos_[k] * std::sin(kk * phi) + sin_[k] * (1.0 - std::cos(kk * phi))) / kk;
    }
    return C1_ * acc;
  }

  /// Tangent angle at Lazutkin coordinate x in [0, 1).
  double phi_of_x(double x) const {
    double lo = 0.0, hi = kTwoPi, phi = kTwoPi * x;
    for (int it = 0; it < 100; ++it) {
      const double g = x_of_phi(phi) - x;
      if (g > 0.0)
        hi = phi;
      else
        lo = phi;
      double next = phi - g / (C1_ * std::cbrt(curve_->rho_at_angle(phi)));
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double step = std::abs(next - phi);
      phi = next;
      if (step < 1e-15) break;
    }
    return phi;
  }

private:
  const BoundaryCurve* curve_;
  std::vector<double> cos_, sin_;
  double C1_ = 0.0;
};

namespace detail {

// Jet of the billiard map at tangent angle phi0 in Lazutkin coordinates:
// returns (x' - x, y') as power series in y up to order N.
inline std::pair<UnivariatePoly<double>, UnivariatePoly<double>> lazutkin_jet(const BoundaryCurve& curve, double C1,
                                                                             double phi0, int N) {
  using P = UnivariatePoly<double>;
  const int Np = N + 2;
  const double L = curve.raw_perimeter();
  // R(phi0 + t) = rho at tangent angle phi0 + t, as a Taylor series in t.
  P R(Np);
  double fact = 1.0;
  for (int m = 0; m <= Np; ++m) {
    if (m > 0) fact *= m;
    R[m] = curve.profile().radius_derivative(phi0, m) / L / fact;
  }
  const P t = P::identity(Np);
  // Chord from phi0 to phi0 + psi in the frame of the tangent at phi0.
  const P dx = (R * cos(t)).integral(), dy = (R * sin(t)).integral();
  const P slope = dy.shifted(-1) * reciprocal(dx.shifted(-1)); // tan of the departure angle, psi/2 + ...
  // psi as a function of the departure angle v: 2 slope(psi) = 2 tan v.
  P twice = slope * 2.0;
  twice[0] = 0.0, twice[1] = 1.0; // exact; the quotient leaves rounding here
  const P psi_of_v = compose(revert(twice), tan(t) * 2.0);
  const P R13 = power(R, 1.0 / 3.0);
  const P advance = compose(R13.integral(), psi_of_v) * C1;
  const P y_out = compose(R13, psi_of_v) * sin((psi_of_v - t) * 0.5) * (4.0 * C1);
  // Departure angle from the Lazutkin y.
  const P v_of_y = arcsin(t * (1.0 / (4.0 * C1 * std::cbrt(R[0])))) * 2.0;
  return {compose(advance, v_of_y).with_order(N), compose(y_out, v_of_y).with_order(N)};
}

// Coefficients below this (relative to the map's size) are rounding noise; left in,
// they are amplified by (2 pi k)^m / m! whenever a series is shifted by O(y).
inline constexpr double noise_floor = 1e-14;

inline void denoise(MapExpansion& e) {
  e.fx.chop_lines(noise_floor);
  e.gy.chop_lines(noise_floor);
}

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline double line_scale(const FTS& f, int n) { return n <= f.y_order() ? f.max_abs_line(n) : 0.0; }

// Largest coefficient in the top quarter of the harmonic band, relative to its line.
inline double band_tail(const MapExpansion& e) {
  const int K = e.harmonics();
  double r = 0.0;
  for (const FTS* f : {&e.fx, &e.gy})
    for (int n = 0; n <= f->y_order(); ++n) {
      const double line = f->max_abs_line(n);
      if (line == 0.0) continue;
      double tail = 0.0;
      for (int k = 3 * K / 4 + 1; k <= K; ++k) tail = std::max({tail, std::abs((*f)(n, k)), std::abs((*f)(n, -k))});
      r = std::max(r, tail / line);
    }
  return r;
}

inline MapExpansion lazutkin_seed_fixed(const BoundaryCurve& curve, const LazutkinChart& chart, int order, int K) {
  const int M = 4 * K + 4;
  std::vector<UnivariatePoly<cplx>> fs, gs;
  fs.reserve(static_cast<std::size_t>(M));
  gs.reserve(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) {
    const double phi0 = chart.phi_of_x(static_cast<double>(j) / M);
    const auto [adv, yout] = detail::lazutkin_jet(curve, chart.C1(), phi0, order);
    UnivariatePoly<cplx> f(order), g(order);
    for (int n = 0; n <= order; ++n) {
      f[n] = adv[n] - (n == 1 ? 1.0 : 0.0);
      g[n] = yout[n] - (n == 1 ? 1.0 : 0.0);
    }
    fs.push_back(f);
    gs.push_back(g);
  }
  MapExpansion e{UnivariatePoly<double>::identity(order), FTS::from_samples(fs, order, K).real_part(),
                 FTS::from_samples(gs, order, K).real_part(), 3};
  const double scale = 1.0 + e.fx.max_abs() + e.gy.max_abs();
  for (int n = 0; n < 3; ++n)
    if (line_scale(e.fx, n) > 1e-10 * scale) throw ConstraintViolation("seed has a y^" + std::to_string(n) + " term in x' - x - y");
  for (int n = 0; n < 4; ++n)
    if (line_scale(e.gy, n) > 1e-10 * scale) throw ConstraintViolation("seed has a y^" + std::to_string(n) + " term in y' - y");
  for (int n = 0; n < 3; ++n) e.fx.clear_line(n);
  for (int n = 0; n < 4; ++n) e.gy.clear_line(n);
  denoise(e);
  return e;
}

} // namespace detail

/// A point (x + dx(x, y), y_sub(x, y)) written over the formal base variables (x, y).
struct PointSeries {
  FTS dx;
  FTS y;
};

inline PointSeries identity_point(int N, int K) { return {FTS(N, K), FTS::y_power(1, N, K)}; }

/// Image of a point series under the map.
inline PointSeries apply_map(const MapExpansion& e, const PointSeries& p) {
  return {p.dx + compose_poly(e.zeta, p.y) + compose(e.fx, p.dx, p.y), p.y + compose(e.gy, p.dx, p.y)};
}

/// Distance of phi o T o phi from T, T(x, y) = (x, -y), as series: the largest
/// y^n line of the defect relative to max(1, y^n line of the map).
inline double mirror_defect(const MapExpansion& e) {
  const int N = e.y_order(), K = e.harmonics();
  const auto p1 = apply_map(e, identity_point(N, K));
  const auto p2 = apply_map(e, {p1.dx, p1.y * cplx(-1.0)});
  const FTS dy = p2.y + FTS::y_power(1, N, K);
  double r = 0.0;
  for (int n = 0; n <= N; ++n) {
    const double scale = std::max({1.0, e.fx.max_abs_line(n), e.gy.max_abs_line(n), std::abs(e.zeta[n])});
    r = std::max(r, std::max(p2.dx.max_abs_line(n), dy.max_abs_line(n)) / scale);
  }
  return r;
}

/// Lazutkin-frame expansion x' = x + y + fx, y' = y + gy with fx = O(y^3), gy = O(y^4),
/// truncated at y^order with `harmonics` Fourier modes in x.
///
/// The map is jet-transported pointwise on a uniform x-grid: the chord equation is
/// solved as a power series in the tangent-angle increment, converted to Lazutkin
/// coordinates and transformed to Fourier coefficients.
///
/// With harmonics = 0 the budget is chosen from 24..192 by the seed's own mirror
/// defect: too few modes leave the map unresolved, too many resolve only the profile's
/// rounding (amplified by k^order), and either breaks phi o T o phi = T. The scan
/// stops once the defect is below 1e-11, or has passed a minimum below 1e-8.
inline MapExpansion lazutkin_seed(const BoundaryCurve& curve, int order, int harmonics = 0) {
  if (order < 4) throw std::invalid_argument("seed order must be at least 4");
  const LazutkinChart chart(curve);
  if (harmonics > 0) return detail::lazutkin_seed_fixed(curve, chart, order, harmonics);
  std::optional<MapExpansion> best;
  double best_defect = 0.0;
  for (int K : {24, 32, 48, 64, 96, 128, 192}) {
    auto e = detail::lazutkin_seed_fixed(curve, chart, order, K);
    const double defect = mirror_defect(e);
    if (best && defect > best_defect && best_defect < 1e-8) break;
    if (!best || defect < best_defect) best = std::move(e), best_defect = defect;
    if (best_defect < 1e-11) break;
  }
  return *best;
}

/// The change of variables (x, y) -> (u, v) of one iteration step,
///
///   u = x + (k+1) v^{k-1} B(x),   y = v sqrt(1 + 2 v^{k-1} b(x)),   b = B',
///
/// generated by S(x, v) = v^{k+1} B(x) in the variables (x, v^2/2).
struct StepChange {
  int k = 3;
  FTS B; ///< function of x only (y^0 line), B(0) = 0
  FTS b; ///< B'

  /// (x, y) -> (u, v); v solves v = y (1 + 2 v^{k-1} b(x))^{-1/2}.
  PointSeries forward(const PointSeries& p) const {
    const int N = p.y.y_order();
    const auto id = FTS::y_power(1, N, p.y.harmonics());
    const FTS bx = compose(b, p.dx, id), Bx = compose(B, p.dx, id);
    FTS v = p.y;
    for (int it = 0; it <= N; ++it) {
      const FTS next = p.y * binomial_one_plus(power(v, k - 1) * bx * cplx(2.0), -0.5);
      const double change = max_difference(next, v);
      v = next;
      if (change == 0.0) break;
    }
    return {p.dx + power(v, k - 1) * Bx * cplx(k + 1.0), v};
  }

  /// (u, v) -> (x, y); x solves x = u - (k+1) v^{k-1} B(x).
  PointSeries inverse(const PointSeries& p) const {
    const int N = p.y.y_order();
    const auto id = FTS::y_power(1, N, p.y.harmonics());
    const FTS vk = power(p.y, k - 1);
    FTS dx = p.dx;
    for (int it = 0; it <= N; ++it) {
      const FTS next = p.dx - vk * compose(B, dx, id) * cplx(k + 1.0);
      const double change = max_difference(next, dx);
      dx = next;
      if (change == 0.0) break;
    }
    return {dx, p.y * sqrt_one_plus(vk * compose(b, dx, id) * cplx(2.0))};
  }

  /// S(x, v) = v^{k+1} B(x).
  FTS generating_function() const { return B.shifted_y(k + 1); }

  /// G with J du - I dx = dG (J = v^2/2, I = y^2/2): G = ((k-1)/2) v^{k+1} B(x).
  FTS exact_primitive() const { return B.shifted_y(k + 1) * cplx(0.5 * (k - 1)); }

  /// Largest coefficient of J du - I dx - dG over the base variables (x, v).
  double exactness_defect() const {
    const int N = B.y_order(), K = B.harmonics();
    const auto v = FTS::y_power(1, N, K);
    const PointSeries xv = forward_explicit(v);
    const FTS J = v * v * cplx(0.5);
    const FTS I = xv.y * xv.y * cplx(0.5);
    const FTS u = xv.dx; // u - x
    const FTS G = exact_primitive();
    const FTS ux = FTS::constant(1.0, N, K) + u.differentiate_x();
    const FTS r1 = J * ux - I - G.differentiate_x();
    const FTS r2 = J * u.differentiate_y() - G.differentiate_y();
    return std::max(r1.max_abs(), r2.max_abs());
  }

private:
  // u - x and y written over (x, v).
  PointSeries forward_explicit(const FTS& v) const {
    const FTS vk = power(v, k - 1);
    return {vk * B * cplx(k + 1.0), v * sqrt_one_plus(vk * b * cplx(2.0))};
  }

  static FTS power(const FTS& f, int m) {
    auto r = FTS::constant(1.0, f.y_order(), f.harmonics());
    for (int i = 0; i < m; ++i) r = r * f;
    return r;
  }
};

/// Step change built from the y^k coefficient f0(x) of fx.
inline StepChange make_step_change(const std::vector<cplx>& f0_line, int k, int N, int K) {
  FTS f0 = FTS::from_harmonics(f0_line, N, K);
  f0(0, 0) = 0.0; // f0 - [f0]
  StepChange c;
  c.k = k;
  c.b = f0 * cplx(-1.0 / (k + 2));
  c.B = c.b.integrate_x();
  return c;
}

/// Largest violation of (k+2) g_{k+1} + f_k' = 0, harmonic by harmonic, relative to
/// the size of the two terms (or 1, if they are smaller).
inline double symplectic_residual(const MapExpansion& e) {
  const int k = e.k, K = e.harmonics();
  if (k + 1 > e.y_order()) return 0.0;
  double r = 0.0, scale = 1.0;
  for (int q = -K; q <= K; ++q) {
    const cplx g = (k + 2.0) * e.gy(k + 1, q), f = cplx(0.0, 2.0 * std::numbers::pi * q) * e.fx(k, q);
    r = std::max(r, std::abs(g + f));
    scale = std::max({scale, std::abs(g), std::abs(f)});
  }
  return r / scale;
}

/// Largest even-degree coefficient of zeta.
inline double zeta_even_residual(const UnivariatePoly<double>& zeta) {
  double r = 0.0;
  for (int n = 0; n <= zeta.order(); n += 2) r = std::max(r, std::abs(zeta[n]));
  return r;
}

struct StepRecord {
  int k_in = 0, k_out = 0;
  double mean_f0 = 0.0;           ///< [f0]
  std::vector<cplx> f0;           ///< harmonics of f0, index q + K
  std::vector<cplx> b, B;         ///< harmonics of b(u) and B(x)
  double symplectic_residual = 0.0;
  double zeta_even_residual = 0.0;
  double removed_line = 0.0;      ///< y^k line left in fx after the step, relative to the input's
  double skipped_lines = 0.0;     ///< even-order lines dropped by the jump k -> k+2, relative to the input's next lines
  double mirror_defect = 0.0;     ///< of the output map
  double exactness_defect = 0.0;  ///< of the step's change of variables
  double band_tail = 0.0;         ///< top quarter of the harmonic band, relative to its line, of the output
};

struct StepOptions {
  double tol = 1e-9;          ///< on constraint residuals, each relative to max(1, the line sizes involved)
  bool check_mirror = true;   ///< measure mirror symmetry (and jump over even orders when it holds)
  double mirror_tol = 1e-6;   ///< relative mirror defect below which the map counts as symmetric,
                              ///< and largest relative even-order line the jump may drop
};

/// One normal-form iteration step. Throws ConstraintViolation when the symplectic or
/// mirror constraints fail beyond tolerance.
inline std::pair<MapExpansion, StepRecord> iterate_step(const MapExpansion& in, const StepOptions& opt = {}) {
  const int N = in.y_order(), K = in.harmonics(), k = in.k;
  if (k < 2 || k >= N) throw OrderExceeded("step order " + std::to_string(k) + " needs y-order above it (have " + std::to_string(N) + ")");
  in.fx.compatible(in.gy);
  StepRecord rec;
  rec.k_in = k;
  const double scale = std::max({1.0, in.fx.max_abs_line(k), detail::line_scale(in.gy, k + 1)});
  const double tol = opt.tol * scale;
  for (int n = 0; n < k; ++n)
    if (in.fx.max_abs_line(n) > tol || in.gy.max_abs_line(n) > tol || (n == k - 1 && in.gy.max_abs_line(k) > tol))
      throw ConstraintViolation("expansion is not of order " + std::to_string(k));

  rec.symplectic_residual = symplectic_residual(in);
  if (rec.symplectic_residual > opt.tol)
    throw ConstraintViolation("symplectic constraint (k+2) g_{k+1} + f_k' = " + detail::sci(rec.symplectic_residual) +
                              " at k = " + std::to_string(k));
  const bool symmetric = opt.check_mirror && mirror_defect(in) < opt.mirror_tol;
  rec.zeta_even_residual = zeta_even_residual(in.zeta);
  if (symmetric && rec.zeta_even_residual > tol)
    throw ConstraintViolation("zeta has even coefficients (" + detail::sci(rec.zeta_even_residual) + ")");

  MapExpansion out;
  if (symmetric && k % 2 == 0) {
    // Mirror symmetry with odd zeta forces the even-order terms to vanish.
    rec.skipped_lines = std::max(in.fx.max_abs_line(k), detail::line_scale(in.gy, k + 1)) /
                        std::max({1.0, detail::line_scale(in.fx, k + 1), detail::line_scale(in.gy, k + 2)});
    if (rec.skipped_lines > opt.mirror_tol)
      throw ConstraintViolation("mirror symmetry violated: f_k, g_{k+1} = " + detail::sci(rec.skipped_lines) + " at even k = " + std::to_string(k));
    out = in;
    out.fx.clear_line(k);
    if (k + 1 <= N) out.gy.clear_line(k + 1);
    out.k = k + 1;
  } else {
    const auto f0 = in.fx.line(k);
    rec.f0 = f0;
    rec.mean_f0 = f0[static_cast<std::size_t>(K)].real();
    const StepChange change = make_step_change(f0, k, N, K);
    rec.b = change.b.line(0);
    rec.B = change.B.line(0);
    rec.exactness_defect = change.exactness_defect();

    const auto p = change.forward(apply_map(in, change.inverse(identity_point(N, K))));
    out.zeta = in.zeta;
    out.zeta[k] += rec.mean_f0;
    out.fx = (p.dx - compose_poly(out.zeta, FTS::y_power(1, N, K))).real_part();
    out.gy = (p.y - FTS::y_power(1, N, K)).real_part();
    out.k = k + 1;
    rec.removed_line = out.fx.max_abs_line(k) / scale;
    if (rec.removed_line > opt.tol) throw ConstraintViolation("step did not remove the y^" + std::to_string(k) + " term");
    for (int n = 0; n <= k; ++n) out.fx.clear_line(n);
    for (int n = 0; n <= k + 1 && n <= N; ++n) out.gy.clear_line(n);
    if (symmetric && k + 1 < N) {
      rec.skipped_lines = std::max(out.fx.max_abs_line(k + 1), detail::line_scale(out.gy, k + 2)) /
                          std::max({1.0, detail::line_scale(in.fx, k + 1), detail::line_scale(in.gy, k + 2)});
      if (rec.skipped_lines > opt.mirror_tol)
        throw ConstraintViolation("mirror symmetry violated after step: y^" + std::to_string(k + 1) + " terms " + detail::sci(rec.skipped_lines));
      out.fx.clear_line(k + 1);
      if (k + 2 <= N) out.gy.clear_line(k + 2);
      out.k = k + 2;
    }
  }
  detail::denoise(out);
  rec.k_out = out.k;
  rec.band_tail = detail::band_tail(out);
  if (opt.check_mirror) rec.mirror_defect = mirror_defect(out);
  return {out, rec};
}

struct NormalFormResult {
  std::vector<double> c_coeffs; ///< c_3, c_5, ..., c_{max_order}
  double C1 = 0.0;
  UnivariatePoly<double> zeta;
  std::vector<StepRecord> ledger;
  MapExpansion final_map;

  /// c_{2i+1} with c_1 = 1.
  double c(int degree) const {
    if (degree == 1) return 1.0;
    const int i = (degree - 3) / 2;
    if (degree % 2 == 0 || i < 0 || i >= static_cast<int>(c_coeffs.size())) throw OrderExceeded("c_" + std::to_string(degree) + " not computed");
    return c_coeffs[static_cast<std::size_t>(i)];
  }
};

struct NormalFormOptions {
  int harmonics = 0;      ///< 0: chosen by lazutkin_seed
  int max_seed_order = 21; ///< largest y-order the seed is trusted to
  StepOptions step;
};

/// Iterate until zeta is determined through y^max_order.
inline NormalFormResult normal_form_from(MapExpansion e, int max_order, const StepOptions& opt = {}) {
  if (max_order < 3 || max_order % 2 == 0) throw std::invalid_argument("max_order must be odd and at least 3");
  if (max_order + 1 > e.y_order()) throw OrderExceeded("expansion of y-order " + std::to_string(e.y_order()) + " cannot fix c_" + std::to_string(max_order));
  NormalFormResult r;
  while (e.k <= max_order) {
    auto [next, rec] = iterate_step(e, opt);
    r.ledger.push_back(std::move(rec));
    e = std::move(next);
  }
  r.zeta = e.zeta;
  for (int d = 3; d <= max_order; d += 2) r.c_coeffs.push_back(e.zeta[d]);
  r.final_map = std::move(e);
  return r;
}

inline NormalFormResult normal_form(const BoundaryCurve& curve, int max_order, const NormalFormOptions& opt = {}) {
  if (max_order < 3 || max_order % 2 == 0) throw std::invalid_argument("max_order must be odd and at least 3");
  const int N = max_order + 2;
  if (N > opt.max_seed_order)
    throw SeedOrderExceeded("c_" + std::to_string(max_order) + " needs a seed of order " + std::to_string(N) +
                            ", limit is " + std::to_string(opt.max_seed_order));
  auto r = normal_form_from(lazutkin_seed(curve, N, opt.harmonics), max_order, opt.step);
  r.C1 = 1.0 / curve.lazutkin_integral();
  return r;
}

/// Integrable map x' = x + zeta(y), y' = y.
inline MapExpansion integrable_map(const UnivariatePoly<double>& zeta, int k, int harmonics) {
  const int N = zeta.order();
  return {zeta, FTS(N, harmonics), FTS(N, harmonics), k};
}

/// Conjugate backwards by the step change of order k built from f0: returns a map
/// whose iteration step at order k reproduces `e` (with [f0] moved out of zeta).
inline MapExpansion conjugate_backward(const MapExpansion& e, int k, const std::vector<cplx>& f0_line) {
  const int N = e.y_order(), K = e.harmonics();
  const StepChange change = make_step_change(f0_line, k, N, K);
  const auto p = change.inverse(apply_map(e, change.forward(identity_point(N, K))));
  MapExpansion out;
  out.zeta = e.zeta;
  const double mean = f0_line[static_cast<std::size_t>((f0_line.size() - 1) / 2)].real();
  out.zeta[k] -= mean;
  out.fx = (p.dx - compose_poly(out.zeta, FTS::y_power(1, N, K))).real_part();
  out.gy = (p.y - FTS::y_power(1, N, K)).real_part();
  for (int n = 0; n < k; ++n) out.fx.clear_line(n);
  for (int n = 0; n <= k; ++n) out.gy.clear_line(n);
  out.k = k;
  return out;
}

/// Per-step generating-function data of the changes of variables.
struct GeneratingEntry {
  int k = 0;
  FTS S;                   ///< v^{k+1} B(x)
  FTS G;                   ///< primitive with J du - I dx = dG
  double exactness_defect = 0.0;
};

inline std::vector<GeneratingEntry> transform_generating_ledger(const std::vector<StepRecord>& ledger, int y_order) {
  std::vector<GeneratingEntry> out;
  for (const auto& rec : ledger) {
    if (rec.B.empty()) continue; // pass-through step, identity change
    const int K = (static_cast<int>(rec.B.size()) - 1) / 2;
    StepChange c;
    c.k = rec.k_in;
    c.B = FTS::from_harmonics(rec.B, y_order, K);
    c.b = FTS::from_harmonics(rec.b, y_order, K);
    out.push_back({c.k, c.generating_function(), c.exact_primitive(), c.exactness_defect()});
  }
  return out;
}

/// Along a closed loop of points (x_i, v_i), i = 0..n with (x_n, v_n) = (x_0 + m, v_0),
/// the transformed action sum_i [G(x_i, v_i) - G(x_{i+1}, v_{i+1}) + H_i] equals sum_i H_i.
/// Returns the difference of the two sums.
inline double telescoping_defect(const GeneratingEntry& e, const std::vector<std::pair<double, double>>& loop,
                                 const std::vector<double>& H) {
  if (loop.size() != H.size() + 1) throw std::invalid_argument("loop needs one more point than action terms");
  double transformed = 0.0, original = 0.0;
  for (std::size_t i = 0; i < H.size(); ++i) {
    transformed += e.G.evaluate(loop[i].first, loop[i].second) - e.G.evaluate(loop[i + 1].first, loop[i + 1].second) + H[i];
    original += H[i];
  }
  return std::abs(transformed - original);
}

/// Ledger CSV: one row per step.
inline void write_ledger_csv(std::ostream& os, const NormalFormResult& r) {
  os << "k_in,k_out,mean_f0,symplectic_residual,zeta_even_residual,removed_line,skipped_lines,mirror_defect,exactness_defect,band_tail\n";
  char buf[320];
  for (const auto& s : r.ledger) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.15e,%.3e,%.3e,%.3e,%.3e,%.3e,%.3e,%.3e\n", s.k_in, s.k_out, s.mean_f0,
                  s.symplectic_residual, s.zeta_even_residual, s.removed_line, s.skipped_lines, s.mirror_defect,
                  s.exactness_defect, s.band_tail);
    os << buf;
  }
}

/// c_{2j+1} = coeff * pi^{pi_power}.
template <typename T>
struct PiMultiple {
  T coeff;
  int pi_power;
};

/// Circle normal form in exact arithmetic (T = cpp_rational, or double).
///
/// With X = 2 pi x and Y = pi y / 2 the circle's Lazutkin map is X' = X + Psi(Y),
/// where Psi is obtained from the chord equation of the unit circle by the same jet
/// transport as the general seed; every coefficient is rational. The map is
/// x-independent, so each iteration step is the identity change and only moves the
/// y^k coefficient into zeta. Returns c_3, c_5, ..., c_{max_order}.
template <typename T>
std::vector<PiMultiple<T>> circle_normal_form_exact(int max_order) {
  using P = UnivariatePoly<T>;
  const int Np = max_order + 2;
  const P t = P::identity(Np);
  const P dx = sin(t), dy = P::constant(T(1), Np) - cos(t); // unit circle, tangent-angle parametrization
  const P slope = dy.shifted(-1) * reciprocal(dx.shifted(-1));
  const P psi_of_v = compose(revert(slope * T(2)), tan(t) * T(2));
  const P v_of_Y = arcsin(t) * T(2);
  const P Psi = compose(psi_of_v, v_of_Y); // X' - X as a series in Y
  // Integrable iteration: zeta_{k+1} = zeta_k + [f_k] y^k with f = Psi - zeta, x-independent.
  P zeta = P::monomial(1, Psi[1], Np), f = Psi - zeta;
  for (int k = 3; k <= max_order; ++k) {
    zeta[k] += f[k];
    f[k] = T(0);
  }
  // x' - x = Psi(pi y / 2) / (2 pi), so c_n = zeta_n pi^{n-1} / 2^{n+1} (and c_1 = Psi_1 / 4 = 1).
  std::vector<PiMultiple<T>> out;
  for (int n = 3; n <= max_order; n += 2) {
    T c = zeta[n];
    for (int i = 0; i < n + 1; ++i) c /= T(2);
    out.push_back({c, n - 1});
  }
  return out;
}

} // namespace billiard
