#pragma once

// Property checks shared by `billiard_cli check` and the acceptance runner. Each
// returns the worst observed value next to its tolerance, so reports never hide how
// close a pass was.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "billiard/beta_spectrum.hpp"
#include "billiard/billiard_map.hpp"
#include "billiard/birkhoff_normalform.hpp"
#include "billiard/domain_geometry.hpp"
#include "billiard/mather_orbits.hpp"

namespace billiard {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0; ///< worst observed quantity
  double tol = 0.0;
  std::string detail;
};

inline std::string format_check(const CheckResult& c) {
  char buf[96];
  std::snprintf(buf, sizeof buf, " (worst %.3e, tol %.1e)", c.value, c.tol);
  return std::string(c.passed ? "PASS " : "FAIL ") + c.name + buf + (c.detail.empty() ? "" : ": " + c.detail);
}

/// The 10x10 grid s = i/10, v = pi j/11 used for map invariants.
template <typename F>
double phase_grid_worst(F f) {
  double worst = 0.0;
  for (int i = 0; i < 10; ++i)
    for (int j = 1; j <= 10; ++j) worst = std::max(worst, f(PhasePoint{i / 10.0, std::numbers::pi * j / 11.0}));
  return worst;
}

inline CheckResult check_closure(const BoundaryCurve& curve, double tol = 1e-10) {
  CheckResult r{"closure", false, 0.0, tol, ""};
  const auto& p = curve.profile();
  // int rho^{-1} ds = total turning = 2 pi
  r.value = std::abs(curve.integrate_rho_power(-1.0) - 2.0 * std::numbers::pi);
  r.passed = r.value < tol && p.min_radius() > 0.0;
  r.detail = "min r = " + detail::sci(p.min_radius());
  return r;
}

inline CheckResult check_reversibility(const BoundaryCurve& curve, double tol = 1e-8) {
  CheckResult r{"reversibility", false, 0.0, tol, ""};
  r.value = phase_grid_worst([&](PhasePoint p) { return reversibility_defect(curve, p); });
  r.passed = r.value < tol;
  return r;
}

inline CheckResult check_area_preservation(const BoundaryCurve& curve, double tol = 1e-6) {
  CheckResult r{"area-preservation", false, 0.0, tol, ""};
  r.value = phase_grid_worst([&](PhasePoint p) { return std::abs(area_jacobian(curve, p) - 1.0); });
  r.passed = r.value <= tol;
  return r;
}

/// Symplectic identity and odd zeta on every iteration step up to `order`.
inline CheckResult check_normal_form_steps(const BoundaryCurve& curve, int order, double tol = 1e-9) {
  CheckResult r{"normal-form steps", false, 0.0, tol, ""};
  try {
    NormalFormOptions opt;
    opt.step.tol = tol;
    const auto nf = normal_form(curve, order, opt);
    for (const auto& s : nf.ledger) r.value = std::max({r.value, s.symplectic_residual, s.zeta_even_residual});
    r.passed = r.value <= tol;
    r.detail = std::to_string(nf.ledger.size()) + " steps through c_" + std::to_string(order);
  } catch (const std::exception& e) {
    r.value = std::nan("");
    r.detail = e.what();
  }
  return r;
}

/// beta on the rationals with q <= q_max, sorted by h: each interior value must lie on
/// or below the chord of its neighbours. Unconverged entries are skipped and counted;
/// near-separatrix orbits of integrable domains converge too slowly to insist on them.
inline CheckResult check_convexity(const std::vector<SpectrumEntry>& spectrum, double tol = 1e-8) {
  CheckResult r{"beta convexity", false, 0.0, tol, ""};
  std::vector<std::pair<double, double>> pts;
  for (const auto& e : spectrum)
    if (e.converged) pts.emplace_back(static_cast<double>(e.p) / e.q, e.beta());
  std::sort(pts.begin(), pts.end());
  double worst = 0.0; // most negative chord excess
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const auto [h0, b0] = pts[i - 1];
    const auto [h1, b1] = pts[i];
    const auto [h2, b2] = pts[i + 1];
    const double chord = b0 + (b2 - b0) * (h1 - h0) / (h2 - h0);
    worst = std::min(worst, chord - b1);
  }
  r.value = -worst;
  r.passed = pts.size() >= 3 && r.value <= tol;
  r.detail = std::to_string(pts.size()) + " of " + std::to_string(spectrum.size()) + " rationals converged";
  return r;
}

/// beta(np/nq) = beta(p/q) for n = 2, 3.
inline CheckResult check_multiple_cover(const BoundaryCurve& curve, double tol = 1e-8) {
  CheckResult r{"multiple-cover consistency", false, 0.0, tol, ""};
  MinimizeOptions multi;
  multi.allow_multiple = true;
  try {
    for (auto [p, q] : std::vector<std::pair<int, int>>{{1, 3}, {1, 4}, {2, 5}, {1, 7}}) {
      const double base = beta_rational(curve, p, q);
      for (int n = 2; n <= 3; ++n) r.value = std::max(r.value, std::abs(beta_rational(curve, n * p, n * q, multi) - base));
    }
    r.passed = r.value <= tol;
  } catch (const std::exception& e) {
    r.value = std::nan("");
    r.detail = e.what();
  }
  return r;
}

/// Marked length spectrum of the curve against a rotated copy.
inline CheckResult check_isometry(const BoundaryCurve& curve, int q_max, double tol = 1e-8, int threads = 0,
                                  double theta = 0.7) {
  CheckResult r{"isometry invariance", false, 0.0, tol, ""};
  const BoundaryCurve turned(curve.profile().rotated(theta), curve.n_samples(), curve.interpolation());
  const auto a = marked_length_spectrum(curve, q_max, threads), b = marked_length_spectrum(turned, q_max, threads);
  bool all = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].converged || !b[i].converged) {
      all = false;
      continue;
    }
    r.value = std::max(r.value, std::abs(a[i].action - b[i].action));
  }
  r.passed = all && r.value <= tol;
  r.detail = std::to_string(a.size()) + " rationals, q <= " + std::to_string(q_max);
  return r;
}

inline bool is_disc(const CurvatureProfile& p) {
  for (int k = 1; k <= p.max_harmonic(); ++k)
    if (p.a(k) != 0.0 || p.b(k) != 0.0) return false;
  return true;
}

/// beta_3 <= pi^2/6, with equality exactly for the disc.
inline CheckResult check_sharp_bound(const BoundaryCurve& curve) {
  CheckResult r{"beta_3 <= pi^2/6", false, 0.0, 1e-6, ""};
  try {
    const auto rep = corollary2_report(curve);
    r.value = rep.sharp_gap;
    r.passed = rep.sharp_holds && rep.equality == is_disc(curve.profile());
    r.detail = std::string("gap ") + detail::sci(rep.sharp_gap) + (rep.equality ? ", equality" : ", strict");
  } catch (const std::exception& e) {
    r.value = std::nan("");
    r.detail = e.what();
  }
  return r;
}

/// Physical beta_3 from the normal form against the variational fit.
inline CheckResult check_cross_path(const BoundaryCurve& curve, int q_max, double tol = 1e-3, int threads = 0) {
  CheckResult r{"beta_3 normal form vs fit", false, 0.0, tol, ""};
  const auto cv = cross_validate(curve, q_max, 3, threads, {}, std::min(10, q_max - 5));
  if (!cv.error.empty() || cv.gaps.size() < 2) {
    r.value = std::nan("");
    r.detail = cv.error;
    return r;
  }
  r.value = cv.gaps[1].rel_gap;
  r.passed = r.value <= tol;
  r.detail = "normal form " + detail::sci(cv.gaps[1].normal_form) + ", fit " + detail::sci(cv.gaps[1].fit);
  return r;
}

struct SuiteOptions {
  int q_max = 30;         ///< convexity and cross-path fit
  int isometry_q_max = 12;
  int order = 5;          ///< normal-form depth
  int threads = 0;
};

inline std::vector<CheckResult> run_invariant_suite(const BoundaryCurve& curve, const SuiteOptions& opt = {}) {
  std::vector<CheckResult> out;
  out.push_back(check_closure(curve));
  out.push_back(check_reversibility(curve));
  out.push_back(check_area_preservation(curve));
  out.push_back(check_normal_form_steps(curve, opt.order));
  out.push_back(check_convexity(marked_length_spectrum(curve, opt.q_max, opt.threads)));
  out.push_back(check_multiple_cover(curve));
  out.push_back(check_isometry(curve, opt.isometry_q_max, 1e-8, opt.threads));
  out.push_back(check_sharp_bound(curve));
  out.push_back(check_cross_path(curve, opt.q_max, 1e-3, opt.threads));
  return out;
}

} // namespace billiard
