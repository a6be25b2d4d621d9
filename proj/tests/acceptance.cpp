// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Reference values come from closed forms or brute-force computations written here,
// not from the library paths under test.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "billiard/beta_spectrum.hpp"
#include "billiard/self_check.hpp"

using namespace billiard;
using Q = boost::multiprecision::cpp_rational;

namespace {

constexpr double kPi = std::numbers::pi;
int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BoundaryCurve circle() { return build_boundary(preset_circle(), 128); }
BoundaryCurve ellipse_half() { return build_boundary(preset_ellipse(0.5), 256); }
BoundaryCurve perturbed() { return build_boundary(preset_perturbed_circle(3, 0.05), 256); }
BoundaryCurve bumpy() {
  CurvatureProfile p;
  p.cos_coeffs = {1.0, 0.0, 0.08, 0.0, 0.02};
  p.sin_coeffs = {0.0, 0.0, 0.03};
  return build_boundary(p, 256);
}

// ---- 1 -------------------------------------------------------------------------
void circle_beta() {
  const auto c = circle();
  MinimizeOptions opt;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int count = 0;
  std::string failed;
  for (int q = 2; q <= 50; ++q)
    for (int p = 1; p < q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      ++count;
      try {
        worst = std::max(worst, std::abs(beta_rational(c, p, q, opt) + std::sin(kPi * p / q) / kPi));
      } catch (const std::exception& e) {
        failed = e.what();
        worst = INFINITY;
      }
    }
  const double dt = seconds_since(t0);
  report(1, "circle beta exactness", worst < 1e-9 && dt < 60.0,
         std::to_string(count) + " rationals, worst " + sci(worst) + ", " + sci(dt) + " s single-threaded" +
             (failed.empty() ? "" : "; " + failed));
}

// ---- 2 -------------------------------------------------------------------------
void circle_normal_form() {
  const auto nf = normal_form(circle(), 5);
  const double e3 = std::abs(nf.c(3) - kPi * kPi / 24), e5 = std::abs(nf.c(5) - 3 * std::pow(kPi, 4) / 640);
  const auto exact = circle_normal_form_exact<Q>(5);
  const bool rational_ok = exact.size() == 2 && exact[0].coeff == Q(1, 24) && exact[0].pi_power == 2 &&
                           exact[1].coeff == Q(3, 640) && exact[1].pi_power == 4;
  report(2, "circle normal form", e3 < 1e-8 && e5 < 1e-8 && rational_ok,
         "float |dc3| " + sci(e3) + ", |dc5| " + sci(e5) + "; rational c3 = " + exact[0].coeff.str() + " pi^2, c5 = " +
             exact[1].coeff.str() + " pi^4");
}

// ---- 3 -------------------------------------------------------------------------
// beta~(h) = max_l (l h - H(l)), H(l) = int_0^l zeta(sqrt(2 s)) ds, by quadrature and Brent.
double numeric_legendre(const std::vector<double>& odd_c, double h) {
  auto zeta = [&](double y) {
    double acc = y, yp = y;
    for (double c : odd_c) yp *= y * y, acc += c * yp;
    return acc;
  };
  auto H = [&](double l) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate([&](double s) { return zeta(std::sqrt(2 * s)); },
                                                                        0.0, l, 10, 1e-15);
  };
  return -boost::math::tools::brent_find_minima([&](double l) { return H(l) - l * h; }, 0.0, 2 * h * h, 52).second;
}

// h^3, h^5, ... coefficients of the numeric transform by least squares on (0, 0.12].
std::vector<double> numeric_legendre_coeffs(const std::vector<double>& odd_c, int powers) {
  Eigen::MatrixXd A(40, powers);
  Eigen::VectorXd b(40);
  for (int i = 0; i < 40; ++i) {
    const double h = 0.12 * (i + 1) / 40;
    for (int j = 0; j < powers; ++j) A(i, j) = std::pow(h, 2 * j + 3);
    b[i] = numeric_legendre(odd_c, h);
  }
  const Eigen::VectorXd norms = A.colwise().norm();
  const Eigen::VectorXd x = (A * norms.cwiseInverse().asDiagonal()).colPivHouseholderQr().solve(b).cwiseQuotient(norms);
  return {x.data(), x.data() + powers};
}

void legendre_pipeline() {
  bool ok = true;
  double worst5 = 0.0, worst_numeric = 0.0;
  // Circle, float backend: 1/2 - 1/3 and 1/6 differ by one ulp in double.
  const auto nf = normal_form(circle(), 5);
  const auto bc = legendre_beta_series(nf.zeta, 7);
  const double ulp3 = std::abs(bc[3] - 1.0 / 6) / (std::nextafter(1.0 / 6, 1.0) - 1.0 / 6);
  ok = ok && ulp3 <= 1.0;
  worst5 = std::max(worst5, std::abs(bc[5] + nf.c(3) / 5));

  // Synthetic zeta: exact rationals for the coefficient identities, doubles for the numeric oracle.
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> num(-30, 30), den(1, 13);
  for (int trial = 0; trial < 6; ++trial) {
    auto z = UnivariatePoly<Q>::identity(7);
    for (int d = 3; d <= 7; d += 2) z[d] = Q(num(rng), den(rng));
    const auto b = legendre_beta_series(z, 9);
    ok = ok && b[1] == Q(0) && b[3] == Q(1, 6) && b[5] == -z[3] / 5;

    std::vector<double> c;
    auto zd = UnivariatePoly<double>::identity(7);
    for (int d = 3; d <= 7; d += 2) {
      zd[d] = z[d].convert_to<double>() / 50; // keep zeta monotone on the oracle's range
      c.push_back(zd[d]);
    }
    const auto bd = legendre_beta_series(zd, 9);
    worst5 = std::max(worst5, std::abs(bd[5] + zd[3] / 5));
    const auto fit = numeric_legendre_coeffs(c, 7);
    // Truncation-order agreement: the fit is exact to ~1e-10 at h^3 and loses
    // roughly two digits per further order.
    worst_numeric = std::max({worst_numeric, std::abs(fit[0] - bd[3]) / 1e-9, std::abs(fit[1] - bd[5]) / 1e-7,
                              std::abs(fit[2] - bd[7]) / (1e-5 * (1 + std::abs(bd[7])))});
  }
  ok = ok && worst5 < 1e-9 && worst_numeric <= 1.0;
  report(3, "Legendre pipeline", ok,
         "beta~3 = 1/6 exact on 6 rational synthetic zeta, " + sci(ulp3) + " ulp on circle; worst |beta~5 + c3/5| " + sci(worst5) +
             "; numeric oracle within " + sci(worst_numeric) + " of its per-order tolerance");
}

// ---- 4 -------------------------------------------------------------------------
void cross_path() {
  const auto c = perturbed();
  const auto nf = beta_expansion(c, 3);
  const auto fit = beta_fit(c, 40, 2, 0, {}, 10, 3);
  // Independent quadrature: trapezoid over the tangent angle, ds = r(phi) dphi / L.
  const auto& prof = c.profile();
  const int n = 4096;
  double I = 0.0;
  for (int i = 0; i < n; ++i) {
    const double phi = 2 * kPi * i / n, r = prof.radius(phi) / c.raw_perimeter();
    I += std::pow(r, -2.0 / 3.0) * r * (2 * kPi / n);
  }
  const double quad = I * I * I / 24;
  const double nf3 = nf.physical(3), fit3 = fit.coeffs[1];
  const double g1 = std::abs(nf3 - fit3) / std::abs(nf3), g2 = std::abs(nf3 - quad) / quad, g3 = std::abs(fit3 - quad) / quad;
  report(4, "cross-path consistency", g1 < 1e-3 && g2 < 1e-3 && g3 < 1e-3,
         "beta3 normal form " + sci(nf3) + ", fit(q<=40) " + sci(fit3) + ", quadrature " + sci(quad) + "; rel gaps " +
             sci(g1) + ", " + sci(g2) + ", " + sci(g3));
}

// ---- 5 -------------------------------------------------------------------------
void step_constraints() {
  struct Case {
    const char* name;
    BoundaryCurve curve;
    int order;
  };
  // ellipse(0.5) stops at c_5: its c_7 step sits at the edge of double precision.
  const std::vector<Case> cases = {{"circle", circle(), 9},
                                   {"ellipse(0.5)", ellipse_half(), 5},
                                   {"ellipse(0.8)", build_boundary(preset_ellipse(0.8), 256), 7},
                                   {"perturbed circle", perturbed(), 7},
                                   {"bumpy", bumpy(), 7}};
  bool ok = true;
  std::string detail;
  for (const auto& cs : cases) {
    const auto r = check_normal_form_steps(cs.curve, cs.order);
    ok = ok && r.passed;
    detail += std::string(detail.empty() ? "" : ", ") + cs.name + " " + sci(r.value);
    if (!r.passed) detail += " [" + r.detail + "]";
  }
  report(5, "iteration-step constraints", ok, "worst symplectic/even-zeta residual per domain: " + detail);
}

// ---- 6 -------------------------------------------------------------------------
void map_invariants() {
  bool ok = true;
  std::string detail;
  for (const auto& [name, curve] : std::vector<std::pair<std::string, BoundaryCurve>>{
           {"circle", circle()}, {"ellipse(0.5)", ellipse_half()}, {"perturbed circle", perturbed()}}) {
    const auto rev = check_reversibility(curve), area = check_area_preservation(curve);
    ok = ok && rev.passed && area.passed;
    detail += (detail.empty() ? "" : "; ") + name + " rev " + sci(rev.value) + ", |det-1| " + sci(area.value);
  }
  report(6, "dynamical invariants", ok, detail);
}

// ---- 7 -------------------------------------------------------------------------
void structural() {
  bool ok = true;
  std::string detail;
  for (const auto& [name, curve] :
       std::vector<std::pair<std::string, BoundaryCurve>>{{"circle", circle()}, {"perturbed circle", perturbed()}, {"bumpy", bumpy()}}) {
    const auto spectrum = marked_length_spectrum(curve, 30);
    std::size_t conv = 0;
    for (const auto& e : spectrum) conv += e.converged ? 1 : 0;
    const auto cx = check_convexity(spectrum), mc = check_multiple_cover(curve), iso = check_isometry(curve, 20);
    ok = ok && conv == spectrum.size() && cx.passed && mc.passed && iso.passed;
    detail += (detail.empty() ? "" : "; ") + name + " convexity " + sci(cx.value) + ", np/nq " + sci(mc.value) +
              ", isometry " + sci(iso.value);
  }
  report(7, "structural beta properties", ok, detail);
}

// ---- 8 -------------------------------------------------------------------------
void beta3_bound() {
  bool ok = true;
  std::string detail;
  const std::vector<std::pair<std::string, BoundaryCurve>> domains = {{"circle", circle()},
                                                                       {"ellipse(0.5)", ellipse_half()},
                                                                       {"perturbed circle", perturbed()},
                                                                       {"bumpy", bumpy()}};
  for (const auto& [name, curve] : domains) {
    const auto r = corollary2_report(curve);
    const bool disc = name == "circle";
    ok = ok && r.sharp_holds && r.equality == disc;
    detail += (detail.empty() ? "" : "; ") + name + " pi^2/6 - beta3 = " + sci(r.sharp_gap);
    std::printf("  %s: stated beta3 + pi^2 beta1 = %s (%s), with derived values %s (%s)\n", name.c_str(),
                sci(r.stated_combination).c_str(), r.stated_holds ? "holds" : "violated",
                sci(r.stated_combination_derived).c_str(), r.stated_holds_derived ? "holds" : "violated");
  }
  report(8, "beta_3 <= pi^2/6 bound", ok, detail);
}

} // namespace

int main() {
  circle_beta();
  circle_normal_form();
  legendre_pipeline();
  cross_path();
  step_constraints();
  map_invariants();
  structural();
  beta3_bound();
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
