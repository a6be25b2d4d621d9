#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include "billiard/beta_spectrum.hpp"

using namespace billiard;

namespace {

constexpr double kPi = std::numbers::pi;

const BoundaryCurve& circle() {
  static const auto c = build_boundary(preset_circle(), 128);
  return c;
}
const BoundaryCurve& bumpy() {
  static const auto c = build_boundary(preset_perturbed_circle(3, 0.05), 256);
  return c;
}
const BoundaryCurve& oval() {
  static const auto c = build_boundary(preset_ellipse(0.8), 256);
  return c;
}

// Legendre transform by brute force: beta~(h) = max_l (l h - H(l)),
// H(l) = int_0^l zeta(sqrt(2 s)) ds by adaptive quadrature, maximized by Brent.
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
  const auto [l, v] = boost::math::tools::brent_find_minima([&](double l) { return H(l) - l * h; }, 0.0, 2 * h * h, 52);
  (void)l;
  return -v;
}

// Odd-power least squares h^3, h^5, ... on samples of the numeric transform.
std::vector<double> odd_fit(const std::vector<double>& odd_c, int powers) {
  std::vector<double> hs;
  for (int i = 1; i <= 40; ++i) hs.push_back(0.12 * i / 40);
  Eigen::MatrixXd A(static_cast<int>(hs.size()), powers);
  Eigen::VectorXd b(static_cast<int>(hs.size()));
  for (int i = 0; i < A.rows(); ++i) {
    const double h = hs[static_cast<std::size_t>(i)];
    for (int j = 0; j < powers; ++j) A(i, j) = std::pow(h, 2 * j + 3);
    b[i] = numeric_legendre(odd_c, h);
  }
  const Eigen::VectorXd norms = A.colwise().norm();
  const Eigen::VectorXd x = (A * norms.cwiseInverse().asDiagonal()).colPivHouseholderQr().solve(b).cwiseQuotient(norms);
  return {x.data(), x.data() + powers};
}

UnivariatePoly<double> zeta_of(const std::vector<double>& odd_c, int order) {
  auto z = UnivariatePoly<double>::identity(order);
  for (std::size_t i = 0; i < odd_c.size() && 2 * static_cast<int>(i) + 3 <= order; ++i) z[2 * static_cast<int>(i) + 3] = odd_c[i];
  return z;
}

} // namespace

TEST(LegendreSeries, IdentityGivesCube) {
  const auto b = legendre_beta_series(UnivariatePoly<double>::identity(9), 11);
  for (int n = 0; n <= 11; ++n) EXPECT_NEAR(b[n], n == 3 ? 1.0 / 6 : 0.0, 1e-16) << n;
}

TEST(LegendreSeries, ExactLeadingCoefficients) {
  using Q = boost::multiprecision::cpp_rational;
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> num(-40, 40), den(1, 17);
  for (int trial = 0; trial < 5; ++trial) {
    auto z = UnivariatePoly<Q>::identity(7);
    z[3] = Q(num(rng), den(rng));
    z[5] = Q(num(rng), den(rng));
    z[7] = Q(num(rng), den(rng));
    const auto b = legendre_beta_series(z, 9);
    EXPECT_EQ(b[1], Q(0));
    EXPECT_EQ(b[3], Q(1, 6));
    EXPECT_EQ(b[5], -z[3] / 5);
    for (int n = 0; n <= 9; n += 2) EXPECT_EQ(b[n], Q(0));
    // h^7 by hand: w = h - c3 h^3 + (3 c3^2 - c5) h^5 in w^3/6 + 3 c3 w^5/10 + 5 c5 w^7/14.
    EXPECT_EQ(b[7], z[3] * z[3] / 2 - z[5] / 7);
  }
}

TEST(LegendreSeries, MatchesNumericTransform) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<double> c = {u(rng), u(rng), u(rng)};
    const auto series = legendre_beta_series(zeta_of(c, 7), 9);
    const auto fit = odd_fit(c, 7);
    EXPECT_NEAR(fit[0], series[3], 1e-9) << trial;
    EXPECT_NEAR(fit[1], series[5], 1e-7) << trial;
    EXPECT_NEAR(fit[2], series[7], 1e-5 * (1 + std::abs(series[7]))) << trial;
  }
}

TEST(LegendreSeries, OrderExceeded) {
  EXPECT_THROW(legendre_beta_series(UnivariatePoly<double>::identity(5), 9), OrderExceeded);
  EXPECT_THROW(legendre_beta_series(UnivariatePoly<double>::identity(5), 2), std::invalid_argument);
}

TEST(BetaExpansion, CircleBothUnits) {
  const auto nf = normal_form(circle(), 7);
  const auto e = affine_reconcile(beta_from_normal_form(nf, 9), nf.C1);
  EXPECT_NEAR(e.normalized(1), 0.0, 1e-15);
  EXPECT_NEAR(e.normalized(3), 1.0 / 6, 1e-15);
  EXPECT_NEAR(e.normalized(5), -kPi * kPi / 120, 1e-12);
  // beta(h) = -sin(pi h) / pi
  EXPECT_NEAR(e.physical(1), -1.0, 1e-12);
  EXPECT_NEAR(e.physical(3), kPi * kPi / 6, 1e-9);
  EXPECT_NEAR(e.physical(5), -std::pow(kPi, 4) / 120, 1e-9);
  EXPECT_NEAR(e.physical(7), std::pow(kPi, 6) / 5040, 1e-9);
  EXPECT_NEAR(e.physical(9), -std::pow(kPi, 8) / 362880, 1e-8);
  EXPECT_NEAR(e.evaluate(0.1), -std::sin(0.1 * kPi) / kPi, 1e-12);
  EXPECT_EQ(e.provenance.front(), "normal-form");
  EXPECT_THROW(e.physical(11), OrderExceeded);
  EXPECT_THROW(beta_from_normal_form(nf, 11), OrderExceeded);
}

TEST(BetaExpansion, LazutkinIntegralAndC3) {
  for (const BoundaryCurve* c : {&bumpy(), &oval()}) {
    const auto nf = normal_form(*c, 5);
    const auto e = affine_reconcile(beta_from_normal_form(nf, 7), nf.C1);
    EXPECT_NEAR(e.normalized(3), 1.0 / 6, 1e-15);
    EXPECT_NEAR(e.normalized(5), -nf.c(3) / 5, 1e-9);
    EXPECT_NEAR(e.physical(1), -1.0, 1e-12);
    EXPECT_NEAR(e.physical(3), std::pow(c->lazutkin_integral(), 3) / 24, 1e-9);
  }
}

TEST(BetaExpansion, FitRoundTripAndCsv) {
  const auto fit = beta_fit(circle(), 30, 3, 0, {}, 10, 3);
  const auto e = beta_from_fit(fit, std::pow(2 * kPi, -2.0 / 3.0));
  EXPECT_NEAR(e.normalized(1), 0.0, 1e-10);
  EXPECT_NEAR(e.normalized(3), 1.0 / 6, 1e-10);
  EXPECT_EQ(e.provenance.back(), "fit");
  std::ostringstream os;
  write_beta_csv(os, e);
  EXPECT_EQ(os.str().substr(0, 36), "degree,normalized,physical,provenanc");
  EXPECT_NE(os.str().find(",fit\n"), std::string::npos);
}

TEST(Beta3Bound, CircleIsTight) {
  const auto r = corollary2_report(circle());
  EXPECT_NEAR(r.beta3, kPi * kPi / 6, 1e-9);
  EXPECT_TRUE(r.equality);
  EXPECT_TRUE(r.sharp_holds);
  EXPECT_NEAR(r.beta3_stated, kPi * kPi, 1e-9); // I^3 / 4 with I^3 = 4 pi^2
  EXPECT_FALSE(r.stated_holds);
  EXPECT_TRUE(r.stated_holds_derived);
  EXPECT_NEAR(r.stated_beta3_with_derived_beta1, 0.0, 1e-9);
  EXPECT_FALSE(r.notes.empty());
}

TEST(Beta3Bound, StrictForNonCircles) {
  const auto e = corollary2_report(build_boundary(preset_ellipse(0.5), 256));
  EXPECT_GT(e.sharp_gap, 0.1);
  EXPECT_FALSE(e.equality);
  EXPECT_NEAR(e.beta3, e.beta3_quadrature, 1e-9);
  const auto b = corollary2_report(bumpy(), 30);
  ASSERT_TRUE(b.beta3_fit.has_value());
  EXPECT_NEAR(*b.beta3_fit, b.beta3, 1e-4);
  EXPECT_NEAR(*b.beta1_fit, -1.0, 1e-6);
  EXPECT_GT(b.sharp_gap, 0.0);
}

TEST(Beta3Bound, GapShrinksWithAmplitude) {
  double prev = 1.0;
  for (double a : {0.08, 0.04, 0.02, 0.01, 0.005}) {
    const auto r = corollary2_report(build_boundary(preset_perturbed_circle(3, a), 256));
    EXPECT_GT(r.sharp_gap, 0.0) << a;
    EXPECT_LT(r.sharp_gap, prev) << a;
    prev = r.sharp_gap;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(CrossValidate, CircleAndPerturbedCircle) {
  const auto c = cross_validate(circle(), 50, 5);
  ASSERT_TRUE(c.error.empty()) << c.error;
  ASSERT_EQ(c.gaps.size(), 3u);
  EXPECT_LT(c.gaps[1].abs_gap, 1e-4);
  EXPECT_LT(c.gaps[2].abs_gap, 1e-2);
  const auto b = cross_validate(bumpy(), 40, 3);
  ASSERT_TRUE(b.error.empty()) << b.error;
  EXPECT_LT(b.gaps[1].rel_gap, 1e-3);
  EXPECT_NEAR(b.gaps[0].fit, -1.0, 1e-6);
}

TEST(CrossValidate, IsometricDomainsAgree) {
  const auto a = cross_validate(oval(), 30, 3);
  const auto b = cross_validate(build_boundary(preset_ellipse(0.8).rotated(1.1), 256), 30, 3);
  ASSERT_EQ(a.gaps.size(), b.gaps.size());
  for (std::size_t i = 0; i < a.gaps.size(); ++i) {
    EXPECT_NEAR(a.gaps[i].normal_form, b.gaps[i].normal_form, 1e-8);
    EXPECT_NEAR(a.gaps[i].fit, b.gaps[i].fit, 1e-8);
  }
}

TEST(CrossValidate, ReportsFailures) {
  const auto r = cross_validate(circle(), 12, 4);
  EXPECT_FALSE(r.error.empty());
}

TEST(Isospectral, Verdicts) {
  const auto rot = isospectral_compare(bumpy(), build_boundary(preset_perturbed_circle(3, 0.05).rotated(0.4), 256), 12, 1e-8);
  EXPECT_FALSE(rot.distinguished) << rot.summary;
  EXPECT_EQ(rot.compared, rotation_numbers(12).size());
  const auto ce = isospectral_compare(circle(), build_boundary(preset_ellipse(0.9), 256), 12, 1e-8);
  EXPECT_TRUE(ce.distinguished);
  EXPECT_EQ(ce.p, 1);
  EXPECT_EQ(ce.q, 2);
  EXPECT_NE(ce.summary.find("1/2"), std::string::npos);
  const auto cc = isospectral_compare(circle(), circle(), 30, 1e-12);
  EXPECT_FALSE(cc.distinguished);
  EXPECT_EQ(cc.beta_gaps.size(), 3u);
}
