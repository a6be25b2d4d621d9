#pragma once

// Truncated power series in one variable: p(y) = sum_{n=0}^{N} c_n y^n + O(y^{N+1}).
//
// The coefficient type is a template parameter so that the same algebra runs
// on double, std::complex<double> and exact rationals
// (boost::multiprecision::cpp_rational).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "billiard/errors.hpp"

namespace billiard {

template <typename T>
class UnivariatePoly {
public:
  using value_type = T;

  UnivariatePoly() : coeffs_(1, T(0)) {}

  /// Zero series truncated after y^order.
  explicit UnivariatePoly(int order) : coeffs_(static_cast<std::size_t>(checked(order)) + 1, T(0)) {}

  /// Coefficients c_0, c_1, ...; missing ones are zero, excess ones are dropped.
  UnivariatePoly(std::vector<T> coeffs, int order) : coeffs_(std::move(coeffs)) {
    coeffs_.resize(static_cast<std::size_t>(checked(order)) + 1, T(0));
  }

  static UnivariatePoly constant(T value, int order) {
    UnivariatePoly p(order);
    p.coeffs_[0] = std::move(value);
    return p;
  }

  /// The series y.
  static UnivariatePoly identity(int order) { return monomial(1, T(1), order); }

  static UnivariatePoly monomial(int degree, T value, int order) {
    UnivariatePoly p(order);
    if (degree <= order) p.coeffs_[static_cast<std::size_t>(degree)] = std::move(value);
    return p;
  }

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }

  const T& operator[](int n) const { return coeffs_[static_cast<std::size_t>(n)]; }
  T& operator[](int n) { return coeffs_[static_cast<std::size_t>(n)]; }

  /// Coefficient of y^n, zero beyond the truncation order.
  T coeff(int n) const { return n >= 0 && n <= order() ? (*this)[n] : T(0); }

  const std::vector<T>& coeffs() const { return coeffs_; }

  /// Same series re-truncated (or zero-padded) to a new order.
  UnivariatePoly with_order(int order) const { return UnivariatePoly(coeffs_, order); }

  /// Lowest degree with a nonzero coefficient, or order()+1 for the zero series.
  int valuation() const {
    for (int n = 0; n <= order(); ++n)
      if (!((*this)[n] == T(0))) return n;
    return order() + 1;
  }

  UnivariatePoly& operator+=(const UnivariatePoly& o) {
    same_order(o);
    for (int n = 0; n <= order(); ++n) (*this)[n] += o[n];
    return *this;
  }
  UnivariatePoly& operator-=(const UnivariatePoly& o) {
    same_order(o);
    for (int n = 0; n <= order(); ++n) (*this)[n] -= o[n];
    return *this;
  }
  UnivariatePoly& operator*=(const T& s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }

  friend UnivariatePoly operator+(UnivariatePoly a, const UnivariatePoly& b) { return a += b; }
  friend UnivariatePoly operator-(UnivariatePoly a, const UnivariatePoly& b) { return a -= b; }
  friend UnivariatePoly operator-(UnivariatePoly a) { return a *= T(-1); }
  friend UnivariatePoly operator*(UnivariatePoly a, const T& s) { return a *= s; }
  friend UnivariatePoly operator*(const T& s, UnivariatePoly a) { return a *= s; }

  /// Cauchy product truncated at the common order.
  friend UnivariatePoly operator*(const UnivariatePoly& a, const UnivariatePoly& b) {
    a.same_order(b);
    const int N = a.order();
    UnivariatePoly r(N);
    for (int i = 0; i <= N; ++i) {
      if (a[i] == T(0)) continue;
      for (int j = 0; i + j <= N; ++j) r[i + j] += a[i] * b[j];
    }
    return r;
  }
  UnivariatePoly& operator*=(const UnivariatePoly& o) { return *this = *this * o; }

  friend bool operator==(const UnivariatePoly& a, const UnivariatePoly& b) { return a.coeffs_ == b.coeffs_; }

  /// Multiply by y^m (dropping what falls past the order).
  UnivariatePoly shifted(int m) const {
    UnivariatePoly r(order());
    for (int n = std::max(0, -m); n <= order() && n + m <= order(); ++n) r[n + m] = (*this)[n];
    return r;
  }

  UnivariatePoly derivative() const {
    UnivariatePoly r(order());
    for (int n = 1; n <= order(); ++n) r[n - 1] = (*this)[n] * T(n);
    return r;
  }

  /// Antiderivative vanishing at y = 0; the top coefficient is truncated.
  UnivariatePoly integral() const {
    UnivariatePoly r(order());
    for (int n = 0; n < order(); ++n) r[n + 1] = (*this)[n] / T(n + 1);
    return r;
  }

  template <typename U>
  auto operator()(const U& y) const {
    using R = decltype(T(0) * y);
    R acc = R(coeffs_.back());
    for (int n = order() - 1; n >= 0; --n) acc = acc * y + R((*this)[n]);
    return acc;
  }

private:
  static int checked(int order) {
    if (order < 0) throw OrderMismatch("negative truncation order " + std::to_string(order));
    return order;
  }
  void same_order(const UnivariatePoly& o) const {
    if (o.order() != order())
      throw OrderMismatch("truncation orders " + std::to_string(order()) + " and " + std::to_string(o.order()));
  }

  std::vector<T> coeffs_;
};

/// outer(inner(y)); inner must vanish at y = 0 so the truncation stays exact.
template <typename T>
UnivariatePoly<T> compose(const UnivariatePoly<T>& outer, const UnivariatePoly<T>& inner) {
  if (!(inner[0] == T(0))) throw HasConstantTerm("inner series of a composition must vanish at 0");
  const int N = inner.order();
  UnivariatePoly<T> acc = UnivariatePoly<T>::constant(outer.coeff(outer.order()), N);
  for (int n = outer.order() - 1; n >= 0; --n) {
    acc = acc * inner;
    acc[0] += outer[n];
  }
  return acc;
}

/// Compositional inverse of zeta(y) = y + O(y^2) by undetermined coefficients.
template <typename T>
UnivariatePoly<T> revert(const UnivariatePoly<T>& zeta) {
  if (!(zeta[0] == T(0)) || zeta.order() < 1 || !(zeta[1] == T(1)))
    throw BadLeadingCoefficient("revert needs zeta(0) = 0 and zeta'(0) = 1");
  const int N = zeta.order();
  auto eta = UnivariatePoly<T>::identity(N);
  for (int j = 2; j <= N; ++j) {
    // The y^j coefficient of zeta(eta) is eta_j plus terms fixed by lower coefficients.
    const T excess = compose(zeta, eta)[j];
    eta[j] -= excess;
  }
  return eta;
}

/// 1/f for f(0) != 0.
template <typename T>
UnivariatePoly<T> reciprocal(const UnivariatePoly<T>& f) {
  if (f[0] == T(0)) throw HasConstantTerm("reciprocal needs f(0) != 0");
  const int N = f.order();
  UnivariatePoly<T> g(N);
  g[0] = T(1) / f[0];
  for (int n = 1; n <= N; ++n) {
    T acc = T(0);
    for (int i = 1; i <= n; ++i) acc += f[i] * g[n - i];
    g[n] = -acc / f[0];
  }
  return g;
}

/// f^alpha for f(0) > 0 (real coefficient types only).
template <typename T>
UnivariatePoly<T> power(const UnivariatePoly<T>& f, double alpha) {
  using std::pow;
  if (!(f[0] > T(0))) throw HasConstantTerm("power needs f(0) > 0");
  const int N = f.order();
  UnivariatePoly<T> g(N);
  g[0] = pow(f[0], alpha);
  for (int n = 1; n <= N; ++n) {
    T acc = T(0);
    for (int k = 1; k <= n; ++k) acc += ((alpha + 1.0) * k - n) * f[k] * g[n - k];
    g[n] = acc / (T(n) * f[0]);
  }
  return g;
}

namespace detail {

// sum_j coef(j) f^j for f(0) = 0, truncated at the order of f.
template <typename T, typename Coef>
UnivariatePoly<T> power_sum(const UnivariatePoly<T>& f, Coef coef) {
  if (!(f[0] == T(0))) throw HasConstantTerm("series function argument must vanish at 0");
  const int N = f.order();
  auto acc = UnivariatePoly<T>::constant(coef(0), N);
  auto fj = UnivariatePoly<T>::constant(T(1), N);
  for (int j = 1; j <= N; ++j) {
    fj = fj * f;
    const T c = coef(j);
    if (!(c == T(0))) acc += fj * c;
  }
  return acc;
}

template <typename T>
T inverse_factorial(int j) {
  T r = T(1);
  for (int i = 2; i <= j; ++i) r /= T(i);
  return r;
}

} // namespace detail

template <typename T>
UnivariatePoly<T> exp(const UnivariatePoly<T>& f) {
  return detail::power_sum(f, [](int j) { return detail::inverse_factorial<T>(j); });
}

template <typename T>
UnivariatePoly<T> sin(const UnivariatePoly<T>& f) {
  return detail::power_sum(f, [](int j) {
    if (j % 2 == 0) return T(0);
    const T c = detail::inverse_factorial<T>(j);
    return (j / 2) % 2 == 0 ? c : -c;
  });
}

template <typename T>
UnivariatePoly<T> cos(const UnivariatePoly<T>& f) {
  return detail::power_sum(f, [](int j) {
    if (j % 2 == 1) return T(0);
    const T c = detail::inverse_factorial<T>(j);
    return (j / 2) % 2 == 0 ? c : -c;
  });
}

template <typename T>
UnivariatePoly<T> tan(const UnivariatePoly<T>& f) {
  return sin(f) * reciprocal(cos(f));
}

/// Taylor coefficients of arcsin(y) up to y^order.
template <typename T>
UnivariatePoly<T> arcsin_series(int order) {
  UnivariatePoly<T> p(order);
  T c = T(1); // (2n)! / (4^n (n!)^2)
  for (int n = 0; 2 * n + 1 <= order; ++n) {
    p[2 * n + 1] = c / T(2 * n + 1);
    c = c * T(2 * n + 1) / T(2 * n + 2);
  }
  return p;
}

template <typename T>
UnivariatePoly<T> arcsin(const UnivariatePoly<T>& f) {
  return compose(arcsin_series<T>(f.order()), f);
}

} // namespace billiard
