#pragma once

// Truncated Fourier-Taylor series
//
//   f(x, y) = sum_{n=0}^{N} y^n sum_{|k|<=K} f_{n,k} exp(2 pi i k x),
//
// periodic in x with period 1. Coefficients are stored as complex numbers for
// every |k| <= K; real-valued series satisfy f_{n,-k} = conj(f_{n,k}).
// Products and compositions create harmonics beyond K; those are discarded and
// their energy (sum of squared moduli) is accumulated in discarded_energy() so
// that harmonic truncation is observable.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "billiard/errors.hpp"
#include "billiard/univariate_poly.hpp"

namespace billiard {

using cplx = std::complex<double>;

namespace detail {

// Twiddle table for an M-point DFT: w[m] = exp(sign * 2 pi i m / M).
inline std::vector<cplx> twiddles(int M, double sign) {
  std::vector<cplx> w(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    const double a = sign * 2.0 * std::numbers::pi * m / M;
    w[static_cast<std::size_t>(m)] = {std::cos(a), std::sin(a)};
  }
  return w;
}

} // namespace detail

class FourierTaylorSeries {
public:
  FourierTaylorSeries() : FourierTaylorSeries(0, 0) {}

  FourierTaylorSeries(int y_order, int harmonics) : N_(y_order), K_(harmonics) {
    if (y_order < 0 || harmonics < 0)
      throw OrderMismatch("negative truncation (" + std::to_string(y_order) + ", " + std::to_string(harmonics) + ")");
    c_.assign(static_cast<std::size_t>((N_ + 1) * width()), cplx(0.0));
  }

  static FourierTaylorSeries constant(double value, int y_order, int harmonics) {
    FourierTaylorSeries f(y_order, harmonics);
    f(0, 0) = value;
    return f;
  }

  /// The series y^m (x-independent).
  static FourierTaylorSeries y_power(int m, int y_order, int harmonics) {
    FourierTaylorSeries f(y_order, harmonics);
    if (m <= y_order) f(m, 0) = 1.0;
    return f;
  }

  /// x-independent series from a power series in y.
  static FourierTaylorSeries from_poly(const UnivariatePoly<double>& p, int y_order, int harmonics) {
    FourierTaylorSeries f(y_order, harmonics);
    for (int n = 0; n <= std::min(y_order, p.order()); ++n) f(n, 0) = p[n];
    return f;
  }

  /// Series whose y^0 line has the given harmonics (index k + K'), e.g. a function of x alone.
  static FourierTaylorSeries from_harmonics(const std::vector<cplx>& line, int y_order, int harmonics) {
    FourierTaylorSeries f(y_order, harmonics);
    f.set_line(0, line);
    return f;
  }

  /// Series from values on the uniform grid x_j = j/M: samples[j] is the power series in y at x_j.
  static FourierTaylorSeries from_samples(const std::vector<UnivariatePoly<cplx>>& samples, int y_order,
                                          int harmonics) {
    const int M = static_cast<int>(samples.size());
    if (M < 2 * harmonics + 1)
      throw OrderMismatch("grid of " + std::to_string(M) + " points cannot resolve " + std::to_string(harmonics) +
                          " harmonics");
    FourierTaylorSeries f(y_order, harmonics);
    const auto w = detail::twiddles(M, -1.0);
    double dropped = 0.0;
    for (int n = 0; n <= y_order; ++n) {
      for (int k = -M / 2; k <= (M - 1) / 2; ++k) {
        cplx acc = 0.0;
        const int kk = ((k % M) + M) % M;
        for (int j = 0; j < M; ++j) acc += samples[static_cast<std::size_t>(j)].coeff(n) * w[static_cast<std::size_t>((kk * j) % M)];
        acc /= static_cast<double>(M);
        if (std::abs(k) <= harmonics)
          f(n, k) = acc;
        else
          dropped += std::norm(acc);
      }
    }
    f.discarded_ = dropped;
    return f;
  }

  int y_order() const { return N_; }
  int harmonics() const { return K_; }
  int width() const { return 2 * K_ + 1; }

  cplx& operator()(int n, int k) { return c_[index(n, k)]; }
  const cplx& operator()(int n, int k) const { return c_[index(n, k)]; }

  /// Coefficient with zero outside the stored range.
  cplx coeff(int n, int k) const {
    return n >= 0 && n <= N_ && std::abs(k) <= K_ ? (*this)(n, k) : cplx(0.0);
  }

  /// Harmonics of the y^n line, indexed k + K.
  std::vector<cplx> line(int n) const {
    std::vector<cplx> l(static_cast<std::size_t>(width()));
    for (int k = -K_; k <= K_; ++k) l[static_cast<std::size_t>(k + K_)] = coeff(n, k);
    return l;
  }

  /// Set the y^n line from harmonics indexed k + K' (K' = (size-1)/2); extra harmonics are dropped.
  void set_line(int n, const std::vector<cplx>& l) {
    const int Kl = (static_cast<int>(l.size()) - 1) / 2;
    for (int k = -K_; k <= K_; ++k) (*this)(n, k) = std::abs(k) <= Kl ? l[static_cast<std::size_t>(k + Kl)] : cplx(0.0);
  }

  void clear_line(int n) {
    for (int k = -K_; k <= K_; ++k) (*this)(n, k) = 0.0;
  }

  double discarded_energy() const { return discarded_; }
  void add_discarded_energy(double e) { discarded_ += e; }

  /// Zero every coefficient below `threshold` in modulus; their energy counts as discarded.
  FourierTaylorSeries& chop(double threshold) {
    for (auto& c : c_)
      if (c != cplx(0.0) && std::abs(c) < threshold) {
        discarded_ += std::norm(c);
        c = 0.0;
      }
    return *this;
  }

  /// Chop each y^n line at `rel` times its own largest coefficient.
  FourierTaylorSeries& chop_lines(double rel) {
    for (int n = 0; n <= N_; ++n) {
      const double t = rel * max_abs_line(n);
      for (int k = -K_; k <= K_; ++k) {
        auto& c = c_[index(n, k)];
        if (c != cplx(0.0) && std::abs(c) < t) {
          discarded_ += std::norm(c);
          c = 0.0;
        }
      }
    }
    return *this;
  }

  /// Same series with a different truncation; dropped coefficients are counted as discarded.
  FourierTaylorSeries with_truncation(int y_order, int harmonics) const {
    FourierTaylorSeries r(y_order, harmonics);
    r.discarded_ = discarded_;
    for (int n = 0; n <= N_; ++n)
      for (int k = -K_; k <= K_; ++k) {
        if (n <= y_order && std::abs(k) <= harmonics)
          r(n, k) = (*this)(n, k);
        else if (std::abs(k) > harmonics && n <= y_order)
          r.discarded_ += std::norm((*this)(n, k));
      }
    return r;
  }

  FourierTaylorSeries& operator+=(const FourierTaylorSeries& o) {
    compatible(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    discarded_ += o.discarded_;
    return *this;
  }
  FourierTaylorSeries& operator-=(const FourierTaylorSeries& o) {
    compatible(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    discarded_ += o.discarded_;
    return *this;
  }
  FourierTaylorSeries& operator*=(cplx s) {
    for (auto& c : c_) c *= s;
    return *this;
  }

  friend FourierTaylorSeries operator+(FourierTaylorSeries a, const FourierTaylorSeries& b) { return a += b; }
  friend FourierTaylorSeries operator-(FourierTaylorSeries a, const FourierTaylorSeries& b) { return a -= b; }
  friend FourierTaylorSeries operator-(FourierTaylorSeries a) { return a *= -1.0; }
  friend FourierTaylorSeries operator*(FourierTaylorSeries a, cplx s) { return a *= s; }
  friend FourierTaylorSeries operator*(cplx s, FourierTaylorSeries a) { return a *= s; }

  /// Product truncated at y^N and |k| <= K.
  friend FourierTaylorSeries operator*(const FourierTaylorSeries& a, const FourierTaylorSeries& b) {
    a.compatible(b);
    const int N = a.N_, K = a.K_, W = 4 * K + 1;
    std::vector<cplx> full(static_cast<std::size_t>((N + 1) * W), cplx(0.0));
    for (int n1 = 0; n1 <= N; ++n1)
      for (int k1 = -K; k1 <= K; ++k1) {
        const cplx x = a(n1, k1);
        if (x == cplx(0.0)) continue;
        for (int n2 = 0; n1 + n2 <= N; ++n2) {
          cplx* out = &full[static_cast<std::size_t>((n1 + n2) * W + k1 + 2 * K)];
          const cplx* in = &b.c_[b.index(n2, -K)];
          for (int k2 = 0; k2 <= 2 * K; ++k2) out[k2 - K] += x * in[k2];
        }
      }
    FourierTaylorSeries r(N, K);
    r.discarded_ = a.discarded_ + b.discarded_;
    for (int n = 0; n <= N; ++n)
      for (int k = -2 * K; k <= 2 * K; ++k) {
        const cplx v = full[static_cast<std::size_t>(n * W + k + 2 * K)];
        if (std::abs(k) <= K)
          r(n, k) = v;
        else
          r.discarded_ += std::norm(v);
      }
    return r;
  }

  /// Multiply by y^m.
  FourierTaylorSeries shifted_y(int m) const {
    FourierTaylorSeries r(N_, K_);
    r.discarded_ = discarded_;
    for (int n = std::max(0, -m); n <= N_ && n + m <= N_; ++n)
      for (int k = -K_; k <= K_; ++k) r(n + m, k) = (*this)(n, k);
    return r;
  }

  /// d/dx: harmonic k is multiplied by 2 pi i k.
  FourierTaylorSeries differentiate_x() const {
    FourierTaylorSeries r(N_, K_);
    r.discarded_ = discarded_;
    for (int n = 0; n <= N_; ++n)
      for (int k = -K_; k <= K_; ++k) r(n, k) = (*this)(n, k) * cplx(0.0, 2.0 * std::numbers::pi * k);
    return r;
  }

  /// d/dy (the top line becomes zero).
  FourierTaylorSeries differentiate_y() const {
    FourierTaylorSeries r(N_, K_);
    r.discarded_ = discarded_;
    for (int n = 1; n <= N_; ++n)
      for (int k = -K_; k <= K_; ++k) r(n - 1, k) = (*this)(n, k) * static_cast<double>(n);
    return r;
  }

  /// Antiderivative in x vanishing at x = 0; every line must have zero mean.
  FourierTaylorSeries integrate_x() const {
    FourierTaylorSeries r(N_, K_);
    r.discarded_ = discarded_;
    for (int n = 0; n <= N_; ++n) {
      if (std::abs((*this)(n, 0)) > 1e-12 * (1.0 + max_abs()))
        throw OrderMismatch("integrate_x of a line with nonzero mean (y^" + std::to_string(n) + ")");
      cplx at_zero = 0.0;
      for (int k = -K_; k <= K_; ++k) {
        if (k == 0) continue;
        r(n, k) = (*this)(n, k) / cplx(0.0, 2.0 * std::numbers::pi * k);
        at_zero += r(n, k);
      }
      r(n, 0) = -at_zero;
    }
    return r;
  }

  /// The k = 0 harmonics as a power series in y.
  UnivariatePoly<double> average_x() const {
    UnivariatePoly<double> p(N_);
    for (int n = 0; n <= N_; ++n) p[n] = (*this)(n, 0).real();
    return p;
  }

  /// The power series in y at fixed x.
  UnivariatePoly<cplx> at(double x) const {
    UnivariatePoly<cplx> p(N_);
    const cplx w{std::cos(2.0 * std::numbers::pi * x), std::sin(2.0 * std::numbers::pi * x)};
    std::vector<cplx> wk(static_cast<std::size_t>(width()));
    wk[static_cast<std::size_t>(K_)] = 1.0;
    for (int k = 1; k <= K_; ++k) {
      wk[static_cast<std::size_t>(K_ + k)] = wk[static_cast<std::size_t>(K_ + k - 1)] * w;
      wk[static_cast<std::size_t>(K_ - k)] = std::conj(wk[static_cast<std::size_t>(K_ + k)]);
    }
    for (int n = 0; n <= N_; ++n) {
      cplx acc = 0.0;
      const cplx* row = &c_[index(n, -K_)];
      for (int i = 0; i < width(); ++i) acc += row[i] * wk[static_cast<std::size_t>(i)];
      p[n] = acc;
    }
    return p;
  }

  /// Real part of f(x, y).
  double evaluate(double x, double y) const { return at(x)(y).real(); }

  /// Value of the y^n line at x.
  cplx line_value(int n, double x) const { return at(x)[n]; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& c : c_) m = std::max(m, std::abs(c));
    return m;
  }

  double max_abs_line(int n) const {
    double m = 0.0;
    for (int k = -K_; k <= K_; ++k) m = std::max(m, std::abs((*this)(n, k)));
    return m;
  }

  /// Largest violation of f_{n,-k} = conj(f_{n,k}).
  double reality_defect() const {
    double m = 0.0;
    for (int n = 0; n <= N_; ++n)
      for (int k = 0; k <= K_; ++k) m = std::max(m, std::abs((*this)(n, -k) - std::conj((*this)(n, k))));
    return m;
  }

  bool is_real(double tol = 1e-12) const { return reality_defect() <= tol * (1.0 + max_abs()); }

  /// Project onto real-valued series.
  FourierTaylorSeries real_part() const {
    FourierTaylorSeries r(N_, K_);
    r.discarded_ = discarded_;
    for (int n = 0; n <= N_; ++n)
      for (int k = -K_; k <= K_; ++k) r(n, k) = 0.5 * ((*this)(n, k) + std::conj((*this)(n, -k)));
    return r;
  }

  /// Largest coefficient modulus of a - b.
  friend double max_difference(const FourierTaylorSeries& a, const FourierTaylorSeries& b) {
    a.compatible(b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.c_.size(); ++i) m = std::max(m, std::abs(a.c_[i] - b.c_[i]));
    return m;
  }

  void compatible(const FourierTaylorSeries& o) const {
    if (o.N_ != N_ || o.K_ != K_)
      throw OrderMismatch("series truncations (" + std::to_string(N_) + ", " + std::to_string(K_) + ") and (" +
                          std::to_string(o.N_) + ", " + std::to_string(o.K_) + ")");
  }

private:
  std::size_t index(int n, int k) const { return static_cast<std::size_t>(n * width() + k + K_); }

  int N_, K_;
  std::vector<cplx> c_;
  double discarded_ = 0.0;
};

/// p(s) for a power series p and a series s without y^0 line (Horner in the series ring).
inline FourierTaylorSeries compose_poly(const UnivariatePoly<double>& p, const FourierTaylorSeries& s) {
  if (s.max_abs_line(0) > 0.0) throw HasConstantTerm("polynomial argument must vanish at y = 0");
  const int N = s.y_order(), K = s.harmonics();
  auto acc = FourierTaylorSeries::constant(p.coeff(std::min(p.order(), N)), N, K);
  for (int n = std::min(p.order(), N) - 1; n >= 0; --n) {
    acc = acc * s;
    acc(0, 0) += p[n];
  }
  return acc;
}

/// (1 + f)^alpha by the binomial series; f must have no y^0 line.
inline FourierTaylorSeries binomial_one_plus(const FourierTaylorSeries& f, double alpha, double tol = 1e-13) {
  if (f.max_abs_line(0) > tol) throw HasConstantTerm("binomial series needs f = O(y)");
  const int N = f.y_order(), K = f.harmonics();
  auto g = f;
  g.clear_line(0);
  auto acc = FourierTaylorSeries::constant(1.0, N, K);
  auto term = acc;
  double binom = 1.0;
  for (int m = 1; m <= N; ++m) {
    binom *= (alpha - (m - 1)) / m;
    term = term * g;
    if (term.max_abs() == 0.0) break;
    acc += term * cplx(binom);
  }
  return acc;
}

inline FourierTaylorSeries sqrt_one_plus(const FourierTaylorSeries& f, double tol = 1e-13) {
  return binomial_one_plus(f, 0.5, tol);
}

/// Default collocation grid size for compose.
inline int compose_grid(int harmonics) { return std::max(16, 4 * harmonics + 4); }

/// f(x + dx(x,y), y_sub(x,y)).
///
/// dx may carry a constant y^0 term (a rigid shift) but no x-dependent y^0 part;
/// y_sub must vanish at y = 0. exp(2 pi i k dx) is expanded as a power series in
/// y on a collocation grid of M points in x and transformed back.
inline FourierTaylorSeries compose(const FourierTaylorSeries& f, const FourierTaylorSeries& dx,
                                   const FourierTaylorSeries& y_sub, int grid = 0, double tol = 1e-11) {
  f.compatible(dx);
  f.compatible(y_sub);
  const int N = f.y_order(), K = f.harmonics();
  const int M = grid > 0 ? grid : compose_grid(K);
  const double scale = 1.0 + dx.max_abs();
  for (int k = -K; k <= K; ++k) {
    if (k != 0 && std::abs(dx(0, k)) > tol * scale)
      throw NotNearIdentity("x substitution has an x-dependent y^0 term");
    if (std::abs(y_sub(0, k)) > tol * (1.0 + y_sub.max_abs()))
      throw NotNearIdentity("y substitution has a y^0 term");
  }
  const double shift = dx(0, 0).real();
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<UnivariatePoly<cplx>> samples;
  samples.reserve(static_cast<std::size_t>(M));
  std::vector<UnivariatePoly<cplx>> A(static_cast<std::size_t>(N + 1), UnivariatePoly<cplx>(N));
  for (int j = 0; j < M; ++j) {
    const double xj = static_cast<double>(j) / M;
    auto delta = dx.at(xj);
    delta[0] = 0.0;
    auto Y = y_sub.at(xj);
    Y[0] = 0.0;
    const auto E = exp(delta * cplx(0.0, two_pi));
    const auto Einv = exp(delta * cplx(0.0, -two_pi));
    const cplx w{std::cos(two_pi * (xj + shift)), std::sin(two_pi * (xj + shift))};

    for (auto& a : A) a = UnivariatePoly<cplx>(N);
    auto accumulate = [&](int k, const UnivariatePoly<cplx>& P, cplx phase) {
      for (int n = 0; n <= N; ++n) {
        const cplx c = f(n, k) * phase;
        if (c == cplx(0.0)) continue;
        auto& a = A[static_cast<std::size_t>(n)];
        for (int i = 0; i <= N; ++i) a[i] += c * P[i];
      }
    };
    auto P = UnivariatePoly<cplx>::constant(1.0, N);
    accumulate(0, P, 1.0);
    cplx phase = 1.0;
    for (int k = 1; k <= K; ++k) {
      P = P * E;
      phase *= w;
      accumulate(k, P, phase);
    }
    P = UnivariatePoly<cplx>::constant(1.0, N);
    phase = 1.0;
    for (int k = 1; k <= K; ++k) {
      P = P * Einv;
      phase *= std::conj(w);
      accumulate(-k, P, phase);
    }
    auto r = A[static_cast<std::size_t>(N)];
    for (int n = N - 1; n >= 0; --n) r = A[static_cast<std::size_t>(n)] + r * Y;
    samples.push_back(std::move(r));
  }
  auto out = FourierTaylorSeries::from_samples(samples, N, K);
  out.add_discarded_energy(f.discarded_energy() + dx.discarded_energy() + y_sub.discarded_energy());
  return out;
}

} // namespace billiard
