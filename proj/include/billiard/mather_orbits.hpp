#pragma once

// Minimizing periodic configurations of the chord action
//
//   W(x_0, ..., x_{q-1}) = sum_{i<q} h(x_i, x_{i+1}),   x_{i+q} = x_i + p,
//
// and the quantities derived from them: barrier B(s, p/q), beta(p/q), the
// marked length spectrum and odd-power fits of beta near h = 0.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "billiard/billiard_map.hpp"
#include "billiard/errors.hpp"

namespace billiard {

struct Configuration {
  std::vector<double> lift; ///< x_0 < ... < x_{q-1} < x_0 + p
  int p = 0;
  int q = 0;

  double at(int i) const {
    const int n = static_cast<int>(lift.size());
    const int r = ((i % n) + n) % n;
    return lift[static_cast<std::size_t>(r)] + static_cast<double>(p) * ((i - r) / n);
  }
  bool monotone() const {
    for (int i = 0; i < q; ++i)
      if (!(at(i + 1) > at(i))) return false;
    return true;
  }
};

struct OrbitResult {
  Configuration config;
  double action = 0.0;
  double el_residual = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct MinimizeOptions {
  double tol = 1e-10;    ///< on the Euler-Lagrange residual
  int max_iter = 100;
  int starts = 3;        ///< phase-shifted equispaced starts
  bool allow_multiple = false; ///< accept gcd(p, q) > 1
};

namespace detail {

inline void check_rotation(int p, int q, bool allow_multiple) {
  if (q < 2 || p < 1 || p >= q)
    throw std::invalid_argument("rotation number " + std::to_string(p) + "/" + std::to_string(q) + " outside (0, 1)");
  if (!allow_multiple && std::gcd(p, q) != 1)
    throw std::invalid_argument(std::to_string(p) + "/" + std::to_string(q) + " not in lowest terms");
}

struct ActionState {
  double action = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

inline double action(const BoundaryCurve& curve, const Configuration& c) {
  double w = 0.0;
  for (int i = 0; i < c.q; ++i) w += chord_action(curve, c.at(i), c.at(i + 1));
  return w;
}

inline ActionState evaluate(const BoundaryCurve& curve, const Configuration& c, bool with_hessian) {
  const int q = c.q;
  ActionState st;
  st.grad = Eigen::VectorXd::Zero(q);
  if (with_hessian) st.hess = Eigen::MatrixXd::Zero(q, q);
  for (int i = 0; i < q; ++i) {
    const double x = c.at(i), xb = c.at(i + 1);
    const int j = (i + 1) % q;
    const auto J = chord_jet(curve, x, xb);
    st.action += J.h;
    st.grad[i] += J.d.d1;
    st.grad[j] += J.d.d2;
    if (!with_hessian) continue;
    st.hess(i, i) += J.H.d11;
    st.hess(j, j) += J.H.d22;
    st.hess(i, j) += J.H.d12;
    st.hess(j, i) += J.H.d12;
  }
  return st;
}

// Rotate indices so that x_0 is the footpoint closest to 0 mod 1 from above, x_0 in [0, 1).
inline Configuration canonical(const Configuration& c) {
  int best = 0;
  double best_val = 2.0;
  for (int i = 0; i < c.q; ++i) {
    const double w = wrap_unit(c.at(i));
    if (w < best_val - 1e-14) best_val = w, best = i;
  }
  Configuration out{std::vector<double>(static_cast<std::size_t>(c.q)), c.p, c.q};
  const double shift = std::floor(c.at(best));
  for (int i = 0; i < c.q; ++i) out.lift[static_cast<std::size_t>(i)] = c.at(best + i) - shift;
  return out;
}

// Damped, saddle-free Newton on the free coordinates (all, or all but x_0 when pinned).
inline OrbitResult newton(const BoundaryCurve& curve, Configuration c, bool pinned, const MinimizeOptions& opt) {
  const int q = c.q;
  const int off = pinned ? 1 : 0;
  const int n = q - off;
  OrbitResult res;
  auto residual = [&](const ActionState& st) { return st.grad.tail(n).cwiseAbs().maxCoeff(); };

  ActionState st = evaluate(curve, c, true);
  int escapes = 0;
  for (int it = 0; it <= opt.max_iter; ++it) {
    res.iterations = it;
    const double r = residual(st);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(st.hess.bottomRightCorner(n, n));
    const auto& lam = eig.eigenvalues();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    const Eigen::VectorXd g = st.grad.tail(n);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);

    if (r < opt.tol) {
      // Stationary. Leave saddles along the most negative curvature direction.
      if (lam[0] < -1e-8 * scale && escapes < 8) {
        ++escapes;
        dir = eig.eigenvectors().col(0) * (0.25 / q);
      } else {
        res.converged = true;
        break;
      }
    } else {
      const Eigen::VectorXd gt = eig.eigenvectors().transpose() * g;
      for (int k = 0; k < n; ++k) {
        const double a = std::abs(lam[k]);
        if (a > 1e-12 * scale) dir -= eig.eigenvectors().col(k) * (gt[k] / a);
      }
    }
    if (it == opt.max_iter) break;

    // Backtrack until the lift stays ordered and the action does not increase.
    double t = 1.0;
    bool accepted = false, ordered_seen = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      Configuration trial = c;
      for (int k = 0; k < n; ++k) trial.lift[static_cast<std::size_t>(k + off)] += t * dir[k];
      if (!trial.monotone()) continue;
      ordered_seen = true;
      const double w = action(curve, trial);
      if (w <= st.action + 1e-14 * std::abs(st.action)) {
        c = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!ordered_seen) throw OrderViolation("could not keep the configuration ordered for " + std::to_string(c.p) + "/" + std::to_string(q));
    if (!accepted) break; // no descent left at machine precision
    st = evaluate(curve, c, true);
  }
  res.config = c;
  res.action = st.action;
  res.el_residual = residual(st);
  res.converged = res.converged || res.el_residual < opt.tol;
  return res;
}

inline Configuration equispaced(int p, int q, double shift) {
  Configuration c{std::vector<double>(static_cast<std::size_t>(q)), p, q};
  for (int i = 0; i < q; ++i) c.lift[static_cast<std::size_t>(i)] = shift + static_cast<double>(i) * p / q;
  return c;
}

} // namespace detail

/// Minimum of the periodic action over ordered p/q-configurations.
///
/// Starts from x_i = i p/q (or init) and from phase-shifted copies; the lowest
/// action wins, earliest start on ties, so the circle returns the canonical orbit.
///
/// Rotation numbers in (1/2, 1) are folded by the reversor: the orbit of (q-p)/q
/// is computed and traversed backwards, x'_i = x_{-i} + i.
inline OrbitResult minimize_action(const BoundaryCurve& curve, int p, int q,
                                   const std::optional<Configuration>& init = std::nullopt,
                                   const MinimizeOptions& opt = {}) {
  detail::check_rotation(p, q, opt.allow_multiple);
  if (2 * p > q) {
    auto r = minimize_action(curve, q - p, q, std::nullopt, opt);
    Configuration back{std::vector<double>(static_cast<std::size_t>(q)), p, q};
    for (int i = 0; i < q; ++i) back.lift[static_cast<std::size_t>(i)] = r.config.at(-i) + i;
    r.config = detail::canonical(back);
    return r;
  }
  std::vector<Configuration> starts;
  if (init) {
    if (init->p != p || init->q != q || static_cast<int>(init->lift.size()) != q || !init->monotone())
      throw std::invalid_argument("initial configuration does not match " + std::to_string(p) + "/" + std::to_string(q));
    starts.push_back(*init);
  }
  for (int j = 0; j < std::max(1, opt.starts); ++j) starts.push_back(detail::equispaced(p, q, j / (2.0 * q * opt.starts)));

  std::optional<OrbitResult> best;
  for (const auto& s : starts) {
    auto r = detail::newton(curve, s, false, opt);
    if (!best || (r.converged && !best->converged) ||
        (r.converged == best->converged && r.action < best->action - 1e-13 * q))
      best = std::move(r);
  }
  if (!best->converged)
    throw NoConvergence(std::to_string(p) + "/" + std::to_string(q) + ": residual " + std::to_string(best->el_residual) +
                        " after " + std::to_string(best->iterations) + " iterations");
  best->config = detail::canonical(best->config);
  return *best;
}

/// Minimal p/q-periodic action with x_0 pinned at s.
inline OrbitResult barrier_orbit(const BoundaryCurve& curve, double s, int p, int q, const MinimizeOptions& opt = {}) {
  detail::check_rotation(p, q, opt.allow_multiple);
  auto r = detail::newton(curve, detail::equispaced(p, q, s), true, opt);
  if (!r.converged)
    throw NoConvergence("barrier at s = " + std::to_string(s) + ": residual " + std::to_string(r.el_residual));
  return r;
}

inline double barrier(const BoundaryCurve& curve, double s, int p, int q, const MinimizeOptions& opt = {}) {
  return barrier_orbit(curve, s, p, q, opt).action;
}

/// beta(p/q) = (1/q) min W.
inline double beta_rational(const BoundaryCurve& curve, int p, int q, const MinimizeOptions& opt = {}) {
  return minimize_action(curve, p, q, std::nullopt, opt).action / q;
}

struct SpectrumEntry {
  int p = 0, q = 0;
  double action = 0.0; ///< min_s B(s, p/q) = q beta(p/q)
  double el_residual = 0.0;
  bool converged = false;
  std::string error; ///< empty unless the entry failed

  double beta() const { return action / q; }
};

/// Runs task(i) for i < n on `threads` workers (0: hardware concurrency).
template <typename Task>
void parallel_for(int n, int threads, Task task) {
  int w = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  w = std::min(w, n);
  if (w <= 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < w; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) task(i);
    });
  for (auto& th : pool) th.join();
}

/// All p/q in lowest terms with 2 <= q <= q_max and p/q <= 1/2, ordered by (q, p).
inline std::vector<std::pair<int, int>> rotation_numbers(int q_max) {
  std::vector<std::pair<int, int>> out;
  for (int q = 2; q <= q_max; ++q)
    for (int p = 1; 2 * p <= q; ++p)
      if (std::gcd(p, q) == 1) out.emplace_back(p, q);
  return out;
}

inline std::vector<SpectrumEntry> marked_length_spectrum(const BoundaryCurve& curve, int q_max, int threads = 0,
                                                         const MinimizeOptions& opt = {}) {
  if (q_max < 2) throw std::invalid_argument("q_max must be at least 2");
  const auto rots = rotation_numbers(q_max);
  std::vector<SpectrumEntry> out(rots.size());
  parallel_for(static_cast<int>(rots.size()), threads, [&](int i) {
    auto& e = out[static_cast<std::size_t>(i)];
    e.p = rots[static_cast<std::size_t>(i)].first;
    e.q = rots[static_cast<std::size_t>(i)].second;
    try {
      const auto r = minimize_action(curve, e.p, e.q, std::nullopt, opt);
      e.action = r.action;
      e.el_residual = r.el_residual;
      e.converged = r.converged;
    } catch (const std::exception& ex) {
      e.action = std::nan("");
      e.error = ex.what();
    }
  });
  return out;
}

struct IrrationalBeta {
  double value = 0.0;
  double error = 0.0; ///< |beta(p_n/q_n) - beta(p_{n-1}/q_{n-1})| of the last two convergents
  std::vector<std::pair<int, int>> convergents;
  std::vector<double> values;
};

/// beta(omega) as the limit along continued-fraction convergents with q_n <= q_max.
inline IrrationalBeta beta_irrational(const BoundaryCurve& curve, double omega, int q_max, const MinimizeOptions& opt = {}) {
  if (!(omega > 0.0 && omega < 0.5)) throw std::invalid_argument("omega must lie in (0, 1/2)");
  IrrationalBeta out;
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = omega;
  for (int n = 0; n < 64; ++n) {
    const double a = std::floor(x);
    const long ai = static_cast<long>(a);
    const long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > q_max) break;
    if (q2 >= 2) out.convergents.emplace_back(static_cast<int>(p2), static_cast<int>(q2));
    if (std::abs(omega - static_cast<double>(p2) / static_cast<double>(q2)) < 1e-15 * omega || x - a < 1e-12)
      throw NotIrrational("omega = " + std::to_string(omega) + " is rational (" + std::to_string(p2) + "/" +
                          std::to_string(q2) + "); use beta_rational");
    p0 = p1, q0 = q1, p1 = p2, q1 = q2;
    x = 1.0 / (x - a);
  }
  if (out.convergents.size() < 2) throw std::invalid_argument("q_max too small for two convergents");
  for (const auto& [p, q] : out.convergents) out.values.push_back(beta_rational(curve, p, q, opt));
  out.value = out.values.back();
  out.error = std::abs(out.values.back() - out.values[out.values.size() - 2]);
  return out;
}

struct BetaFit {
  std::vector<double> coeffs;      ///< beta_1, beta_3, ..., n_coeffs of them
  std::vector<double> all_coeffs;  ///< including the guard terms
  double residual = 0.0;           ///< rms misfit
  double condition = 0.0;          ///< 2-norm condition number of the column-scaled design
  std::vector<std::pair<double, double>> samples; ///< (h, beta(h))
};

/// Odd-power least-squares fit of beta(h) samples. Two extra odd powers absorb the
/// truncated tail; only the first n_coeffs are reported as coefficients.
inline BetaFit fit_odd_powers(const std::vector<std::pair<double, double>>& samples, int n_coeffs, int guard = 2,
                              double max_condition = 1e12) {
  const int m = n_coeffs + guard;
  const int rows = static_cast<int>(samples.size());
  if (n_coeffs < 1 || rows < m) throw std::invalid_argument("not enough samples for " + std::to_string(m) + " odd powers");
  Eigen::MatrixXd A(rows, m);
  Eigen::VectorXd b(rows);
  for (int i = 0; i < rows; ++i) {
    const double h = samples[static_cast<std::size_t>(i)].first;
    for (int j = 0; j < m; ++j) A(i, j) = std::pow(h, 2 * j + 1);
    b[i] = samples[static_cast<std::size_t>(i)].second;
  }
  const Eigen::VectorXd norms = A.colwise().norm();
  const Eigen::MatrixXd As = A * norms.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  BetaFit fit;
  fit.samples = samples;
  fit.condition = sv[0] / sv[sv.size() - 1];
  if (!(fit.condition < max_condition))
    throw IllConditioned("odd-power design has condition number " + std::to_string(fit.condition));
  const Eigen::VectorXd x = svd.solve(b).cwiseQuotient(norms);
  fit.all_coeffs.assign(x.data(), x.data() + m);
  fit.coeffs.assign(x.data(), x.data() + n_coeffs);
  fit.residual = std::sqrt((A * x - b).squaredNorm() / rows);
  return fit;
}

/// Fit of beta(1/q), q = q_min..q_max, by odd powers of h. Small q sit far from the
/// asymptotic regime, and q sharing a factor with a symmetry of the domain carry
/// resonant corrections; raising q_min drops them.
inline BetaFit beta_fit(const BoundaryCurve& curve, int q_max, int n_coeffs, int threads = 0,
                        const MinimizeOptions& opt = {}, int q_min = 3, int guard = 2) {
  if (q_min < 2 || q_max < q_min) throw std::invalid_argument("need 2 <= q_min <= q_max");
  std::vector<std::pair<double, double>> samples(static_cast<std::size_t>(q_max - q_min + 1));
  parallel_for(q_max - q_min + 1, threads, [&](int i) {
    const int q = i + q_min;
    samples[static_cast<std::size_t>(i)] = {1.0 / q, beta_rational(curve, 1, q, opt)};
  });
  return fit_odd_powers(samples, n_coeffs, guard);
}

/// CSV rows p,q,beta,action,residual,converged with fixed formatting.
inline void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumEntry>& entries) {
  os << "p,q,beta,action,residual,converged\n";
  char buf[160];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.15e,%.15e,%.3e,%d\n", e.p, e.q, e.converged ? e.beta() : 0.0,
                  e.converged ? e.action : 0.0, e.el_residual, e.converged ? 1 : 0);
    os << buf;
  }
}

} // namespace billiard
