// billiard_cli: batch front-end over domain files.
//
//   billiard_cli domain      domains/circle.cfg
//   billiard_cli beta        domains/circle.cfg --q-max 50 --order 3 -o out/
//   billiard_cli normal-form domains/circle.cfg --order 7 --backend rational
//   billiard_cli spectrum    domains/ellipse_0.5.cfg --q-max 20
//   billiard_cli compare     domains/perturbed_circle.cfg domains/rotated_perturbed_circle.cfg
//   billiard_cli check       domains/perturbed_circle.cfg
//   billiard_cli plot        domains/ellipse_0.5.cfg -o out/
//
// Tables go to <out>/<name>_<verb>.csv; summaries go to stdout.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "CLI11.hpp"
#include "billiard/beta_spectrum.hpp"
#include "billiard/config.hpp"
#include "billiard/self_check.hpp"

using namespace billiard;
namespace fs = std::filesystem;

namespace {

struct JobConfig {
  std::string domain, other; // other: second domain for compare
  int q_max = 50;
  int order = 0;              // 0: verb default
  double tol = 0.0;           // 0: verb default
  std::string out = ".";
  int threads = 0;
  std::string backend = "float";

  void validate() const {
    if (q_max < 2) throw ConfigError("--q-max must be at least 2");
    if (order < 0) throw ConfigError("--order must be positive");
    if (tol < 0.0) throw ConfigError("--tol must be positive");
    if (threads < 0) throw ConfigError("--threads must be positive");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::ofstream open_output(const JobConfig& job, const std::string& name, const std::string& suffix) {
  fs::create_directories(job.out);
  const auto path = fs::path(job.out) / (name + "_" + suffix);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  std::cout << "wrote " << path.string() << "\n";
  return os;
}

int cmd_domain(const JobConfig& job) {
  const auto spec = load_domain(job.domain);
  const auto curve = spec.build();
  const auto& p = curve.profile();
  std::cout << "name            " << spec.name << "\n"
            << "harmonics       " << p.max_harmonic() << "\n"
            << "truncation      " << fmt("%.3e", p.truncation_error) << "\n"
            << "min radius      " << fmt("%.6e", p.min_radius()) << "  (raw units; > 0 means strictly convex)\n"
            << "closure         " << fmt("%.3e", std::hypot(p.a(1), p.b(1))) << "  |(a_1, b_1)|\n"
            << "raw perimeter   " << fmt("%.15e", curve.raw_perimeter()) << "\n"
            << "int rho^-1 ds   " << fmt("%.15e", curve.integrate_rho_power(-1.0)) << "  (2 pi = "
            << fmt("%.15e", 2.0 * std::numbers::pi) << ")\n"
            << "int rho^-2/3 ds " << fmt("%.15e", curve.lazutkin_integral()) << "\n";
  const auto c = check_closure(curve);
  std::cout << format_check(c) << "\n";
  return c.passed ? 0 : 1;
}

int cmd_beta(const JobConfig& job) {
  const auto spec = load_domain(job.domain);
  const auto curve = spec.build();
  const auto spectrum = marked_length_spectrum(curve, job.q_max, job.threads);
  {
    auto os = open_output(job, spec.name, "beta.csv");
    os << "p,q,h,beta,residual,converged,error\n";
    for (const auto& e : spectrum) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%d,%d,%.15e,%.15e,%.3e,%d,", e.p, e.q, static_cast<double>(e.p) / e.q,
                    e.converged ? e.beta() : 0.0, e.el_residual, e.converged ? 1 : 0);
      os << buf << '"' << e.error << "\"\n";
    }
  }
  // Coefficients: normal form and fit side by side, each with its provenance.
  const int order = job.order > 0 ? job.order : 3;
  auto os = open_output(job, spec.name, "beta_coeffs.csv");
  os << "degree,value,provenance,status\n";
  try {
    const auto e = beta_expansion(curve, order);
    for (int d = 1; d <= order; d += 2) os << d << "," << fmt("%.15e", e.physical(d)) << ",normal-form,ok\n";
  } catch (const std::exception& ex) {
    os << "0,0,normal-form,\"" << ex.what() << "\"\n";
  }
  try {
    const auto fit = beta_fit(curve, job.q_max, (order + 1) / 2, job.threads, {}, std::min(10, job.q_max - 5), 3);
    for (std::size_t i = 0; i < fit.coeffs.size(); ++i)
      os << 2 * i + 1 << "," << fmt("%.15e", fit.coeffs[i]) << ",fit,ok\n";
  } catch (const std::exception& ex) {
    os << "0,0,fit,\"" << ex.what() << "\"\n";
  }
  std::size_t bad = 0;
  for (const auto& e : spectrum) bad += e.converged ? 0 : 1;
  std::cout << spectrum.size() << " rationals, " << bad << " unconverged\n";
  return 0;
}

int cmd_normal_form(const JobConfig& job) {
  const auto spec = load_domain(job.domain);
  const int order = job.order > 0 ? job.order : 7;
  if (job.backend == "rational") {
    if (!is_disc(spec.profile))
      throw std::invalid_argument("the rational backend needs an x-independent map (the disc); use --backend float");
    using Q = boost::multiprecision::cpp_rational;
    const auto cs = circle_normal_form_exact<Q>(order);
    auto os = open_output(job, spec.name, "normal_form.csv");
    os << "degree,value,exact,backend\n";
    int d = 3;
    for (const auto& c : cs) {
      const double v = c.coeff.convert_to<double>() * std::pow(std::numbers::pi, c.pi_power);
      os << d << "," << fmt("%.15e", v) << "," << c.coeff << "*pi^" << c.pi_power << ",rational\n";
      std::cout << "c_" << d << " = " << c.coeff << " pi^" << c.pi_power << "\n";
      d += 2;
    }
    return 0;
  }
  NormalFormOptions opt;
  if (job.tol > 0.0) opt.step.tol = job.tol;
  const auto nf = normal_form(spec.build(), order, opt);
  {
    auto os = open_output(job, spec.name, "normal_form.csv");
    os << "degree,value,exact,backend\n";
    for (int d = 3; d <= order; d += 2) os << d << "," << fmt("%.15e", nf.c(d)) << ",,float\n";
  }
  auto os = open_output(job, spec.name, "ledger.csv");
  write_ledger_csv(os, nf);
  for (int d = 3; d <= order; d += 2) std::cout << "c_" << d << " = " << fmt("%.15e", nf.c(d)) << "\n";
  std::cout << "C1 = " << fmt("%.15e", nf.C1) << ", " << nf.ledger.size() << " steps\n";
  return 0;
}

int cmd_spectrum(const JobConfig& job) {
  const auto spec = load_domain(job.domain);
  const auto entries = marked_length_spectrum(spec.build(), job.q_max, job.threads);
  auto os = open_output(job, spec.name, "spectrum.csv");
  write_spectrum_csv(os, entries);
  return 0;
}

int cmd_compare(const JobConfig& job) {
  const auto a = load_domain(job.domain), b = load_domain(job.other);
  const auto v = isospectral_compare(a.build(), b.build(), job.q_max, job.tol > 0.0 ? job.tol : 1e-8, job.threads);
  std::cout << a.name << " vs " << b.name << ": " << v.summary << "\n";
  for (std::size_t i = 0; i < v.beta_gaps.size(); ++i)
    std::cout << "  |beta_" << 2 * i + 1 << " gap| = " << fmt("%.3e", v.beta_gaps[i]) << "\n";
  return 0;
}

int cmd_check(const JobConfig& job) {
  const auto spec = load_domain(job.domain);
  SuiteOptions opt;
  opt.q_max = std::min(job.q_max, 40);
  opt.order = job.order > 0 ? job.order : 5;
  opt.threads = job.threads;
  bool ok = true;
  std::cout << "checking " << spec.name << "\n";
  for (const auto& c : run_invariant_suite(spec.build(), opt)) {
    std::cout << "  " << format_check(c) << "\n";
    ok = ok && c.passed;
  }
  std::cout << (ok ? "all checks passed" : "some checks FAILED") << "\n";
  return ok ? 0 : 1;
}

// ---- plots -----------------------------------------------------------------------

struct Frame {
  double x0, x1, y0, y1;
  double W = 640, H = 420, pad = 50;
  double X(double x) const { return pad + (x - x0) / (x1 - x0) * (W - 2 * pad); }
  double Y(double y) const { return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad); }
};

void svg_axes(std::ostream& os, const Frame& f, const std::string& title, const std::string& xl, const std::string& yl) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.W << "\" height=\"" << f.H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << f.pad << "\" y=\"" << f.pad << "\" width=\"" << f.W - 2 * f.pad << "\" height=\""
     << f.H - 2 * f.pad << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << f.W / 2 << "\" y=\"25\" text-anchor=\"middle\">" << title << "</text>\n";
  os << "<text x=\"" << f.W / 2 << "\" y=\"" << f.H - 12 << "\" text-anchor=\"middle\">" << xl << "</text>\n";
  os << "<text x=\"14\" y=\"" << f.H / 2 << "\" transform=\"rotate(-90 14 " << f.H / 2 << ")\" text-anchor=\"middle\">"
     << yl << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = f.x0 + (f.x1 - f.x0) * i / 4, y = f.y0 + (f.y1 - f.y0) * i / 4;
    os << "<text x=\"" << fmt("%.1f", f.X(x)) << "\" y=\"" << f.H - f.pad + 15 << "\" text-anchor=\"middle\">"
       << fmt("%.3g", x) << "</text>\n";
    os << "<text x=\"" << f.pad - 4 << "\" y=\"" << fmt("%.1f", f.Y(y) + 4) << "\" text-anchor=\"end\">" << fmt("%.3g", y)
       << "</text>\n";
  }
}

int cmd_plot(const JobConfig& job) {
  const auto spec = load_domain(job.domain);
  const auto curve = spec.build();
  const int q_max = std::min(job.q_max, 30);

  const auto spectrum = marked_length_spectrum(curve, q_max, job.threads);
  std::optional<BetaExpansion> fitted;
  try {
    fitted = beta_expansion(curve, 5);
  } catch (const std::exception& e) {
    std::cerr << "no normal-form overlay: " << e.what() << "\n";
  }
  {
    Frame f{0.0, 0.5, -1.0 / std::numbers::pi - 0.02, 0.0};
    auto os = open_output(job, spec.name, "beta.svg");
    svg_axes(os, f, "beta(h) for " + spec.name, "h = p/q", "beta");
    if (fitted) {
      os << "<polyline fill=\"none\" stroke=\"#c33\" points=\"";
      for (int i = 0; i <= 200; ++i) {
        const double h = 0.5 * i / 200;
        os << fmt("%.2f", f.X(h)) << "," << fmt("%.2f", std::clamp(f.Y(fitted->evaluate(h)), 0.0, f.H)) << " ";
      }
      os << "\"/>\n<text x=\"" << f.W - f.pad - 4 << "\" y=\"" << f.pad + 16
         << "\" text-anchor=\"end\" fill=\"#c33\">normal-form expansion through h^5</text>\n";
    }
    for (const auto& e : spectrum)
      if (e.converged)
        os << "<circle cx=\"" << fmt("%.2f", f.X(static_cast<double>(e.p) / e.q)) << "\" cy=\""
           << fmt("%.2f", f.Y(e.beta())) << "\" r=\"2.2\" fill=\"#226\"/>\n";
    os << "</svg>\n";
  }
  {
    Frame f{0.0, 1.0, -1.0, 1.0, 640, 640};
    auto os = open_output(job, spec.name, "phase.svg");
    svg_axes(os, f, "phase portrait of " + spec.name, "s", "cos v");
    const int n_orbits = 24, n_iter = 400;
    for (int k = 0; k < n_orbits; ++k) {
      const double v = std::numbers::pi * (k + 0.5) / n_orbits;
      try {
        for (const auto& pt : iterate(curve, {0.5 * (k % 2) / n_orbits + 0.013 * k, v}, n_iter))
          os << "<circle cx=\"" << fmt("%.2f", f.X(pt.s)) << "\" cy=\"" << fmt("%.2f", f.Y(std::cos(pt.v)))
             << "\" r=\"0.7\" fill=\"#333\"/>\n";
      } catch (const std::exception& e) {
        std::cerr << "orbit " << k << ": " << e.what() << "\n";
      }
    }
    os << "</svg>\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral invariants of convex billiards"};
  app.require_subcommand(1);
  JobConfig job;

  auto common = [&](CLI::App* sub, bool q, bool order, bool tol) {
    sub->add_option("domain", job.domain, "domain file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", job.out, "output directory");
    sub->add_option("-j,--threads", job.threads, "worker threads (0: all cores)");
    if (q) sub->add_option("--q-max", job.q_max, "largest period");
    if (order) sub->add_option("--order", job.order, "odd expansion order");
    if (tol) sub->add_option("--tol", job.tol, "tolerance");
  };
  auto* domain = app.add_subcommand("domain", "validate a domain and print its geometry");
  common(domain, false, false, false);
  auto* beta = app.add_subcommand("beta", "beta over rationals plus coefficient fit");
  common(beta, true, true, false);
  auto* nf = app.add_subcommand("normal-form", "c-coefficients and per-step ledger");
  common(nf, false, true, true);
  nf->add_option("--backend", job.backend, "float | rational (disc only)")->check(CLI::IsMember({"float", "rational"}));
  auto* spectrum = app.add_subcommand("spectrum", "marked length spectrum");
  common(spectrum, true, false, false);
  auto* compare = app.add_subcommand("compare", "compare two marked length spectra");
  common(compare, true, false, true);
  compare->add_option("other", job.other, "second domain file")->required()->check(CLI::ExistingFile);
  auto* check = app.add_subcommand("check", "run the invariant suite; nonzero exit on failure");
  common(check, true, true, false);
  auto* plot = app.add_subcommand("plot", "SVG beta curve and phase portrait");
  common(plot, true, false, false);

  CLI11_PARSE(app, argc, argv);
  try {
    job.validate();
    if (*domain) return cmd_domain(job);
    if (*beta) return cmd_beta(job);
    if (*nf) return cmd_normal_form(job);
    if (*spectrum) return cmd_spectrum(job);
    if (*compare) return cmd_compare(job);
    if (*check) return cmd_check(job);
    if (*plot) return cmd_plot(job);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 2;
}
