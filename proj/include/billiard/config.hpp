#pragma once

// Domain files: one `key = value` per line, `#` starts a comment.
//
//   cos_coeffs = 1.0, 0, 0, 0.05   # a_0, a_1, ... of the curvature radius r(phi)
//   sin_coeffs = 0, 0, 0.01        # b_1, b_2, ...
//   n_samples  = 256
//
// Instead of coefficients a preset may be named (`preset = circle | ellipse |
// perturbed_circle`, with `axis_ratio`, or `harmonic` and `amplitude`). Optional:
// `name`, `rotate` (rotates the curve by that many radians), `interpolation`
// (exact | trigonometric).

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "billiard/domain_geometry.hpp"
#include "billiard/errors.hpp"

namespace billiard {

struct DomainSpec {
  std::string name;
  CurvatureProfile profile;
  int n_samples = 256;
  Interpolation interpolation = Interpolation::exact;

  BoundaryCurve build() const { return build_boundary(profile, n_samples, interpolation); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

struct ConfigLine {
  std::string value;
  int line;
};

class ConfigReader {
public:
  ConfigReader(std::map<std::string, ConfigLine> entries, std::string source)
      : entries_(std::move(entries)), source_(std::move(source)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const auto it = entries_.find(key);
    throw ConfigError(source_ + (it != entries_.end() ? ":" + std::to_string(it->second.line) : "") + ": " + msg);
  }

  double number(const std::string& key) const {
    const std::string& v = entries_.at(key).value;
    double x = 0.0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || end != v.data() + v.size()) fail(key, "'" + key + "' expects a number, got '" + v + "'");
    return x;
  }

  int integer(const std::string& key) const {
    const std::string& v = entries_.at(key).value;
    int x = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || end != v.data() + v.size()) fail(key, "'" + key + "' expects an integer, got '" + v + "'");
    return x;
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(entries_.at(key).value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      double x = 0.0;
      const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
      if (item.empty() || ec != std::errc() || end != item.data() + item.size())
        fail(key, "'" + key + "' expects comma-separated numbers, got '" + item + "'");
      out.push_back(x);
    }
    return out;
  }

  std::string text(const std::string& key) const { return entries_.at(key).value; }

private:
  std::map<std::string, ConfigLine> entries_;
  std::string source_;
};

} // namespace detail

/// Parse a domain file. Every failure is a ConfigError: `source:line: msg` for syntax,
/// `source: NonConvex: ...` etc. when the profile itself is invalid.
inline DomainSpec parse_domain(std::istream& in, const std::string& source = "<input>") {
  static const std::vector<std::string> known = {"name",      "cos_coeffs", "sin_coeffs", "n_samples", "preset",
                                                 "axis_ratio", "harmonic",   "amplitude",  "rotate",    "interpolation"};
  std::map<std::string, detail::ConfigLine> entries;
  std::string raw;
  for (int line = 1; std::getline(in, raw); ++line) {
    const std::string s = detail::trim(raw.substr(0, raw.find('#')));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(source + ":" + std::to_string(line) + ": expected 'key = value'");
    const std::string key = detail::trim(s.substr(0, eq)), value = detail::trim(s.substr(eq + 1));
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(source + ":" + std::to_string(line) + ": unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(source + ":" + std::to_string(line) + ": '" + key + "' has no value");
    if (!entries.emplace(key, detail::ConfigLine{value, line}).second)
      throw ConfigError(source + ":" + std::to_string(line) + ": duplicate key '" + key + "'");
  }
  const detail::ConfigReader r(std::move(entries), source);

  DomainSpec spec;
  spec.name = r.has("name") ? r.text("name") : "";
  if (r.has("n_samples")) {
    spec.n_samples = r.integer("n_samples");
    if (spec.n_samples < 8) r.fail("n_samples", "n_samples must be at least 8");
  }
  if (r.has("interpolation")) {
    const auto m = r.text("interpolation");
    if (m == "exact")
      spec.interpolation = Interpolation::exact;
    else if (m == "trigonometric")
      spec.interpolation = Interpolation::trigonometric;
    else
      r.fail("interpolation", "interpolation must be 'exact' or 'trigonometric'");
  }

  try {
    if (r.has("preset")) {
      if (r.has("cos_coeffs") || r.has("sin_coeffs")) r.fail("preset", "give either a preset or coefficients, not both");
      const auto p = r.text("preset");
      if (p == "circle") {
        spec.profile = preset_circle();
      } else if (p == "ellipse") {
        if (!r.has("axis_ratio")) r.fail("preset", "ellipse needs axis_ratio");
        spec.profile = preset_ellipse(r.number("axis_ratio"));
      } else if (p == "perturbed_circle") {
        if (!r.has("harmonic") || !r.has("amplitude")) r.fail("preset", "perturbed_circle needs harmonic and amplitude");
        spec.profile = preset_perturbed_circle(r.integer("harmonic"), r.number("amplitude"));
      } else {
        r.fail("preset", "unknown preset '" + p + "'");
      }
      if (spec.name.empty()) spec.name = p;
    } else {
      if (!r.has("cos_coeffs")) throw ConfigError(source + ": needs cos_coeffs or a preset");
      for (const char* k : {"axis_ratio", "harmonic", "amplitude"})
        if (r.has(k)) r.fail(k, std::string("'") + k + "' only applies to presets");
      spec.profile.cos_coeffs = r.numbers("cos_coeffs");
      if (r.has("sin_coeffs")) spec.profile.sin_coeffs = r.numbers("sin_coeffs");
      spec.profile.validate();
    }
    if (r.has("rotate")) spec.profile = spec.profile.rotated(r.number("rotate"));
  } catch (const ConfigError&) {
    throw;
  } catch (const BilliardError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return spec;
}

inline DomainSpec parse_domain_string(const std::string& text, const std::string& source = "<string>") {
  std::istringstream in(text);
  return parse_domain(in, source);
}

inline DomainSpec load_domain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  return parse_domain(in, path);
}

} // namespace billiard
