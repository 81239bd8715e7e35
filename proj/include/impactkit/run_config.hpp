#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <impactkit/accel_log.hpp>
#include <impactkit/detail/numio.hpp>
#include <impactkit/energy.hpp>
#include <impactkit/model.hpp>
#include <impactkit/signal.hpp>

namespace impactkit {

/// Everything a pipeline run needs in one place. Values come from built-in
/// defaults, then an optional config file, then command-line flags, in that
/// order of precedence (last wins).
struct RunConfig {
  ModelParams params{0.241, 46.0, 7040.0, 9.81};
  FilterSpec filter{};
  PayloadClearance clearance{};
  SegmentationConfig segmentation{};
  unsigned long long seed = 0;
  std::string out;

  void validate() const {
    params.validate();
    filter.validate();
    clearance.validate();
    segmentation.validate();
  }
};

/// Parse a drop altitude given in meters, or in centimeters when the value
/// carries a `cm` suffix: "1.5", "1.5m" and "150cm" all mean 1.5 m.
inline double parse_altitude(std::string_view text) {
  std::string_view tok = detail::trim(text);
  double scale = 1.0;
  if (tok.size() > 2 && tok.substr(tok.size() - 2) == "cm") {
    scale = 0.01;
    tok = detail::trim(tok.substr(0, tok.size() - 2));
  } else if (tok.size() > 1 && tok.back() == 'm') {
    tok = detail::trim(tok.substr(0, tok.size() - 1));
  }
  double value = 0.0;
  if (!detail::parse_double(tok, value)) {
    throw std::invalid_argument("invalid altitude: \"" + std::string(text) + "\"");
  }
  return value * scale;
}

/// Comma-separated list of altitudes, each in the parse_altitude syntax.
inline std::vector<double> parse_altitude_list(std::string_view text) {
  std::vector<double> out;
  std::string_view rest = detail::trim(text);
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string_view tok =
        (comma == std::string_view::npos) ? rest : rest.substr(0, comma);
    out.push_back(parse_altitude(tok));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (out.empty()) throw std::invalid_argument("empty altitude list");
  return out;
}

namespace detail {

inline void apply_config_key(RunConfig& cfg, std::string_view key,
                             std::string_view value, std::size_t lineno) {
  const auto bad = [&](const char* what) {
    throw std::invalid_argument("config line " + std::to_string(lineno) + ": " +
                                std::string(key) + " " + what);
  };
  if (key == "out") {
    cfg.out = std::string(value);
    return;
  }
  if (key == "seed") {
    unsigned long long s = 0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, s);
    if (ec != std::errc() || ptr != last) bad("must be a non-negative integer");
    cfg.seed = s;
    return;
  }
  double v = 0.0;
  if (!parse_double(value, v)) bad("must be a number");
  if (key == "mass") cfg.params.m = v;
  else if (key == "damping") cfg.params.c = v;
  else if (key == "stiffness") cfg.params.k = v;
  else if (key == "gravity") cfg.params.g = v;
  else if (key == "cutoff_hz") cfg.filter.cutoff_hz = v;
  else if (key == "sample_rate_hz") cfg.filter.sample_rate_hz = v;
  else if (key == "x_limit") cfg.clearance.x_limit = v;
  else if (key == "ff_threshold") cfg.segmentation.ff_threshold = v;
  else if (key == "ff_min_duration") cfg.segmentation.ff_min_duration = v;
  else if (key == "impact_threshold") cfg.segmentation.impact_threshold = v;
  else if (key == "peak_window") cfg.segmentation.peak_window = v;
  else {
    throw std::invalid_argument("config line " + std::to_string(lineno) +
                                ": unknown key \"" + std::string(key) + "\"");
  }
}

}  // namespace detail

/// Flat key=value config. Blank lines and `#` comments are skipped; unknown
/// keys are an error. All physical quantities are SI (x_limit in meters).
inline void parse_config(std::istream& in, RunConfig& cfg) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = detail::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    const std::size_t eq = sv.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    }
    const std::string_view key = detail::trim(sv.substr(0, eq));
    const std::string_view value = detail::trim(sv.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    }
    detail::apply_config_key(cfg, key, value, lineno);
  }
}

inline void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  parse_config(in, cfg);
}

/// One-line echo of the effective parameter set, written into every output
/// artifact. Shaped as a comment the accelerometer-log parser ignores.
inline std::string config_echo(const RunConfig& cfg) {
  std::string s = "# config:";
  const auto add = [&s](const char* key, double v) {
    s += ' ';
    s += key;
    s += '=';
    s += detail::to_string_g(v);
  };
  add("mass", cfg.params.m);
  add("damping", cfg.params.c);
  add("stiffness", cfg.params.k);
  add("gravity", cfg.params.g);
  add("cutoff_hz", cfg.filter.cutoff_hz);
  add("sample_rate_hz", cfg.filter.sample_rate_hz);
  add("x_limit", cfg.clearance.x_limit);
  add("ff_threshold", cfg.segmentation.ff_threshold);
  add("ff_min_duration", cfg.segmentation.ff_min_duration);
  add("impact_threshold", cfg.segmentation.impact_threshold);
  add("peak_window", cfg.segmentation.peak_window);
  s += " seed=" + std::to_string(cfg.seed);
  return s;
}

}  // namespace impactkit
