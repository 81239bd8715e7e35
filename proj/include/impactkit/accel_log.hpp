#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <impactkit/detail/numio.hpp>
#include <impactkit/model.hpp>
#include <impactkit/signal.hpp>

namespace impactkit {

inline constexpr double kStandardGravity = 9.80665; // 1 g in m/s^2

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// One drop trial: tri-axial accelerometer series in m/s^2 plus metadata.
struct AccelLog {
  std::string trial_id;
  double altitude = 0.0; // drop altitude [m]
  double sample_rate_hz = 0.0;
  Series ax, ay, az;

  std::size_t size() const { return az.size(); }

  void validate() const {
    if (trial_id.empty())
      throw std::invalid_argument("AccelLog: trial_id must be non-empty");
    if (!(altitude > 0.0) || !std::isfinite(altitude))
      throw std::invalid_argument("AccelLog: altitude must be positive");
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
      throw std::invalid_argument("AccelLog: sample rate must be positive");
    if (ax.size() != ay.size() || ax.size() != az.size())
      throw std::invalid_argument("AccelLog: axis lengths differ");
    if (az.size() < 2)
      throw std::invalid_argument("AccelLog: log must contain at least 2 samples");
  }
};

/// Reads the line-oriented trial format: '#' metadata headers followed by
/// t,ax,ay,az rows. Values declared in g are converted to m/s^2. Comment
/// lines that are not key=value pairs, and unrecognized keys, are skipped.
inline AccelLog parse_log(std::istream& in) {
  AccelLog log;
  bool have_id = false, have_alt = false, have_rate = false, have_units = false;
  bool units_g = false;
  std::vector<double> t, ax, ay, az;
  std::vector<std::size_t> row_line;
  std::size_t lineno = 0, first_data_line = 0;
  std::string line;

  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = detail::trim(line);
    if (sv.empty()) continue;

    if (sv.front() == '#') {
      const std::string_view body = detail::trim(sv.substr(1));
      const std::size_t eq = body.find('=');
      if (eq == std::string_view::npos) continue; // free comment
      const std::string_view key = detail::trim(body.substr(0, eq));
      const std::string_view value = detail::trim(body.substr(eq + 1));
      if (key == "trial_id") {
        if (value.empty()) throw ParseError(lineno, "trial_id must be non-empty");
        log.trial_id = std::string(value);
        have_id = true;
      } else if (key == "altitude_cm") {
        double cm = 0.0;
        if (!detail::parse_double(value, cm) || !(cm > 0.0))
          throw ParseError(lineno, "altitude_cm must be a positive number");
        log.altitude = cm / 100.0;
        have_alt = true;
      } else if (key == "sample_rate_hz") {
        double hz = 0.0;
        if (!detail::parse_double(value, hz) || !(hz > 0.0))
          throw ParseError(lineno, "sample_rate_hz must be a positive number");
        log.sample_rate_hz = hz;
        have_rate = true;
      } else if (key == "units") {
        if (value == "g") units_g = true;
        else if (value == "m/s2") units_g = false;
        else throw ParseError(lineno, "units must be \"g\" or \"m/s2\"");
        have_units = true;
      }
      continue; // unrecognized metadata keys are ignored
    }

    if (first_data_line == 0) first_data_line = lineno;
    double field[4];
    std::string_view rest = sv;
    for (int i = 0; i < 4; ++i) {
      const std::size_t comma = rest.find(',');
      if (i < 3 && comma == std::string_view::npos)
        throw ParseError(lineno, "expected 4 comma-separated fields (t,ax,ay,az)");
      if (i == 3 && comma != std::string_view::npos)
        throw ParseError(lineno, "expected 4 comma-separated fields (t,ax,ay,az)");
      const std::string_view tok =
          (comma == std::string_view::npos) ? rest : rest.substr(0, comma);
      if (!detail::parse_double(tok, field[i]))
        throw ParseError(lineno, "non-numeric field");
      if (comma != std::string_view::npos) rest = rest.substr(comma + 1);
    }
    t.push_back(field[0]);
    ax.push_back(field[1]);
    ay.push_back(field[2]);
    az.push_back(field[3]);
    row_line.push_back(lineno);
  }

  const std::size_t report_line = first_data_line ? first_data_line : lineno;
  if (!have_id) throw ParseError(report_line, "missing required header trial_id");
  if (!have_alt) throw ParseError(report_line, "missing required header altitude_cm");
  if (!have_rate) throw ParseError(report_line, "missing required header sample_rate_hz");
  if (!have_units) throw ParseError(report_line, "missing required header units");
  if (t.size() < 2) throw ParseError(lineno, "log must contain at least 2 data rows");

  const double spacing = t[1] - t[0];
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1]))
      throw ParseError(row_line[i], "t must be strictly increasing");
    if (std::abs((t[i] - t[i - 1]) - spacing) > 1e-6)
      throw ParseError(row_line[i], "non-uniform sample spacing");
  }

  if (units_g) {
    for (double& v : ax) v *= kStandardGravity;
    for (double& v : ay) v *= kStandardGravity;
    for (double& v : az) v *= kStandardGravity;
  }

  const double dt = 1.0 / log.sample_rate_hz;
  log.ax = {dt, std::move(ax)};
  log.ay = {dt, std::move(ay)};
  log.az = {dt, std::move(az)};
  log.validate();
  return log;
}

inline AccelLog parse_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open log file: " + path);
  return parse_log(in);
}

/// Writes the format parse_log reads: metadata in m/s^2, t regenerated from
/// the sample rate, numbers at 9 significant digits.
inline void write_log(const AccelLog& log, std::ostream& out) {
  log.validate();
  out << "# trial_id=" << log.trial_id << '\n';
  out << "# altitude_cm=" << detail::to_string_g(log.altitude * 100.0) << '\n';
  out << "# sample_rate_hz=" << detail::to_string_g(log.sample_rate_hz) << '\n';
  out << "# units=m/s2\n";
  for (std::size_t i = 0; i < log.size(); ++i) {
    out << detail::to_string_g(static_cast<double>(i) / log.sample_rate_hz) << ','
        << detail::to_string_g(log.ax.values[i]) << ','
        << detail::to_string_g(log.ay.values[i]) << ','
        << detail::to_string_g(log.az.values[i]) << '\n';
  }
}

inline void write_log_file(const AccelLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  write_log(log, out);
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

class SegmentationError : public std::runtime_error {
public:
  enum class Phase { kFreeFall, kImpact };

  SegmentationError(Phase phase, const std::string& message)
      : std::runtime_error(message), phase_(phase) {}

  Phase phase() const { return phase_; }

private:
  Phase phase_;
};

/// Indices bounding the phases of one trial: start of the detected free-fall
/// run, first impact sample, and the acceleration peak.
struct ImpactSegment {
  std::size_t freefall_start = 0;
  std::size_t impact_start = 0;
  std::size_t peak = 0;
};

struct SegmentationConfig {
  double ff_threshold = 3.0;     // free fall reads below this [m/s^2]
  double ff_min_duration = 0.05; // shortest accepted free-fall run [s]
  double impact_threshold = 3.0 * kStandardGravity; // [m/s^2]
  double peak_window = 0.1; // peak search span after impact onset [s]

  void validate() const {
    if (!(ff_threshold > 0.0) || !(impact_threshold > 0.0))
      throw std::invalid_argument("SegmentationConfig: thresholds must be positive");
    if (!(ff_threshold < impact_threshold))
      throw std::invalid_argument(
          "SegmentationConfig: ff_threshold must be below impact_threshold");
    if (!(ff_min_duration > 0.0) || !(peak_window > 0.0))
      throw std::invalid_argument("SegmentationConfig: durations must be positive");
  }
};

/// Locates free fall (first run of |acc| below ff_threshold lasting at least
/// ff_min_duration), the impact onset (first later sample at or above
/// impact_threshold), and the |acc| peak within peak_window after onset.
inline ImpactSegment segment_impact(const AccelLog& log,
                                    const SegmentationConfig& config = {}) {
  log.validate();
  config.validate();
  const Series norm = absolute_acceleration(log.ax, log.ay, log.az);
  const std::vector<double>& v = norm.values;
  const double fs = log.sample_rate_hz;
  const auto need =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(config.ff_min_duration * fs)));

  std::size_t run = 0;
  std::size_t ff = v.size();
  for (std::size_t i = 0; i < v.size(); ++i) {
    run = (v[i] < config.ff_threshold) ? run + 1 : 0;
    if (run >= need) {
      ff = i + 1 - need;
      break;
    }
  }
  if (ff == v.size())
    throw SegmentationError(SegmentationError::Phase::kFreeFall,
                            "no free-fall run of at least " +
                                detail::to_string_g(config.ff_min_duration) +
                                " s below " + detail::to_string_g(config.ff_threshold) +
                                " m/s2 in trial " + log.trial_id);

  std::size_t impact = v.size();
  for (std::size_t i = ff; i < v.size(); ++i) {
    if (v[i] >= config.impact_threshold) {
      impact = i;
      break;
    }
  }
  if (impact == v.size())
    throw SegmentationError(SegmentationError::Phase::kImpact,
                            "no sample at or above " +
                                detail::to_string_g(config.impact_threshold) +
                                " m/s2 after free fall in trial " + log.trial_id);

  const auto window = static_cast<std::size_t>(std::lround(config.peak_window * fs));
  const std::size_t end = std::min(v.size(), impact + std::max<std::size_t>(window, 1));
  std::size_t peak = impact;
  for (std::size_t i = impact + 1; i < end; ++i)
    if (v[i] > v[peak]) peak = i;

  if (!(ff < impact && impact <= peak && peak < v.size()))
    throw SegmentationError(SegmentationError::Phase::kImpact,
                            "inconsistent segmentation in trial " + log.trial_id);
  return {ff, impact, peak};
}

/// All trials recorded at one drop altitude.
struct TrialRecord {
  AccelLog log;
  ImpactSegment segment;
};

struct TrialGroup {
  double altitude = 0.0; // [m]
  std::vector<TrialRecord> trials;

  void validate() const {
    if (trials.empty())
      throw std::invalid_argument("TrialGroup: group must contain at least one trial");
    for (const TrialRecord& t : trials)
      if (t.log.altitude != altitude)
        throw std::invalid_argument("TrialGroup: trial altitude differs from group (trial " +
                                    t.log.trial_id + ")");
  }
};

struct SyntheticTrial {
  AccelLog log;
  ImpactSegment truth;
};

/// Builds a synthetic trial log: pre_roll seconds at rest (reading g), free
/// fall of sqrt(2h/g) (reading 0), then the filtered model sensor magnitude
/// on the z axis for impact_duration. Seeded Gaussian noise goes on all three
/// axes; the returned segment is the generator's ground truth.
inline SyntheticTrial generate_synthetic_log(const ModelParams& params, double h,
                                             const FilterSpec& spec, double noise_sigma,
                                             std::uint64_t seed, double pre_roll = 0.2,
                                             double impact_duration = 0.3) {
  params.validate();
  spec.validate();
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("generate_synthetic_log: altitude must be positive");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw std::invalid_argument("generate_synthetic_log: noise_sigma must be non-negative");
  if (!(pre_roll >= 0.0) || !(impact_duration > 0.0))
    throw std::invalid_argument("generate_synthetic_log: durations must be non-negative");

  const double fs = spec.sample_rate_hz;
  const double dt = 1.0 / fs;
  const auto n_pre = static_cast<std::size_t>(std::lround(pre_roll * fs));
  const auto n_fall =
      static_cast<std::size_t>(std::lround(std::sqrt(2.0 * h / params.g) * fs));
  const auto n_impact = static_cast<std::size_t>(std::lround(impact_duration * fs));
  if (n_fall < 1)
    throw std::invalid_argument("generate_synthetic_log: free fall shorter than one sample");
  if (n_impact < 2)
    throw std::invalid_argument("generate_synthetic_log: impact phase shorter than two samples");

  const ImpactTrace trace = simulate(params, init_from_altitude(params, h), dt,
                                     static_cast<double>(n_impact - 1) * dt);
  const Series filtered =
      apply_filter(design_lowpass(spec), Series{dt, trace.sensor});

  const std::size_t n = n_pre + n_fall + n_impact;
  std::vector<double> ax(n, 0.0), ay(n, 0.0), az(n, 0.0);
  for (std::size_t i = 0; i < n_pre; ++i) az[i] = params.g;
  for (std::size_t i = 0; i < n_impact; ++i) az[n_pre + n_fall + i] = filtered.values[i];

  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (std::size_t i = 0; i < n; ++i) {
      ax[i] += noise(rng);
      ay[i] += noise(rng);
      az[i] += noise(rng);
    }
  }

  SyntheticTrial out;
  out.log.trial_id = "synth-" + detail::to_string_g(h * 100.0) + "cm-seed" +
                     std::to_string(seed);
  out.log.altitude = h;
  out.log.sample_rate_hz = fs;
  out.log.ax = {dt, std::move(ax)};
  out.log.ay = {dt, std::move(ay)};
  out.log.az = {dt, std::move(az)};

  out.truth.freefall_start = n_pre;
  out.truth.impact_start = n_pre + n_fall;
  const auto window = static_cast<std::size_t>(std::lround(0.1 * fs));
  const std::size_t end = std::min(n_impact, std::max<std::size_t>(window, 1));
  std::size_t peak = 0;
  for (std::size_t i = 1; i < end; ++i)
    if (filtered.values[i] > filtered.values[peak]) peak = i;
  out.truth.peak = out.truth.impact_start + peak;
  return out;
}

} // namespace impactkit
