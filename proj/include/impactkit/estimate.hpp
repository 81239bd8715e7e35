#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <impactkit/accel_log.hpp>
#include <impactkit/detail/numio.hpp>
#include <impactkit/model.hpp>
#include <impactkit/signal.hpp>

namespace impactkit {

/// One static deformation measurement: force applied at a held compression.
struct StaticMeasurement {
  double displacement = 0.0; // [m]
  double force = 0.0;        // [N]
};

struct StiffnessFit {
  double k = 0.0;         // fitted slope [N/m]
  double intercept = 0.0; // pinned to the structure weight W [N]
  double rmse = 0.0;      // residual root mean square [N]
};

/// Least-squares slope through the pinned intercept W:
/// k = sum (F_i - W) x_i / sum x_i^2.
inline StiffnessFit fit_stiffness(const std::vector<StaticMeasurement>& data, double W) {
  if (data.empty())
    throw std::invalid_argument("fit_stiffness: at least one measurement required");
  if (!std::isfinite(W))
    throw std::invalid_argument("fit_stiffness: intercept must be finite");
  double sxx = 0.0, sxy = 0.0;
  for (const StaticMeasurement& d : data) {
    if (!(d.displacement >= 0.0) || !std::isfinite(d.displacement) ||
        !(d.force >= 0.0) || !std::isfinite(d.force))
      throw std::invalid_argument("fit_stiffness: measurements must be non-negative");
    sxx += d.displacement * d.displacement;
    sxy += (d.force - W) * d.displacement;
  }
  if (sxx == 0.0)
    throw std::invalid_argument("fit_stiffness: all displacements are zero");
  const double k = sxy / sxx;
  if (!(k > 0.0))
    throw std::invalid_argument("fit_stiffness: data implies non-positive stiffness");
  double sq = 0.0;
  for (const StaticMeasurement& d : data) {
    const double r = d.force - (W + k * d.displacement);
    sq += r * r;
  }
  return {k, W, std::sqrt(sq / static_cast<double>(data.size()))};
}

/// Reads `displacement_mm,force_N` CSV; displacements are converted to m.
inline std::vector<StaticMeasurement> parse_static_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::vector<StaticMeasurement> data;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = detail::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    if (!header_seen) {
      if (sv != "displacement_mm,force_N")
        throw ParseError(lineno, "expected header displacement_mm,force_N");
      header_seen = true;
      continue;
    }
    const std::size_t comma = sv.find(',');
    if (comma == std::string_view::npos || sv.find(',', comma + 1) != std::string_view::npos)
      throw ParseError(lineno, "expected 2 comma-separated fields");
    double mm = 0.0, force = 0.0;
    if (!detail::parse_double(sv.substr(0, comma), mm) ||
        !detail::parse_double(sv.substr(comma + 1), force))
      throw ParseError(lineno, "non-numeric field");
    if (mm < 0.0 || force < 0.0)
      throw ParseError(lineno, "measurements must be non-negative");
    data.push_back({mm / 1000.0, force});
  }
  if (!header_seen) throw ParseError(lineno, "expected header displacement_mm,force_N");
  if (data.empty()) throw ParseError(lineno, "no measurements");
  return data;
}

inline std::vector<StaticMeasurement> parse_static_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open static data file: " + path);
  return parse_static_csv(in);
}

namespace detail {

/// Low-passed model sensor prediction sampled on the model grid, long enough
/// to be interpolated anywhere in [0, t_last].
inline std::vector<double> filtered_model_sensor(const ModelParams& params, double altitude,
                                                 const FilterSpec& spec, double t_last) {
  const double dt = 1.0 / spec.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::floor(t_last / dt)) + 3;
  const ImpactTrace trace = simulate(params, init_from_altitude(params, altitude), dt,
                                     static_cast<double>(n - 1) * dt);
  return apply_filter(design_lowpass(spec), Series{dt, trace.sensor}).values;
}

} // namespace detail

/// Mean squared difference between the filtered model sensor prediction and
/// the measured |acc|, over [impact_start, peak] inclusive, with model t = 0
/// aligned at impact_start. The model is resampled onto the log grid by
/// linear interpolation.
inline double trial_loss(const ModelParams& params, const FilterSpec& spec,
                         const TrialRecord& trial) {
  params.validate();
  spec.validate();
  trial.log.validate();
  const ImpactSegment& seg = trial.segment;
  if (!(seg.freefall_start < seg.impact_start && seg.impact_start <= seg.peak &&
        seg.peak < trial.log.size()))
    throw std::invalid_argument("trial_loss: segment does not fit the log");
  if (seg.peak == seg.impact_start)
    throw std::invalid_argument("trial_loss: empty fit window (peak at impact onset)");

  const std::size_t n_window = seg.peak - seg.impact_start + 1;
  const double fs_log = trial.log.sample_rate_hz;
  const double t_last = static_cast<double>(n_window - 1) / fs_log;
  const std::vector<double> model =
      detail::filtered_model_sensor(params, trial.log.altitude, spec, t_last);

  const Series norm = absolute_acceleration(trial.log.ax, trial.log.ay, trial.log.az);
  double sum = 0.0;
  for (std::size_t j = 0; j < n_window; ++j) {
    const double idx = static_cast<double>(j) / fs_log * spec.sample_rate_hz;
    std::size_t i0 = static_cast<std::size_t>(idx);
    i0 = std::min(i0, model.size() - 2);
    const double frac = idx - static_cast<double>(i0);
    const double predicted = (1.0 - frac) * model[i0] + frac * model[i0 + 1];
    const double measured = norm.values[seg.impact_start + j];
    const double diff = predicted - measured;
    sum += diff * diff;
  }
  return sum / static_cast<double>(n_window);
}

/// Mean over altitude groups of the per-group mean trial loss, so each
/// altitude contributes equally regardless of its trial count. Reduction
/// order is fixed for bit-stable results.
inline double weighted_loss(const ModelParams& params, const FilterSpec& spec,
                            const std::vector<TrialGroup>& groups) {
  if (groups.empty())
    throw std::invalid_argument("weighted_loss: at least one trial group required");
  double total = 0.0;
  for (const TrialGroup& group : groups) {
    group.validate();
    double group_sum = 0.0;
    for (const TrialRecord& trial : group.trials)
      group_sum += trial_loss(params, spec, trial);
    total += group_sum / static_cast<double>(group.trials.size());
  }
  return total / static_cast<double>(groups.size());
}

struct NelderMeadOptions {
  double x_tol = 1e-4; // simplex spread tolerance, relative to max(1, |best|)
  double f_tol = 1e-4; // value spread tolerance, relative to max(1, |f best|)
  int max_iterations = 2000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Downhill simplex with reflection 1, expansion 2, contraction 0.5 and
/// shrink 0.5. The initial simplex perturbs each coordinate by 5% (0.00025
/// absolute for zero coordinates).
template <typename F>
NelderMeadResult nelder_mead(F&& f, const std::vector<double>& x0,
                             const NelderMeadOptions& options = {}) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: at least one parameter required");
  if (options.max_iterations < 1 || !(options.x_tol > 0.0) || !(options.f_tol > 0.0))
    throw std::invalid_argument("nelder_mead: invalid options");

  std::vector<std::vector<double>> simplex;
  simplex.reserve(n + 1);
  simplex.push_back(x0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p = x0;
    p[i] = (p[i] != 0.0) ? 1.05 * p[i] : 0.00025;
    simplex.push_back(std::move(p));
  }
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    fv[i] = f(simplex[i]);
    if (!std::isfinite(fv[i]))
      throw std::invalid_argument("nelder_mead: objective is not finite at the initial simplex");
  }

  const auto sort_simplex = [&] {
    std::vector<std::size_t> order(n + 1);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s2[i] = std::move(simplex[order[i]]);
      f2[i] = fv[order[i]];
    }
    simplex = std::move(s2);
    fv = std::move(f2);
  };

  const auto spread_converged = [&] {
    double x_spread = 0.0, f_spread = 0.0, x_scale = 0.0;
    for (std::size_t j = 0; j < n; ++j) x_scale = std::max(x_scale, std::abs(simplex[0][j]));
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        x_spread = std::max(x_spread, std::abs(simplex[i][j] - simplex[0][j]));
      f_spread = std::max(f_spread, std::abs(fv[i] - fv[0]));
    }
    return x_spread <= options.x_tol * std::max(1.0, x_scale) &&
           f_spread <= options.f_tol * std::max(1.0, std::abs(fv[0]));
  };

  NelderMeadResult result;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    sort_simplex();
    if (spread_converged()) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    for (double& v : centroid) v /= static_cast<double>(n);

    const auto blend = [&](double coeff) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j)
        p[j] = centroid[j] + coeff * (centroid[j] - simplex[n][j]);
      return p;
    };
    const auto replace_worst = [&](std::vector<double> p, double value) {
      simplex[n] = std::move(p);
      fv[n] = value;
    };
    const auto shrink = [&] {
      for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
          simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
        fv[i] = f(simplex[i]);
      }
    };

    std::vector<double> xr = blend(1.0);
    const double fr = f(xr);
    if (fr < fv[0]) {
      std::vector<double> xe = blend(2.0);
      const double fe = f(xe);
      if (fe < fr) replace_worst(std::move(xe), fe);
      else replace_worst(std::move(xr), fr);
    } else if (fr < fv[n - 1]) {
      replace_worst(std::move(xr), fr);
    } else if (fr < fv[n]) {
      std::vector<double> xc = blend(0.5);
      const double fc = f(xc);
      if (fc <= fr) replace_worst(std::move(xc), fc);
      else shrink();
    } else {
      std::vector<double> xc = blend(-0.5);
      const double fc = f(xc);
      if (fc < fv[n]) replace_worst(std::move(xc), fc);
      else shrink();
    }
  }

  sort_simplex();
  result.x = simplex[0];
  result.f = fv[0];
  result.iterations = iter;
  return result;
}

enum class DampingFitMode { kFixedStiffness, kJointStiffness };

struct FitResult {
  double c = 0.0;
  double k = 0.0;
  double loss = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes the weighted loss over c (stiffness fixed) or over (c, k)
/// jointly. Parameters are optimized as logarithms so they stay positive.
/// A failed search is reported through converged = false, not an exception.
inline FitResult fit_damping(const std::vector<TrialGroup>& groups, const FilterSpec& spec,
                             double m, DampingFitMode mode, double c0, double k0,
                             double g = 9.81, const NelderMeadOptions& options = {}) {
  if (groups.empty())
    throw std::invalid_argument("fit_damping: at least one trial group required");
  for (const TrialGroup& group : groups) group.validate();
  spec.validate();
  if (!(m > 0.0) || !std::isfinite(m))
    throw std::invalid_argument("fit_damping: mass must be positive");
  if (!(c0 > 0.0) || !(k0 > 0.0) || !std::isfinite(c0) || !std::isfinite(k0))
    throw std::invalid_argument("fit_damping: initial parameters must be positive");

  const bool joint = (mode == DampingFitMode::kJointStiffness);
  const auto objective = [&](const std::vector<double>& u) {
    const double c = std::exp(u[0]);
    const double k = joint ? std::exp(u[1]) : k0;
    if (!std::isfinite(c) || !std::isfinite(k))
      return std::numeric_limits<double>::infinity();
    return weighted_loss({m, c, k, g}, spec, groups);
  };

  std::vector<double> u0{std::log(c0)};
  if (joint) u0.push_back(std::log(k0));
  const NelderMeadResult nm = nelder_mead(objective, u0, options);

  FitResult result;
  result.c = std::exp(nm.x[0]);
  result.k = joint ? std::exp(nm.x[1]) : k0;
  result.loss = nm.f;
  result.iterations = nm.iterations;
  result.converged = nm.converged;
  return result;
}

/// Inclusive linear range for one loss-surface axis.
struct AxisRange {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  void validate(const char* name) const {
    if (!(min > 0.0) || !(max > min) || !std::isfinite(max))
      throw std::invalid_argument(std::string("loss_surface: ") + name +
                                  " range must be positive and ordered");
    if (count < 2)
      throw std::invalid_argument(std::string("loss_surface: ") + name +
                                  " resolution must be at least 2");
  }

  std::vector<double> values() const {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i)
      v[i] = min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
    return v;
  }
};

/// Weighted loss over a (c, k) grid; transformed holds ln(1 + z) for contour
/// plots where large losses would swamp the scale.
struct LossSurface {
  std::vector<double> c_values;
  std::vector<double> k_values;
  std::vector<std::vector<double>> loss;        // loss[i][j] at (c_values[i], k_values[j])
  std::vector<std::vector<double>> transformed; // ln(1 + loss)
};

inline LossSurface loss_surface(const std::vector<TrialGroup>& groups, const FilterSpec& spec,
                                double m, const AxisRange& c_axis, const AxisRange& k_axis,
                                double g = 9.81) {
  c_axis.validate("c");
  k_axis.validate("k");
  if (!(m > 0.0) || !std::isfinite(m))
    throw std::invalid_argument("loss_surface: mass must be positive");

  LossSurface surface;
  surface.c_values = c_axis.values();
  surface.k_values = k_axis.values();
  surface.loss.resize(c_axis.count);
  surface.transformed.resize(c_axis.count);
  for (std::size_t i = 0; i < c_axis.count; ++i) {
    surface.loss[i].resize(k_axis.count);
    surface.transformed[i].resize(k_axis.count);
    for (std::size_t j = 0; j < k_axis.count; ++j) {
      const double z =
          weighted_loss({m, surface.c_values[i], surface.k_values[j], g}, spec, groups);
      surface.loss[i][j] = z;
      surface.transformed[i][j] = std::log1p(z);
    }
  }
  return surface;
}

struct SurfaceArgmin {
  std::size_t c_index = 0;
  std::size_t k_index = 0;
  double c = 0.0;
  double k = 0.0;
  double loss = 0.0;
};

/// Grid cell with the smallest raw loss; earliest cell in row-major order on ties.
inline SurfaceArgmin surface_argmin(const LossSurface& surface) {
  if (surface.loss.empty() || surface.loss[0].empty())
    throw std::invalid_argument("surface_argmin: empty surface");
  SurfaceArgmin best{0, 0, surface.c_values[0], surface.k_values[0], surface.loss[0][0]};
  for (std::size_t i = 0; i < surface.loss.size(); ++i)
    for (std::size_t j = 0; j < surface.loss[i].size(); ++j)
      if (surface.loss[i][j] < best.loss)
        best = {i, j, surface.c_values[i], surface.k_values[j], surface.loss[i][j]};
  return best;
}

/// Grid CSV: one section for the raw loss and one for ln(1+z). Each section
/// has the k axis across the header row and the c axis down the first column.
inline void write_loss_surface_csv(const LossSurface& surface, std::ostream& out) {
  const auto write_grid = [&](const std::vector<std::vector<double>>& grid) {
    out << "c\\k";
    for (double k : surface.k_values) out << ',' << detail::to_string_g(k);
    out << '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out << detail::to_string_g(surface.c_values[i]);
      for (double z : grid[i]) out << ',' << detail::to_string_g(z);
      out << '\n';
    }
  };
  out << "# raw loss z\n";
  write_grid(surface.loss);
  out << "# cauchy view ln(1+z)\n";
  write_grid(surface.transformed);
}

} // namespace impactkit
