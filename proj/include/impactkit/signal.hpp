#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace impactkit {

/// Cutoff and sampling rate of the sensor-latency low-pass filter.
struct FilterSpec {
  double cutoff_hz = 500.0;
  double sample_rate_hz = 10000.0;

  void validate() const {
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
      throw std::invalid_argument("FilterSpec: sample rate must be positive");
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * sample_rate_hz))
      throw std::invalid_argument("FilterSpec: cutoff must lie in (0, sample_rate/2)");
  }
};

/// One-pole/one-zero discrete filter  y[n] = b0*x[n] + b1*x[n-1] - a1*y[n-1].
struct FilterCoeffs {
  double b0 = 0.0;
  double b1 = 0.0;
  double a1 = 0.0;
};

/// First-order Butterworth low-pass via the bilinear transform with frequency
/// pre-warping. DC gain is exactly 1 by construction.
inline FilterCoeffs design_lowpass(const FilterSpec& spec) {
  spec.validate();
  const double K = std::tan(std::numbers::pi * spec.cutoff_hz / spec.sample_rate_hz);
  const double b = K / (1.0 + K);
  return {b, b, (K - 1.0) / (1.0 + K)};
}

/// Uniformly sampled scalar series.
struct Series {
  double dt = 0.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

/// Causal single-pass filtering with zero initial state, so an impulse-like
/// onset ramps up from zero instead of jumping.
inline Series apply_filter(const FilterCoeffs& coeffs, const Series& s) {
  if (s.values.empty())
    throw std::invalid_argument("apply_filter: series must be non-empty");
  Series out;
  out.dt = s.dt;
  out.values.resize(s.values.size());
  double x_prev = 0.0;
  double y_prev = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double y = coeffs.b0 * s.values[i] + coeffs.b1 * x_prev - coeffs.a1 * y_prev;
    out.values[i] = y;
    x_prev = s.values[i];
    y_prev = y;
  }
  return out;
}

/// Elementwise Euclidean norm of the three axis readings.
inline Series absolute_acceleration(const Series& ax, const Series& ay, const Series& az) {
  if (ax.size() != ay.size() || ax.size() != az.size())
    throw std::invalid_argument("absolute_acceleration: axis lengths differ");
  if (ax.dt != ay.dt || ax.dt != az.dt)
    throw std::invalid_argument("absolute_acceleration: axis sample spacings differ");
  Series out;
  out.dt = ax.dt;
  out.values.resize(ax.size());
  for (std::size_t i = 0; i < ax.size(); ++i)
    out.values[i] = std::sqrt(ax.values[i] * ax.values[i] + ay.values[i] * ay.values[i] +
                              az.values[i] * az.values[i]);
  return out;
}

struct Peak {
  std::size_t index = 0;
  double value = 0.0;
};

/// Global maximum of the series; ties go to the earliest index.
inline Peak peak(const Series& s) {
  if (s.values.empty())
    throw std::invalid_argument("peak: series must be non-empty");
  Peak best{0, s.values[0]};
  for (std::size_t i = 1; i < s.values.size(); ++i) {
    if (s.values[i] > best.value) best = {i, s.values[i]};
  }
  return best;
}

} // namespace impactkit
