#include <catch2/catch_amalgamated.hpp>

#include <impactkit/model.hpp>
#include <impactkit/signal.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace impactkit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Series make_series(double dt, std::vector<double> values) {
  return {dt, std::move(values)};
}

// Linear interpolation of a sampled series at fractional index.
double at_index(const std::vector<double>& v, double idx) {
  const auto i = static_cast<std::size_t>(idx);
  const double f = idx - static_cast<double>(i);
  return (1.0 - f) * v[i] + f * v[i + 1];
}

} // namespace

TEST_CASE("filter design rejects cutoffs at or above Nyquist", "[signal]") {
  CHECK_THROWS_AS(design_lowpass({500.0, 1000.0}), std::invalid_argument);
  CHECK_THROWS_AS(design_lowpass({600.0, 1000.0}), std::invalid_argument);
  CHECK_THROWS_AS(design_lowpass({0.0, 1000.0}), std::invalid_argument);
  CHECK_THROWS_AS(design_lowpass({-5.0, 1000.0}), std::invalid_argument);
  CHECK_THROWS_AS(design_lowpass({100.0, 0.0}), std::invalid_argument);
  CHECK_NOTHROW(design_lowpass({499.0, 1000.0}));
}

TEST_CASE("filter coefficients for a 500 Hz cutoff at 10 kHz", "[signal]") {
  const FilterCoeffs c = design_lowpass({500.0, 10000.0});
  CHECK_THAT(c.b0, WithinRel(0.13672873599732, 1e-12));
  CHECK_THAT(c.b1, WithinRel(0.13672873599732, 1e-12));
  CHECK_THAT(c.a1, WithinRel(-0.726542528005361, 1e-12));
  // Unity DC gain: (b0 + b1) / (1 + a1) = 1.
  CHECK_THAT(c.b0 + c.b1, WithinRel(1.0 + c.a1, 1e-14));
}

TEST_CASE("step response follows the first-order time constant", "[signal]") {
  const FilterCoeffs c = design_lowpass({500.0, 10000.0});
  const Series step = make_series(1e-4, std::vector<double>(60, 1.0));
  const Series y = apply_filter(c, step);

  const double expected[] = {0.13672873599732,  0.372796713497109, 0.544310138650919,
                             0.668921936149026, 0.759457706522593, 0.825235794004717};
  for (int i = 0; i < 6; ++i) REQUIRE_THAT(y.values[i], WithinRel(expected[i], 1e-12));

  // The bilinear (trapezoidal) discretization treats the step edge as landing
  // half a sample before the first output, so the continuous-time response is
  // read at index t*fs - 1/2. At one time constant that gives 1 - 1/e; reading
  // the raw grid at t*fs instead runs half a sample ahead of it.
  const double tau_idx = 10000.0 / (2.0 * std::numbers::pi * 500.0);
  CHECK_THAT(at_index(y.values, tau_idx - 0.5), WithinAbs(0.632, 0.01));
  CHECK_THAT(at_index(y.values, tau_idx - 0.5), WithinRel(0.629432315693452, 1e-12));
  CHECK_THAT(at_index(y.values, tau_idx), WithinRel(0.685498932660045, 1e-12));

  // 95% of the final value is reached within three time constants either way.
  CHECK(at_index(y.values, 3.0 * tau_idx) >= 0.95);
  CHECK(at_index(y.values, 3.0 * tau_idx - 0.5) >= 0.95);
  CHECK_THAT(at_index(y.values, 3.0 * tau_idx), WithinRel(0.958618269539336, 1e-12));
}

TEST_CASE("constant input converges to the constant", "[signal]") {
  const FilterCoeffs c = design_lowpass({500.0, 10000.0});
  // 20 time constants at tau = 1/(2*pi*500) is 64 samples; use a margin.
  const Series in = make_series(1e-4, std::vector<double>(200, 7.3));
  const Series out = apply_filter(c, in);
  CHECK(out.values.front() < 7.3);
  CHECK_THAT(out.values.back(), WithinAbs(7.3, 1e-6));

  const Series zeros = make_series(1e-4, std::vector<double>(50, 0.0));
  for (double v : apply_filter(c, zeros).values) REQUIRE(v == 0.0);

  CHECK_THROWS_AS(apply_filter(c, Series{1e-4, {}}), std::invalid_argument);
}

TEST_CASE("very low cutoff smooths toward the series mean", "[signal]") {
  const FilterCoeffs c = design_lowpass({1.0, 1000.0});
  std::vector<double> v(8000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 5.0 + ((i % 2 == 0) ? 1.0 : -1.0);
  const Series out = apply_filter(c, make_series(1e-3, std::move(v)));
  CHECK_THAT(out.values.back(), WithinAbs(5.0, 0.01));
}

TEST_CASE("filtering is linear", "[signal]") {
  const FilterCoeffs c = design_lowpass({500.0, 10000.0});
  std::mt19937 rng(7);
  std::normal_distribution<double> noise(0.0, 3.0);
  std::vector<double> v1(300), v2(300), mix(300);
  for (std::size_t i = 0; i < v1.size(); ++i) {
    v1[i] = noise(rng);
    v2[i] = noise(rng);
    mix[i] = 2.5 * v1[i] - 1.3 * v2[i];
  }
  const Series y1 = apply_filter(c, make_series(1e-4, v1));
  const Series y2 = apply_filter(c, make_series(1e-4, v2));
  const Series ym = apply_filter(c, make_series(1e-4, mix));
  for (std::size_t i = 0; i < v1.size(); ++i)
    REQUIRE_THAT(ym.values[i], WithinAbs(2.5 * y1.values[i] - 1.3 * y2.values[i], 1e-9));
}

TEST_CASE("filtered peak stays below the raw peak", "[signal]") {
  // Holds for any nonnegative input while the pole is nonnegative (cutoff at
  // or below a quarter of the sample rate): each output is then a convex
  // combination bounded by the running input maximum.
  const FilterCoeffs c = design_lowpass({500.0, 10000.0});
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> mag(0.0, 50.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> v(400);
    for (double& x : v) x = mag(rng);
    const double raw_peak = *std::max_element(v.begin(), v.end());
    const Series y = apply_filter(c, make_series(1e-4, std::move(v)));
    REQUIRE(*std::max_element(y.values.begin(), y.values.end()) <= raw_peak);
  }
}

TEST_CASE("absolute acceleration is the elementwise norm", "[signal]") {
  const double g = 9.81;
  const Series ax = make_series(1e-3, {0.0, 3.0, 0.0});
  const Series ay = make_series(1e-3, {0.0, 4.0, 0.0});
  const Series az = make_series(1e-3, {g, 0.0, 0.0});
  const Series n = absolute_acceleration(ax, ay, az);
  CHECK_THAT(n.values[0], WithinRel(g, 1e-15));
  CHECK_THAT(n.values[1], WithinRel(5.0, 1e-15));
  CHECK(n.values[2] == 0.0);
  CHECK(n.dt == 1e-3);

  CHECK_THROWS_AS(absolute_acceleration(ax, ay, make_series(1e-3, {g, 0.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(absolute_acceleration(ax, ay, make_series(2e-3, {g, 0.0, 0.0})),
                  std::invalid_argument);
}

TEST_CASE("axis norm is invariant to permutations and sign flips", "[signal]") {
  std::mt19937 rng(23);
  std::normal_distribution<double> noise(0.0, 10.0);
  std::vector<double> a(64), b(64), c(64), nb(64), nc2(64);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = noise(rng);
    b[i] = noise(rng);
    c[i] = noise(rng);
    nb[i] = -b[i];
    nc2[i] = -c[i];
  }
  const Series base = absolute_acceleration(make_series(1e-3, a), make_series(1e-3, b),
                                            make_series(1e-3, c));
  const Series permuted = absolute_acceleration(make_series(1e-3, c), make_series(1e-3, a),
                                                make_series(1e-3, b));
  const Series flipped = absolute_acceleration(make_series(1e-3, a), make_series(1e-3, nb),
                                               make_series(1e-3, nc2));
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE_THAT(permuted.values[i], WithinAbs(base.values[i], 1e-12));
    REQUIRE_THAT(flipped.values[i], WithinAbs(base.values[i], 1e-12));
  }
}

TEST_CASE("peak finds the earliest global maximum", "[signal]") {
  const Peak p1 = peak(make_series(1.0, {1.0, 3.0, 2.0}));
  CHECK(p1.index == 1);
  CHECK(p1.value == 3.0);
  const Peak p2 = peak(make_series(1.0, {2.0, 2.0, 1.0}));
  CHECK(p2.index == 0);
  CHECK(p2.value == 2.0);
  CHECK_THROWS_AS(peak(Series{1.0, {}}), std::invalid_argument);
}

TEST_CASE("filtered impact sensor peaks shortly after touchdown", "[signal]") {
  const ModelParams frame{0.241, 46.0, 7040.0, 9.81};
  const ImpactTrace trace = simulate(frame, init_from_altitude(frame, 1.5), 1e-4, 0.0499);
  const Series raw = make_series(trace.dt, trace.sensor);

  // Unfiltered, the damper term puts the maximum at the very first sample.
  const Peak raw_peak = peak(raw);
  CHECK(raw_peak.index == 0);
  CHECK_THAT(raw_peak.value, WithinRel(1035.46618347032, 1e-11));

  const Series filtered = apply_filter(design_lowpass({500.0, 10000.0}), raw);
  CHECK_THAT(filtered.values.front(), WithinRel(141.577982433865, 1e-11));
  const Peak fp = peak(filtered);
  CHECK(fp.index == 12);
  CHECK_THAT(fp.value, WithinRel(973.671494924351, 1e-11));
  CHECK(static_cast<double>(fp.index) * trace.dt < 0.015);
}
