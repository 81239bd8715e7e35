#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace impactkit {

/// Lumped parameters of the 1-DOF impact model  m*x'' + c*x' + k*x = m*g,
/// where x is the frame compression (positive toward the ground) and the
/// gravity of the falling payload acts as a constant forcing term.
struct ModelParams {
  double m = 0.0;  // payload mass [kg]
  double c = 0.0;  // equivalent damping coefficient [N s/m]
  double k = 0.0;  // equivalent stiffness [N/m]
  double g = 9.81; // gravitational acceleration [m/s^2]

  double natural_frequency() const { return std::sqrt(k / m); } // [rad/s]
  double damping_ratio() const { return c / (2.0 * std::sqrt(k * m)); }
  double static_sag() const { return m * g / k; } // equilibrium compression [m]

  void validate() const {
    if (!(m > 0.0) || !std::isfinite(m))
      throw std::invalid_argument("ModelParams: mass must be positive and finite");
    if (!(c > 0.0) || !std::isfinite(c))
      throw std::invalid_argument("ModelParams: damping must be positive and finite");
    if (!(k > 0.0) || !std::isfinite(k))
      throw std::invalid_argument("ModelParams: stiffness must be positive and finite");
    if (!(g > 0.0) || !std::isfinite(g))
      throw std::invalid_argument("ModelParams: gravity must be positive and finite");
  }
};

/// Conditions at the moment of first ground contact.
struct ImpactInit {
  double x0 = 0.0; // initial compression [m]
  double v0 = 0.0; // initial compression rate [m/s]
  std::optional<double> altitude = std::nullopt; // source drop altitude [m], when derived from one

  void validate() const {
    if (!(x0 >= 0.0) || !std::isfinite(x0))
      throw std::invalid_argument("ImpactInit: x0 must be non-negative and finite");
    if (!(v0 >= 0.0) || !std::isfinite(v0))
      throw std::invalid_argument("ImpactInit: v0 must be non-negative and finite");
  }
};

/// Free-fall impact conditions at drop altitude h: x0 = 0, v0 = sqrt(2 g h).
inline ImpactInit init_from_altitude(const ModelParams& params, double h) {
  params.validate();
  if (!(h >= 0.0) || !std::isfinite(h))
    throw std::invalid_argument("init_from_altitude: altitude must be non-negative");
  return {0.0, std::sqrt(2.0 * params.g * h), h};
}

struct ImpactState {
  double t = 0.0; // time since impact [s]
  double x = 0.0; // compression [m]
  double v = 0.0; // compression rate [m/s]
  double a = 0.0; // compression acceleration [m/s^2]
};

/// Specific force transmitted through the frame, (c*v + k*x)/m. This is what
/// an ideal accelerometer on the payload reads during the impact; it equals
/// g - a, so it is nonzero the instant the frame touches down.
inline double sensor_magnitude(const ModelParams& params, const ImpactState& s) {
  return (params.c * s.v + params.k * s.x) / params.m;
}

/// Exact solution of the impact ODE for one set of parameters and initial
/// conditions. The homogeneous part is solved about the static equilibrium
/// x_eq = m*g/k; the damping branch is chosen once at construction, with
/// |zeta - 1| < 1e-9 treated as critically damped.
class ImpactSolution {
public:
  ImpactSolution(const ModelParams& params, const ImpactInit& init) : params_(params) {
    params.validate();
    init.validate();
    const double wn = params.natural_frequency();
    const double zeta = params.damping_ratio();
    x_eq_ = params.static_sag();
    sigma_ = zeta * wn;
    const double y0 = init.x0 - x_eq_;
    if (std::abs(zeta - 1.0) < 1e-9) {
      branch_ = Branch::kCritical;
      r1_ = -wn;
      c1_ = y0;
      c2_ = init.v0 + wn * y0;
    } else if (zeta < 1.0) {
      branch_ = Branch::kUnderdamped;
      wd_ = wn * std::sqrt(1.0 - zeta * zeta);
      c1_ = y0;
      c2_ = (init.v0 + sigma_ * y0) / wd_;
    } else {
      branch_ = Branch::kOverdamped;
      const double s = wn * std::sqrt(zeta * zeta - 1.0);
      r1_ = -sigma_ + s; // slow root
      r2_ = -sigma_ - s; // fast root
      c1_ = (init.v0 - r2_ * y0) / (r1_ - r2_);
      c2_ = y0 - c1_;
    }
  }

  double equilibrium() const { return x_eq_; }

  double x(double t) const {
    switch (branch_) {
    case Branch::kUnderdamped: {
      const double e = std::exp(-sigma_ * t);
      return x_eq_ + e * (c1_ * std::cos(wd_ * t) + c2_ * std::sin(wd_ * t));
    }
    case Branch::kCritical:
      return x_eq_ + (c1_ + c2_ * t) * std::exp(r1_ * t);
    case Branch::kOverdamped:
      return x_eq_ + c1_ * std::exp(r1_ * t) + c2_ * std::exp(r2_ * t);
    }
    return x_eq_;
  }

  double v(double t) const {
    switch (branch_) {
    case Branch::kUnderdamped: {
      const double e = std::exp(-sigma_ * t);
      const double cw = std::cos(wd_ * t);
      const double sw = std::sin(wd_ * t);
      return e * ((c2_ * wd_ - c1_ * sigma_) * cw - (c1_ * wd_ + c2_ * sigma_) * sw);
    }
    case Branch::kCritical:
      return std::exp(r1_ * t) * (c2_ + r1_ * (c1_ + c2_ * t));
    case Branch::kOverdamped:
      return c1_ * r1_ * std::exp(r1_ * t) + c2_ * r2_ * std::exp(r2_ * t);
    }
    return 0.0;
  }

  /// Full state; a comes from the ODE itself, so the residual
  /// m*a + c*v + k*x - m*g is zero to rounding.
  ImpactState state(double t) const {
    const double xt = x(t);
    const double vt = v(t);
    const double at = params_.g - (params_.c * vt + params_.k * xt) / params_.m;
    return {t, xt, vt, at};
  }

  /// Slowest decay rate of the transient [1/s]; sets the settling horizon.
  double slow_decay_rate() const {
    if (branch_ == Branch::kOverdamped) return -r1_;
    return sigma_;
  }

  /// Shortest dynamic timescale [s]; sets scan resolution for root finding.
  double fast_timescale() const { return 1.0 / params_.natural_frequency(); }

private:
  enum class Branch { kUnderdamped, kCritical, kOverdamped };

  ModelParams params_;
  Branch branch_ = Branch::kUnderdamped;
  double x_eq_ = 0.0;
  double sigma_ = 0.0; // zeta * wn
  double wd_ = 0.0;    // damped frequency (underdamped branch)
  double r1_ = 0.0, r2_ = 0.0;
  double c1_ = 0.0, c2_ = 0.0;
};

/// Exact state at time t >= 0.
inline ImpactState closed_form_state(const ModelParams& params, const ImpactInit& init,
                                     double t) {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw std::invalid_argument("closed_form_state: t must be non-negative");
  return ImpactSolution(params, init).state(t);
}

enum class TruncationReason { kTimeLimit, kDisplacementLimit, kRebound };

inline const char* to_string(TruncationReason r) {
  switch (r) {
  case TruncationReason::kTimeLimit: return "time-limit";
  case TruncationReason::kDisplacementLimit: return "displacement-limit";
  case TruncationReason::kRebound: return "rebound";
  }
  return "unknown";
}

/// Uniformly sampled impact trajectory with the predicted sensor reading
/// (c*v + k*x)/m alongside each state.
struct ImpactTrace {
  double dt = 0.0;
  std::vector<ImpactState> states;
  std::vector<double> sensor;
  TruncationReason truncation_reason = TruncationReason::kTimeLimit;

  std::size_t size() const { return states.size(); }
};

struct SimulateOptions {
  std::optional<double> x_limit; // stop at the first sample with x >= x_limit
  bool stop_on_rebound = false;  // stop at the first sample with v < 0 past the peak
};

/// Sample the closed-form solution on a uniform grid t = 0, dt, ..., <= t_max.
/// The sample that triggers a truncation is included in the trace.
inline ImpactTrace simulate(const ModelParams& params, const ImpactInit& init, double dt,
                            double t_max, const SimulateOptions& opts = {}) {
  params.validate();
  init.validate();
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("simulate: dt must be positive");
  if (!(t_max > dt) || !std::isfinite(t_max))
    throw std::invalid_argument("simulate: t_max must exceed dt");

  const ImpactSolution sol(params, init);
  ImpactTrace trace;
  trace.dt = dt;
  const auto n = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9)) + 1;
  trace.states.reserve(n);
  trace.sensor.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ImpactState s = sol.state(static_cast<double>(i) * dt);
    trace.states.push_back(s);
    trace.sensor.push_back(sensor_magnitude(params, s));
    if (opts.x_limit && s.x >= *opts.x_limit) {
      trace.truncation_reason = TruncationReason::kDisplacementLimit;
      break;
    }
    if (opts.stop_on_rebound && s.v < 0.0) {
      trace.truncation_reason = TruncationReason::kRebound;
      break;
    }
  }
  return trace;
}

struct DisplacementPeak {
  double x = 0.0;          // supremum of x(t) over t >= 0 [m]
  std::optional<double> t; // time of the peak; empty if reached only asymptotically
};

/// Largest compression of the trajectory. The peak is the first zero of v(t)
/// with x above equilibrium, refined by bisection to 1e-9 s. A monotone
/// (heavily overdamped) approach never crosses v = 0 and tops out at the
/// static equilibrium.
inline DisplacementPeak displacement_peak(const ModelParams& params, const ImpactInit& init) {
  params.validate();
  init.validate();
  const ImpactSolution sol(params, init);

  // v0 = 0 and x0 at/above equilibrium: no upward motion, peak is at t = 0.
  if (init.v0 == 0.0 && init.x0 >= sol.equilibrium()) return {init.x0, 0.0};

  const double t_end = 40.0 / sol.slow_decay_rate();
  const double step = sol.fast_timescale() / 16.0;
  double t_prev = 0.0;
  double v_prev = sol.v(0.0);
  for (double t = step; t <= t_end; t += step) {
    const double vt = sol.v(t);
    if (v_prev >= 0.0 && vt < 0.0) {
      double lo = t_prev, hi = t;
      while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (sol.v(mid) >= 0.0 ? lo : hi) = mid;
      }
      const double t_star = 0.5 * (lo + hi);
      return {sol.x(t_star), t_star};
    }
    t_prev = t;
    v_prev = vt;
  }
  return {std::max(sol.equilibrium(), init.x0), std::nullopt};
}

/// Maximum compression for a free fall from altitude h.
inline double max_displacement(const ModelParams& params, double h) {
  return displacement_peak(params, init_from_altitude(params, h)).x;
}

} // namespace impactkit
