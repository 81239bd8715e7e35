#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <impactkit/detail/numio.hpp>
#include <impactkit/model.hpp>

namespace impactkit {

/// Vertical travel available before the payload contacts the ground through
/// the compressed frame.
struct PayloadClearance {
  double x_limit = 0.016;  // [m]

  void validate() const {
    if (!(x_limit > 0.0)) {
      throw std::invalid_argument("PayloadClearance: x_limit must be positive");
    }
  }
};

/// Split of the touchdown kinetic energy at the moment of maximum frame
/// compression (non-collided) or at first payload ground contact (collided).
/// Gravity work during compression is excluded from the bookkeeping, so the
/// three components always sum to E_total.
struct EnergyPartition {
  double altitude = 0.0;  // drop height [m]
  double E_total = 0.0;   // kinetic energy at touchdown [J]
  double E_spring = 0.0;  // stored elastically in the frame [J]
  double E_damper = 0.0;  // dissipated by structural damping [J]
  double E_collision = 0.0;  // residual kinetic energy at payload contact [J]
  double frac_spring = 0.0;
  double frac_damper = 0.0;
  double frac_collision = 0.0;
  bool collided = false;
};

namespace detail {

// First time the closed-form trajectory reaches x_limit, refined to 1e-9 s.
// Compression rises monotonically until the peak, so [0, t_peak] brackets the
// crossing whenever the peak is finite. An asymptotic approach (no finite
// peak) is bracketed by doubling out from the natural period; if the limit
// equals the asymptote it is never attained and nullopt is returned.
inline std::optional<double> first_limit_crossing(const ImpactSolution& sol,
                                                  double x_limit,
                                                  const DisplacementPeak& peak) {
  double hi;
  if (peak.t.has_value()) {
    hi = *peak.t;
  } else {
    hi = sol.fast_timescale();
    int doublings = 0;
    while (sol.x(hi) < x_limit) {
      hi *= 2.0;
      if (++doublings > 200) return std::nullopt;
    }
  }
  if (sol.x(hi) < x_limit) return std::nullopt;
  double lo = 0.0;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (sol.x(mid) < x_limit) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Partition the touchdown kinetic energy for a drop from `altitude`.
///
/// Non-collided (peak compression below the clearance): the spring share is
/// the elastic energy at peak compression and the damper takes the remainder.
/// Collided: the trajectory is cut at the first clearance crossing; the
/// remaining kinetic energy there is charged to the collision and the spring
/// holds the elastic energy of a fully used clearance.
///
/// Throws std::domain_error when the bookkeeping produces a negative
/// component. That happens outside the physically sensible regime: drops so
/// shallow that gravity work during compression rivals the touchdown energy,
/// or damping so weak that it cannot cover the gravity work before contact.
inline EnergyPartition partition(const ModelParams& params, double altitude,
                                 const PayloadClearance& clearance = {}) {
  params.validate();
  clearance.validate();
  if (!(altitude > 0.0)) {
    throw std::invalid_argument("partition: altitude must be positive");
  }

  const ImpactInit init = init_from_altitude(params, altitude);
  EnergyPartition out;
  out.altitude = altitude;
  out.E_total = 0.5 * params.m * init.v0 * init.v0;

  const ImpactSolution sol(params, init);
  const DisplacementPeak peak = displacement_peak(params, init);

  std::optional<double> t_contact;
  if (peak.x >= clearance.x_limit) {
    t_contact = detail::first_limit_crossing(sol, clearance.x_limit, peak);
  }

  if (t_contact.has_value()) {
    out.collided = true;
    const double v_contact = sol.v(*t_contact);
    out.E_collision = 0.5 * params.m * v_contact * v_contact;
    out.E_spring = 0.5 * params.k * clearance.x_limit * clearance.x_limit;
    out.E_damper = out.E_total - out.E_collision - out.E_spring;
  } else {
    out.collided = false;
    out.E_collision = 0.0;
    out.E_spring = 0.5 * params.k * peak.x * peak.x;
    out.E_damper = out.E_total - out.E_spring;
  }

  if (out.E_damper < 0.0 || out.E_spring < 0.0 || out.E_collision < 0.0) {
    throw std::domain_error(
        "partition: negative energy component; parameters are outside the "
        "regime where the split is meaningful");
  }

  out.frac_spring = out.E_spring / out.E_total;
  out.frac_damper = out.E_damper / out.E_total;
  out.frac_collision = out.E_collision / out.E_total;
  return out;
}

/// Partition a sweep of drop altitudes. Altitudes must be in ascending order
/// so the output is directly plottable.
inline std::vector<EnergyPartition> extrapolate(
    const ModelParams& params, const std::vector<double>& altitudes,
    const PayloadClearance& clearance = {}) {
  if (altitudes.empty()) {
    throw std::invalid_argument("extrapolate: no altitudes given");
  }
  for (std::size_t i = 1; i < altitudes.size(); ++i) {
    if (altitudes[i] < altitudes[i - 1]) {
      throw std::invalid_argument("extrapolate: altitudes must be ascending");
    }
  }
  std::vector<EnergyPartition> out;
  out.reserve(altitudes.size());
  for (const double h : altitudes) {
    out.push_back(partition(params, h, clearance));
  }
  return out;
}

inline void write_partition_csv(const std::vector<EnergyPartition>& rows,
                                std::ostream& os) {
  os << "altitude_cm,E_total_J,E_spring_J,E_damper_J,E_collision_J,"
        "frac_spring,frac_damper,frac_collision,collided\n";
  for (const EnergyPartition& row : rows) {
    os << detail::to_string_g(row.altitude * 100.0) << ','
       << detail::to_string_g(row.E_total) << ','
       << detail::to_string_g(row.E_spring) << ','
       << detail::to_string_g(row.E_damper) << ','
       << detail::to_string_g(row.E_collision) << ','
       << detail::to_string_g(row.frac_spring) << ','
       << detail::to_string_g(row.frac_damper) << ','
       << detail::to_string_g(row.frac_collision) << ','
       << (row.collided ? 1 : 0) << '\n';
  }
}

}  // namespace impactkit
