#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "deconflict/errors.hpp"
#include "deconflict/vec2.hpp"

namespace deconflict {

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  a = std::fmod(a, 2.0 * pi);
  if (a <= -pi) a += 2.0 * pi;
  if (a > pi) a -= 2.0 * pi;
  return a;
}

/// Initial (uncontrolled) state of one aircraft.
struct AircraftState {
  int id = 0;
  Vec2 position;             ///< NM
  double speed_kn = 0.0;     ///< cruise speed, > 0
  double heading_rad = 0.0;  ///< in (-pi, pi]

  /// Velocity before any control is applied.
  Vec2 initial_velocity() const {
    return {speed_kn * std::cos(heading_rad), speed_kn * std::sin(heading_rad)};
  }
};

/// One aircraft's control, encoded as dx = q cos(theta), dy = q sin(theta)
/// where q is the speed multiplier and theta the heading change. The encoding
/// keeps dx > 0 because |theta| < pi/2 for every admissible control.
struct ControlDecision {
  double dx = 1.0;
  double dy = 0.0;

  double q() const { return std::hypot(dx, dy); }
  double theta() const { return std::atan2(dy, dx); }

  static ControlDecision from_polar(double q, double theta) {
    return {q * std::cos(theta), q * std::sin(theta)};
  }
};

/// The "do nothing" control: q = 1, theta = 0.
inline ControlDecision identity_control() { return {1.0, 0.0}; }

/// Admissible control ranges, shared by every aircraft of an instance.
/// The heading window must straddle zero: the dy box bound
/// q_hi sin(theta_lo) <= dy <= q_hi sin(theta_hi) is only an outer bound when
/// theta_lo <= 0 <= theta_hi.
struct ControlBounds {
  double q_lo = 0.94;
  double q_hi = 1.03;
  double theta_lo = -std::numbers::pi / 6.0;
  double theta_hi = std::numbers::pi / 6.0;

  void validate() const {
    if (!(q_lo > 0.0) || !(q_lo <= q_hi))
      throw InputError("control bounds require 0 < q_lo <= q_hi");
    if (!(theta_lo <= 0.0) || !(theta_hi >= 0.0))
      throw InputError("control bounds require theta_lo <= 0 <= theta_hi");
    if (!(theta_lo > -std::numbers::pi / 2.0) ||
        !(theta_hi < std::numbers::pi / 2.0))
      throw InputError("control bounds require |theta| < pi/2");
  }

  bool contains(const ControlDecision& c, double tol) const {
    const double q = c.q();
    const double th = c.theta();
    return q >= q_lo - tol && q <= q_hi + tol && th >= theta_lo - tol &&
           th <= theta_hi + tol;
  }
};

/// Parameters the generators were called with, echoed into instance files so
/// an instance can be re-derived from its header alone.
struct GeneratorParams {
  int n = 0;
  double radius_nm = 200.0;
  double speed_kn = 500.0;            ///< CP cruise speed
  double speed_min_kn = 486.0;        ///< RCP speed range
  double speed_max_kn = 594.0;
  double heading_jitter_rad = std::numbers::pi / 6.0;  ///< RCP
};

/// A conflict-resolution problem: aircraft states plus the separation norm.
struct ProblemInstance {
  std::string kind = "custom";  ///< "CP", "RCP", or "custom"
  double d_nm = 5.0;            ///< required horizontal separation
  std::uint64_t seed = 0;       ///< RCP generator seed (0 for CP/custom)
  GeneratorParams params;
  std::vector<AircraftState> aircraft;

  int size() const { return static_cast<int>(aircraft.size()); }

  std::string name() const {
    if (kind == "CP") return "CP-" + std::to_string(size());
    if (kind == "RCP")
      return "RCP-" + std::to_string(size()) + "-s" + std::to_string(seed);
    return "custom-" + std::to_string(size());
  }

  /// Checks structural invariants; throws InputError or InitialLossError.
  void validate() const {
    if (aircraft.empty()) throw InputError("instance has no aircraft");
    if (!(d_nm > 0.0)) throw InputError("separation norm must be positive");
    for (int i = 0; i < size(); ++i) {
      const AircraftState& a = aircraft[i];
      if (a.id != i) throw InputError("aircraft ids must be 0..n-1 in order");
      if (!(a.speed_kn > 0.0)) throw InputError("aircraft speed must be > 0");
      if (!(a.heading_rad > -std::numbers::pi) ||
          !(a.heading_rad <= std::numbers::pi))
        throw InputError("aircraft heading must lie in (-pi, pi]");
      if (!std::isfinite(a.position.x) || !std::isfinite(a.position.y))
        throw InputError("aircraft position must be finite");
    }
    for (int i = 0; i < size(); ++i)
      for (int j = i + 1; j < size(); ++j)
        if (norm(aircraft[i].position - aircraft[j].position) < d_nm)
          throw InitialLossError("aircraft " + std::to_string(i) + " and " +
                                 std::to_string(j) +
                                 " are closer than d at t = 0");
  }
};

}  // namespace deconflict
