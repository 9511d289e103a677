#pragma once

#include <cmath>
#include <vector>

#include "deconflict/aircraft.hpp"
#include "deconflict/errors.hpp"
#include "deconflict/vec2.hpp"

namespace deconflict {

/// Absolute tolerance for boundary comparisons on unit-scaled quantities.
inline constexpr double kGeomTol = 1e-9;

/// Squared-distance-over-time polynomial f(t) = a t^2 + b t + c for one pair:
/// a = |v|^2, b = 2 p.v, c = |p|^2 - d^2 with p the relative position, v the
/// relative velocity and d the separation norm. Separation holds at time t
/// iff f(t) >= 0.
struct SeparationPolynomial {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double eval(double t) const { return (a * t + b) * t + c; }
};

inline SeparationPolynomial separation_polynomial(Vec2 p_hat, Vec2 v,
                                                  double d) {
  return {norm_sq(v), 2.0 * dot(p_hat, v), norm_sq(p_hat) - d * d};
}

/// Velocity of one aircraft under a control: speed_kn * R(heading) (dx, dy).
inline Vec2 controlled_velocity(const AircraftState& a, ControlDecision c) {
  return a.speed_kn * rotate({c.dx, c.dy}, a.heading_rad);
}

/// Relative velocity of i with respect to j under the given controls.
inline Vec2 relative_velocity(const AircraftState& i, const AircraftState& j,
                              ControlDecision ci, ControlDecision cj) {
  return controlled_velocity(i, ci) - controlled_velocity(j, cj);
}

/// Time that minimizes the pair distance, t = -(p.v)/|v|^2. Negative when the
/// pair is already diverging. Throws ZeroRelativeVelocityError when |v|^2 is
/// below 1e-12 and the minimizer is undefined; such pairs keep their initial
/// distance forever and are conflict-free iff initially separated.
inline double time_of_min_separation(Vec2 p_hat, Vec2 v) {
  const double v2 = norm_sq(v);
  if (v2 < 1e-12)
    throw ZeroRelativeVelocityError(
        "relative velocity too small for a minimum-separation time");
  return -dot(p_hat, v) / v2;
}

/// Separation certificate
///   g(v) = vx^2 (yh^2 - d^2) + vy^2 (xh^2 - d^2) - 2 xh yh vx vy
/// with (xh, yh) = p_hat. Identity: g = |v|^2 f(t_min) = |v|^2 |p|^2 sin^2 -
/// ..., so for a converging pair g >= 0 iff minimum separation >= d.
inline double g_value(Vec2 p_hat, double d, Vec2 v) {
  const double d2 = d * d;
  return v.x * v.x * (p_hat.y * p_hat.y - d2) +
         v.y * v.y * (p_hat.x * p_hat.x - d2) -
         2.0 * p_hat.x * p_hat.y * v.x * v.y;
}

/// True iff the pair never gets closer than d for t >= 0:
/// diverging (p.v >= 0) or certified separated (g >= 0). Comparisons use
/// kGeomTol on unit-scaled quantities. Precondition: |p_hat| >= d.
inline bool is_pair_conflict_free(Vec2 p_hat, double d, Vec2 v) {
  const double p2 = norm_sq(p_hat);
  const double v2 = norm_sq(v);
  if (v2 < 1e-12) return true;  // keeps its initial (separated) distance
  const double diverging = dot(p_hat, v) / std::sqrt(p2 * v2);
  if (diverging >= -kGeomTol) return true;
  return g_value(p_hat, d, v) / (p2 * v2) >= -kGeomTol;
}

/// Collision-cone boundary data for an ordered pair (i, j).
///
/// The conflict-free velocities {g >= 0} u {p.v >= 0} split along the plane
/// N(v) = cross(p_hat, v) into two convex cones, each bounded by one tangent
/// line of the protected disk:
///   z = 1 branch: N(v) <= 0 and L_l(v) = cross(l, v) <= 0
///   z = 0 branch: N(v) >= 0 and L_u(v) = cross(u, v) >= 0
/// with l = R(+phi) p_hat, u = R(-phi) p_hat and phi = arcsin(d / |p_hat|).
/// Rotating +p_hat (not -p_hat) picks the ray representative of each tangent
/// line that makes the inequality senses above carve out exactly the
/// conflict-free side; both l and u are roots of g.
struct PairGeometry {
  int i = 0;
  int j = 1;
  Vec2 p_hat;       ///< relative initial position, position(i) - position(j)
  double d = 0.0;   ///< separation norm
  double e = 0.0;   ///< sqrt(|p_hat|^2 - d^2)
  double phi = 0.0; ///< collision-cone half angle, in [0, pi/2]
  Vec2 l;           ///< (alpha_l, beta_l), z = 1 tangent coefficients
  Vec2 u;           ///< (alpha_u, beta_u), z = 0 tangent coefficients
};

/// Builds the tangent half-plane data for one pair.
/// Precondition: |p_hat| >= d (enforced; throws InitialLossError).
inline PairGeometry tangent_halfplanes(Vec2 p_hat, double d, int i = 0,
                                       int j = 1) {
  const double p = norm(p_hat);
  if (p < d) throw InitialLossError("pair starts closer than d");
  PairGeometry out;
  out.i = i;
  out.j = j;
  out.p_hat = p_hat;
  out.d = d;
  out.e = std::sqrt(std::max(0.0, norm_sq(p_hat) - d * d));
  out.phi = std::asin(std::min(1.0, d / p));
  out.l = rotate(p_hat, out.phi);
  out.u = rotate(p_hat, -out.phi);
  return out;
}

/// N(v) = xh vy - yh vx: the separating plane between the two branches.
inline double plane_n(const PairGeometry& pg, Vec2 v) {
  return cross(pg.p_hat, v);
}

/// L_l(v) = alpha_l vy - beta_l vx, constrained <= 0 on the z = 1 branch.
inline double line_l(const PairGeometry& pg, Vec2 v) { return cross(pg.l, v); }

/// L_u(v) = alpha_u vy - beta_u vx, constrained >= 0 on the z = 0 branch.
inline double line_u(const PairGeometry& pg, Vec2 v) { return cross(pg.u, v); }

/// Membership of v in one branch of the disjunction, with kGeomTol slack on
/// unit-scaled quantities.
inline bool branch_feasible(const PairGeometry& pg, Vec2 v, int z) {
  const double scale = norm(pg.p_hat) * norm(v);
  if (scale < 1e-12) return true;
  const double n = plane_n(pg, v) / scale;
  if (z == 1) return n <= kGeomTol && line_l(pg, v) / scale <= kGeomTol;
  return n >= -kGeomTol && line_u(pg, v) / scale >= -kGeomTol;
}

/// Closest approach margin over t >= 0, in NM: min distance minus d.
/// Negative values mean the pair loses separation.
inline double pair_margin(Vec2 p_hat, double d, Vec2 v) {
  const double v2 = norm_sq(v);
  const double p2 = norm_sq(p_hat);
  if (v2 < 1e-12) return std::sqrt(p2) - d;
  const double t_min = -dot(p_hat, v) / v2;
  if (t_min <= 0.0) return std::sqrt(p2) - d;
  const double pv = dot(p_hat, v);
  const double min_dist_sq = std::max(0.0, p2 - pv * pv / v2);
  return std::sqrt(min_dist_sq) - d;
}

/// Number of pairs in conflict under the given controls (identity controls =
/// the instance's initial conflict count n_c). Throws InitialLossError if any
/// pair starts closer than d.
inline int count_conflicts(const ProblemInstance& inst,
                           const std::vector<ControlDecision>& controls) {
  const int n = inst.size();
  int count = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec2 p_hat = inst.aircraft[i].position - inst.aircraft[j].position;
      if (norm(p_hat) < inst.d_nm)
        throw InitialLossError("pair (" + std::to_string(i) + ", " +
                               std::to_string(j) + ") starts closer than d");
      const Vec2 v = relative_velocity(inst.aircraft[i], inst.aircraft[j],
                                       controls[i], controls[j]);
      if (!is_pair_conflict_free(p_hat, inst.d_nm, v)) ++count;
    }
  }
  return count;
}

inline int count_conflicts(const ProblemInstance& inst) {
  return count_conflicts(
      inst, std::vector<ControlDecision>(inst.size(), identity_control()));
}

}  // namespace deconflict
