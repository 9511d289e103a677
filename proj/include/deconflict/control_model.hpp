#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "deconflict/aircraft.hpp"
#include "deconflict/geometry.hpp"

namespace deconflict {

/// Axis-aligned outer box for one aircraft's control (dx, dy):
///   q_lo cos(max{|theta_lo|, |theta_hi|}) <= dx <= q_hi
///   q_hi sin(theta_lo) <= dy <= q_hi sin(theta_hi)
/// Valid because the heading window straddles zero (see ControlBounds).
struct ControlBox {
  double dx_lo = 0.0;
  double dx_hi = 0.0;
  double dy_lo = 0.0;
  double dy_hi = 0.0;
};

inline ControlBox box_bounds(double q_lo, double q_hi, double theta_lo,
                             double theta_hi) {
  const double theta_max = std::max(std::abs(theta_lo), std::abs(theta_hi));
  return {q_lo * std::cos(theta_max), q_hi, q_hi * std::sin(theta_lo),
          q_hi * std::sin(theta_hi)};
}

inline ControlBox box_bounds(const ControlBounds& b) {
  return box_bounds(b.q_lo, b.q_hi, b.theta_lo, b.theta_hi);
}

/// Total deviation cost sum_i dy_i^2 + (1 - dx_i)^2. Zero exactly at the
/// identity controls; convex separable quadratic.
inline double deviation_cost(const std::vector<ControlDecision>& controls) {
  double cost = 0.0;
  for (const ControlDecision& c : controls)
    cost += c.dy * c.dy + (1.0 - c.dx) * (1.0 - c.dx);
  return cost;
}

/// Linear form c_ix dx_i + c_iy dy_i + c_jx dx_j + c_jy dy_j over the control
/// variables of one pair. The relative velocity is linear in the controls, so
/// every plane/tangent constraint compiles to one of these.
struct PairLinearForm {
  int i = 0;
  int j = 1;
  double c_ix = 0.0;
  double c_iy = 0.0;
  double c_jx = 0.0;
  double c_jy = 0.0;

  double eval(ControlDecision ci, ControlDecision cj) const {
    return c_ix * ci.dx + c_iy * ci.dy + c_jx * cj.dx + c_jy * cj.dy;
  }

  /// Largest coefficient magnitude; used to scale residual checks.
  double scale() const {
    return std::max({std::abs(c_ix), std::abs(c_iy), std::abs(c_jx),
                     std::abs(c_jy), 1e-30});
  }

  /// Exact maximum over the control box (interval arithmetic).
  double max_over_box(const ControlBox& box) const {
    auto hi = [](double c, double lo, double up) {
      return std::max(c * lo, c * up);
    };
    return hi(c_ix, box.dx_lo, box.dx_hi) + hi(c_iy, box.dy_lo, box.dy_hi) +
           hi(c_jx, box.dx_lo, box.dx_hi) + hi(c_jy, box.dy_lo, box.dy_hi);
  }
};

/// One pair's compiled disjunction. Exactly one branch must hold:
///   z = 1:  N <= 0  and  L_l <= 0
///   z = 0:  N >= 0  and  L_u >= 0
/// In the mixed-integer model the branches relax to
///   N <= M_n (1 - z),  -N <= M_n z,  L_l <= M_l (1 - z),  -L_u <= M_u z
/// with each big-M large enough to free the inactive branch over the whole
/// control box.
struct DisjunctiveConstraintPair {
  PairGeometry geometry;
  PairLinearForm n_form;  ///< N(v_ij) as a function of the four controls
  PairLinearForm l_form;  ///< L_l(v_ij)
  PairLinearForm u_form;  ///< L_u(v_ij)
  double big_m_n = 0.0;   ///< all strictly positive
  double big_m_l = 0.0;
  double big_m_u = 0.0;
  double g_identity = 0.0;  ///< g under identity controls; < 0 iff converging
                            ///< pairs violate separation (conflict severity)
};

namespace detail {

/// Compiles a velocity-space form a*vx + b*vy into control coefficients using
/// v_ij = V_i vhat_i - V_j vhat_j (complex product = scale and rotate):
///   vx =  C_i dx_i - S_i dy_i - C_j dx_j + S_j dy_j
///   vy =  S_i dx_i + C_i dy_i - S_j dx_j - C_j dy_j
/// with C = speed cos(heading), S = speed sin(heading).
inline PairLinearForm compile_velocity_form(const AircraftState& ai,
                                            const AircraftState& aj, double a,
                                            double b) {
  const double ci = ai.speed_kn * std::cos(ai.heading_rad);
  const double si = ai.speed_kn * std::sin(ai.heading_rad);
  const double cj = aj.speed_kn * std::cos(aj.heading_rad);
  const double sj = aj.speed_kn * std::sin(aj.heading_rad);
  PairLinearForm f;
  f.i = ai.id;
  f.j = aj.id;
  f.c_ix = a * ci + b * si;
  f.c_iy = -a * si + b * ci;
  f.c_jx = -(a * cj + b * sj);
  f.c_jy = a * sj - b * cj;
  return f;
}

inline double big_m_for(const PairLinearForm& f, const ControlBox& box) {
  PairLinearForm neg = f;
  neg.c_ix = -f.c_ix;
  neg.c_iy = -f.c_iy;
  neg.c_jx = -f.c_jx;
  neg.c_jy = -f.c_jy;
  const double max_abs = std::max(f.max_over_box(box), neg.max_over_box(box));
  return 1.01 * std::max(max_abs, 1e-6);
}

}  // namespace detail

struct DisjunctionOptions {
  /// Skip pairs that diverge under every admissible control (their disjunction
  /// is vacuously satisfiable). Off by default: the model then carries every
  /// pair, matching the plain formulation.
  bool prune_always_diverging = false;
};

/// Compiles the pairwise disjunctions for all i < j in lexicographic order.
inline std::vector<DisjunctiveConstraintPair> build_disjunctions(
    const ProblemInstance& inst, const ControlBounds& bounds,
    const DisjunctionOptions& opts = {}) {
  bounds.validate();
  const ControlBox box = box_bounds(bounds);
  const int n = inst.size();
  std::vector<DisjunctiveConstraintPair> out;
  out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const AircraftState& ai = inst.aircraft[i];
      const AircraftState& aj = inst.aircraft[j];
      const Vec2 p_hat = ai.position - aj.position;
      DisjunctiveConstraintPair pair;
      pair.geometry = tangent_halfplanes(p_hat, inst.d_nm, i, j);
      // N(v) = xh vy - yh vx; L(v) = alpha vy - beta vx.
      pair.n_form = detail::compile_velocity_form(ai, aj, -p_hat.y, p_hat.x);
      pair.l_form = detail::compile_velocity_form(
          ai, aj, -pair.geometry.l.y, pair.geometry.l.x);
      pair.u_form = detail::compile_velocity_form(
          ai, aj, -pair.geometry.u.y, pair.geometry.u.x);
      pair.big_m_n = detail::big_m_for(pair.n_form, box);
      pair.big_m_l = detail::big_m_for(pair.l_form, box);
      pair.big_m_u = detail::big_m_for(pair.u_form, box);
      const Vec2 v0 = relative_velocity(ai, aj, identity_control(),
                                        identity_control());
      pair.g_identity = g_value(p_hat, inst.d_nm, v0);
      if (opts.prune_always_diverging) {
        // p.v as a linear form over controls; min over the box >= 0 means the
        // pair diverges no matter what is flown.
        const PairLinearForm pv =
            detail::compile_velocity_form(ai, aj, p_hat.x, p_hat.y);
        PairLinearForm neg = pv;
        neg.c_ix = -pv.c_ix;
        neg.c_iy = -pv.c_iy;
        neg.c_jx = -pv.c_jx;
        neg.c_jy = -pv.c_jy;
        if (-neg.max_over_box(box) >= 0.0) continue;
      }
      out.push_back(pair);
    }
  }
  return out;
}

}  // namespace deconflict
