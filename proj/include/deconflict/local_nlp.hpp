#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "deconflict/relaxations.hpp"

namespace deconflict {

enum class LocalStatus {
  converged,      ///< feasible and the outer loop stalled on the objective
  feasible_point, ///< feasible iterate found but outer loop hit its cap
  no_solution,    ///< no iterate satisfied the ring within tolerance
};

struct LocalNlpOptions {
  double feasibility_tol = 1e-9;
  double penalty_initial = 10.0;
  double penalty_growth = 10.0;
  double violation_decrease = 0.25;  ///< required per-outer shrink factor
  int max_outer = 6;
  int max_restarts = 3;
  IpmOptions ipm;
};

struct LocalNlpSolution {
  LocalStatus status = LocalStatus::no_solution;
  bool has_solution = false;
  std::vector<ControlDecision> controls;
  double objective = std::numeric_limits<double>::infinity();
  double max_ring_violation = std::numeric_limits<double>::infinity();
  int outer_iterations = 0;
  int restarts_used = 0;
};

namespace nlp_detail {

/// Ring lower-bound value c_a = q_lo^2 - |delta_a|^2 (feasible when <= 0).
inline double ring_lower_value(const ControlDecision& c, double q_lo_sq) {
  return q_lo_sq - (c.dx * c.dx + c.dy * c.dy);
}

inline double max_ring_violation(const std::vector<ControlDecision>& controls,
                                 double q_lo_sq) {
  double v = 0.0;
  for (const ControlDecision& c : controls)
    v = std::max(v, ring_lower_value(c, q_lo_sq));
  return v;
}

/// True when x satisfies every base constraint and the ring lower bound.
inline bool is_feasible(const ConvexQP& base,
                        const std::vector<ControlDecision>& controls,
                        const std::vector<double>& x, double q_lo_sq,
                        double tol) {
  return base.max_violation(x) <= tol &&
         max_ring_violation(controls, q_lo_sq) <= tol;
}

}  // namespace nlp_detail

/// Local solver for the fixed-branch model including the nonconvex lower
/// speed ring q_lo^2 <= dx^2 + dy^2.
///
/// Augmented Lagrangian outer loop: the ring constraint is linearized at the
/// current iterate and relaxed with a slack u_a >= 0 that is penalized by
/// lambda_a u_a + rho/2 u_a^2; every inner problem is a convex QP. Because
/// the ring function is concave, its linearization overestimates it, so an
/// inner iterate with u = 0 is exactly feasible, not just feasible for the
/// approximation. Multipliers follow the standard update
/// lambda_a <- max(0, lambda_a + rho c_a(x)) and rho grows tenfold whenever
/// an outer round fails to cut the worst violation by 4x.
///
/// Starts from `start` (identity controls when absent), then retries from a
/// ring projection of the start and from identity, all deterministic. When
/// the start itself is feasible it seeds the incumbent, so the result is
/// never worse than a feasible start.
inline LocalNlpSolution solve_local_nlp(
    const RelaxedModel& model, const LocalNlpOptions& opts = {},
    const std::vector<ControlDecision>* start = nullptr) {
  if (!model.has_ring_lower)
    throw InternalError("solve_local_nlp requires a model with the lower ring");
  const int n = model.num_aircraft();
  const double q_lo_sq = model.bounds.q_lo * model.bounds.q_lo;

  const ConvexQP base = lower_to_qp(model, model.z_fixed);
  const int nx = base.num_vars;  // controls only: ub_nlp has no envelope

  LocalNlpSolution out;
  auto consider = [&](const std::vector<ControlDecision>& controls,
                      const std::vector<double>& x) {
    if (!nlp_detail::is_feasible(base, controls, x, q_lo_sq,
                                 opts.feasibility_tol))
      return;
    const double obj = deviation_cost(controls);
    if (obj < out.objective) {
      out.has_solution = true;
      out.objective = obj;
      out.controls = controls;
      out.max_ring_violation =
          nlp_detail::max_ring_violation(controls, q_lo_sq);
    }
  };

  std::vector<ControlDecision> start_controls(n, identity_control());
  if (start != nullptr && static_cast<int>(start->size()) == n)
    start_controls = *start;

  auto to_x = [&](const std::vector<ControlDecision>& controls) {
    std::vector<double> x(nx, 0.0);
    for (int a = 0; a < n; ++a) {
      x[2 * a] = controls[a].dx;
      x[2 * a + 1] = controls[a].dy;
    }
    return x;
  };
  consider(start_controls, to_x(start_controls));

  // Restart ladder: the given start, its projection onto the speed annulus,
  // then identity. Later entries only run while no attempt has converged.
  std::vector<std::vector<ControlDecision>> attempts;
  attempts.push_back(start_controls);
  {
    std::vector<ControlDecision> projected = start_controls;
    for (ControlDecision& c : projected) {
      const double q = c.q();
      const double target =
          std::clamp(q, model.bounds.q_lo, model.bounds.q_hi);
      if (q > 1e-12) {
        c.dx *= target / q;
        c.dy *= target / q;
      } else {
        c = identity_control();
      }
    }
    attempts.push_back(std::move(projected));
  }
  attempts.push_back(std::vector<ControlDecision>(n, identity_control()));
  const int max_attempts =
      std::min<int>(static_cast<int>(attempts.size()), 1 + opts.max_restarts);

  bool converged = false;
  for (int attempt = 0; attempt < max_attempts && !converged; ++attempt) {
    out.restarts_used = attempt;
    std::vector<ControlDecision> lin_point = attempts[attempt];
    std::vector<double> warm = to_x(lin_point);
    warm.resize(nx + n, 0.0);
    std::vector<double> lambda(n, 0.0);
    double rho = opts.penalty_initial;
    double prev_violation = std::numeric_limits<double>::infinity();
    double prev_objective = std::numeric_limits<double>::infinity();

    for (int outer = 0; outer < opts.max_outer; ++outer) {
      ++out.outer_iterations;

      ConvexQP qp = base;
      qp.resize(nx + n);
      for (int a = 0; a < n; ++a) {
        const int u = nx + a;
        qp.q_diag[u] = rho;
        qp.c[u] = lambda[a];
        // Linearized ring at lin_point: q_lo^2 + |d^|^2 - 2 d^ . d <= u.
        const ControlDecision& h = lin_point[a];
        const double h_sq = h.dx * h.dx + h.dy * h.dy;
        qp.rows.push_back({{{2 * a, -2.0 * h.dx},
                            {2 * a + 1, -2.0 * h.dy},
                            {u, -1.0}},
                           -(q_lo_sq + h_sq)});
        qp.rows.push_back({{{u, -1.0}}, 0.0});
      }

      const SubproblemSolution inner = solve_convex_qp(qp, opts.ipm, &warm);
      if (inner.status == SubproblemStatus::infeasible) {
        // The slacks make the linearization always satisfiable, so this
        // certifies the fixed-branch base model itself; no restart can help.
        out.status =
            out.has_solution ? LocalStatus::feasible_point
                             : LocalStatus::no_solution;
        return out;
      }
      if (static_cast<int>(inner.x.size()) != nx + n) break;

      warm = inner.x;
      for (int a = 0; a < n; ++a) {
        lin_point[a].dx = inner.x[2 * a];
        lin_point[a].dy = inner.x[2 * a + 1];
      }
      std::vector<double> x_controls(inner.x.begin(), inner.x.begin() + nx);
      consider(lin_point, x_controls);

      const double violation =
          nlp_detail::max_ring_violation(lin_point, q_lo_sq);
      const double objective = deviation_cost(lin_point);
      if (violation <= opts.feasibility_tol &&
          std::abs(objective - prev_objective) <=
              1e-9 * std::max(1.0, std::abs(objective))) {
        converged = true;
        break;
      }
      for (int a = 0; a < n; ++a)
        lambda[a] = std::max(
            0.0, lambda[a] +
                     rho * nlp_detail::ring_lower_value(lin_point[a], q_lo_sq));
      if (violation > opts.violation_decrease * prev_violation)
        rho *= opts.penalty_growth;
      prev_violation = violation;
      prev_objective = objective;
    }
  }

  if (out.has_solution)
    out.status =
        converged ? LocalStatus::converged : LocalStatus::feasible_point;
  else
    out.status = LocalStatus::no_solution;
  return out;
}

}  // namespace deconflict
