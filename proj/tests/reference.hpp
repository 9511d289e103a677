#pragma once

// Slow reference implementations, independent of the library code they are
// used to check. Everything here favors transparency over speed.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "deconflict/deconflict.hpp"

namespace reference {

/// Minimum pair distance over t >= 0 by time stepping. The squared distance
/// is sampled on a uniform grid that brackets the approach, then the minimum
/// is refined by fitting a quadratic through the three samples around the
/// best one (the squared distance is exactly quadratic in t, so the fit is
/// exact up to roundoff).
inline double min_distance_simulated(deconflict::Vec2 p0, deconflict::Vec2 v,
                                     int samples = 2000) {
  using deconflict::dot;
  using deconflict::norm;
  using deconflict::norm_sq;
  const double v2 = norm_sq(v);
  if (v2 < 1e-18 || dot(p0, v) >= 0.0) return norm(p0);
  const double t_end = 2.0 * (-dot(p0, v)) / v2;  // twice the approach time
  const double h = t_end / samples;
  auto dist_sq = [&](double t) {
    const deconflict::Vec2 p{p0.x + v.x * t, p0.y + v.y * t};
    return norm_sq(p);
  };
  int best = 0;
  double best_val = dist_sq(0.0);
  for (int k = 1; k <= samples; ++k) {
    const double val = dist_sq(k * h);
    if (val < best_val) {
      best_val = val;
      best = k;
    }
  }
  if (best == 0 || best == samples) return std::sqrt(best_val);
  // Exact vertex of the parabola through (t_{k-1}, t_k, t_{k+1}).
  const double f0 = dist_sq((best - 1) * h);
  const double f1 = best_val;
  const double f2 = dist_sq((best + 1) * h);
  const double denom = f0 - 2.0 * f1 + f2;
  if (denom <= 0.0) return std::sqrt(best_val);
  const double t_star = (best + 0.5 * (f0 - f2) / denom) * h;
  return std::sqrt(std::min(best_val, dist_sq(t_star)));
}

/// Conflict decision by simulation: closest approach at least d.
inline double margin_simulated(deconflict::Vec2 p0, double d,
                               deconflict::Vec2 v, int samples = 2000) {
  return min_distance_simulated(p0, v, samples) - d;
}

/// Zooming grid search for the cheapest feasible pair of controls of a
/// two-aircraft problem, parameterized in polar form. `feasible(ci, cj)`
/// decides admissibility; the deviation objective is fixed. Each level
/// shrinks the search window around the incumbent.
template <typename Feasible>
inline double polar_grid_minimum(const deconflict::ControlBounds& b,
                                 Feasible&& feasible, int pts = 11,
                                 int levels = 5) {
  using deconflict::ControlDecision;
  std::array<double, 2> q_c = {0.5 * (b.q_lo + b.q_hi),
                               0.5 * (b.q_lo + b.q_hi)};
  std::array<double, 2> th_c = {0.5 * (b.theta_lo + b.theta_hi),
                                0.5 * (b.theta_lo + b.theta_hi)};
  double q_hw = 0.5 * (b.q_hi - b.q_lo);
  double th_hw = 0.5 * (b.theta_hi - b.theta_lo);
  double best = std::numeric_limits<double>::infinity();
  std::array<double, 4> best_arg{q_c[0], th_c[0], q_c[1], th_c[1]};

  for (int level = 0; level < levels; ++level) {
    for (int a = 0; a < pts; ++a) {
      for (int b2 = 0; b2 < pts; ++b2) {
        for (int c = 0; c < pts; ++c) {
          for (int e = 0; e < pts; ++e) {
            auto coord = [&](double center, double hw, int k, double lo,
                             double hi) {
              const double raw =
                  center + hw * (2.0 * k / (pts - 1) - 1.0);
              return std::min(hi, std::max(lo, raw));
            };
            const double qi = coord(q_c[0], q_hw, a, b.q_lo, b.q_hi);
            const double ti = coord(th_c[0], th_hw, b2, b.theta_lo, b.theta_hi);
            const double qj = coord(q_c[1], q_hw, c, b.q_lo, b.q_hi);
            const double tj = coord(th_c[1], th_hw, e, b.theta_lo, b.theta_hi);
            const ControlDecision ci = ControlDecision::from_polar(qi, ti);
            const ControlDecision cj = ControlDecision::from_polar(qj, tj);
            if (!feasible(ci, cj)) continue;
            const double cost = deconflict::deviation_cost({ci, cj});
            if (cost < best) {
              best = cost;
              best_arg = {qi, ti, qj, tj};
            }
          }
        }
      }
    }
    q_c = {best_arg[0], best_arg[2]};
    th_c = {best_arg[1], best_arg[3]};
    q_hw = std::max(q_hw * 2.0 / (pts - 1), 1e-9);
    th_hw = std::max(th_hw * 2.0 / (pts - 1), 1e-9);
  }
  return best;
}

/// Exact minimizer of a convex QP with linear rows only, by enumerating
/// candidate active sets and solving each KKT equality system. Exponential,
/// fine for the small random problems it is used on. Returns +infinity when
/// no candidate satisfies primal and dual feasibility (infeasible problem).
inline double qp_active_set_minimum(const deconflict::ConvexQP& qp) {
  const int n = qp.num_vars;
  const int m = static_cast<int>(qp.rows.size());
  double best = std::numeric_limits<double>::infinity();

  std::vector<int> subset;
  auto try_subset = [&] {
    const int k = static_cast<int>(subset.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + k);
    for (int i = 0; i < n; ++i) {
      kkt(i, i) = qp.q_diag[i];
      rhs(i) = -qp.c[i];
    }
    for (int r = 0; r < k; ++r) {
      const deconflict::LinearRow& row = qp.rows[subset[r]];
      for (const deconflict::LinearTerm& t : row.terms) {
        kkt(t.index, n + r) += t.coeff;
        kkt(n + r, t.index) += t.coeff;
      }
      rhs(n + r) = row.rhs;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) return;
    const Eigen::VectorXd sol = lu.solve(rhs);
    for (int r = 0; r < k; ++r)
      if (sol(n + r) < -1e-9) return;  // dual infeasible
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = sol(i);
    for (const deconflict::LinearRow& row : qp.rows)
      if (row.eval(x) > row.rhs + 1e-9) return;  // primal infeasible
    best = std::min(best, qp.objective(x));
  };

  // All subsets of rows with size <= n, including the empty set.
  const int limit = 1 << m;
  for (int mask = 0; mask < limit; ++mask) {
    if (__builtin_popcount(static_cast<unsigned>(mask)) > n) continue;
    subset.clear();
    for (int r = 0; r < m; ++r)
      if (mask & (1 << r)) subset.push_back(r);
    try_subset();
  }
  return best;
}

/// Global reference for small disjunctive models: solve every one of the 2^k
/// branch assignments and keep the best.
struct EnumerationResult {
  bool feasible = false;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<int> z;
  std::vector<deconflict::ControlDecision> controls;
};

inline EnumerationResult enumerate_assignments(
    const deconflict::RelaxedModel& model,
    const deconflict::IpmOptions& ipm = {}) {
  const int np = model.num_pairs();
  EnumerationResult out;
  std::vector<int> z(np, 0);
  const long total = 1L << np;
  for (long mask = 0; mask < total; ++mask) {
    for (int p = 0; p < np; ++p) z[p] = (mask >> p) & 1 ? 1 : 0;
    const deconflict::SubproblemSolution sol =
        deconflict::solve_convex_subproblem(model, z, ipm);
    if (sol.status != deconflict::SubproblemStatus::optimal) continue;
    if (sol.objective < out.objective) {
      out.feasible = true;
      out.objective = sol.objective;
      out.z = z;
      out.controls = deconflict::controls_from_x(model, sol.x);
    }
  }
  return out;
}

}  // namespace reference
