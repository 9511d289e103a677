#pragma once

#include <cmath>
#include <vector>

namespace deconflict {

struct LinearTerm {
  int index = 0;
  double coeff = 0.0;
};

/// One inequality sum_k coeff_k x_{index_k} <= rhs.
struct LinearRow {
  std::vector<LinearTerm> terms;
  double rhs = 0.0;

  double eval(const std::vector<double>& x) const {
    double s = 0.0;
    for (const LinearTerm& t : terms) s += t.coeff * x[t.index];
    return s;
  }

  /// Divides the row by its largest coefficient magnitude so all rows live on
  /// a comparable scale. No-op for empty/zero rows.
  void normalize() {
    double m = 0.0;
    for (const LinearTerm& t : terms) m = std::max(m, std::abs(t.coeff));
    if (m <= 0.0) return;
    for (LinearTerm& t : terms) t.coeff /= m;
    rhs /= m;
  }
};

/// Disc constraint x_ix^2 + x_iy^2 <= r_sq, optionally relaxed by a phase-1
/// variable t (index t_index, coefficient -1 on the left side).
struct DiscConstraint {
  int ix = 0;
  int iy = 0;
  double r_sq = 0.0;
  int t_index = -1;

  double eval(const std::vector<double>& x) const {
    double f = x[ix] * x[ix] + x[iy] * x[iy] - r_sq;
    if (t_index >= 0) f -= x[t_index];
    return f;
  }
};

/// Inequality-form convex quadratic program
///   minimize 0.5 sum_k q_diag_k x_k^2 + c.x + c0
///   subject to every LinearRow and DiscConstraint.
/// The objective Hessian is diagonal by construction (the deviation cost is
/// separable) which keeps the Newton systems small and definite.
struct ConvexQP {
  int num_vars = 0;
  std::vector<double> q_diag;
  std::vector<double> c;
  double c0 = 0.0;
  std::vector<LinearRow> rows;
  std::vector<DiscConstraint> discs;

  /// Grows (or shrinks) the variable count, keeping existing objective
  /// entries; new variables start with zero cost.
  void resize(int n) {
    num_vars = n;
    q_diag.resize(n, 0.0);
    c.resize(n, 0.0);
  }

  int num_constraints() const {
    return static_cast<int>(rows.size() + discs.size());
  }

  double objective(const std::vector<double>& x) const {
    double val = c0;
    for (int k = 0; k < num_vars; ++k)
      val += 0.5 * q_diag[k] * x[k] * x[k] + c[k] * x[k];
    return val;
  }

  /// f_i(x) for the i-th constraint, rows first then discs.
  double constraint_value(int i, const std::vector<double>& x) const {
    const int nr = static_cast<int>(rows.size());
    if (i < nr) return rows[i].eval(x) - rows[i].rhs;
    return discs[i - nr].eval(x);
  }

  /// Largest positive constraint violation.
  double max_violation(const std::vector<double>& x) const {
    double v = 0.0;
    for (int i = 0; i < num_constraints(); ++i)
      v = std::max(v, constraint_value(i, x));
    return v;
  }
};

}  // namespace deconflict
