#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "deconflict/aircraft.hpp"
#include "deconflict/control_model.hpp"
#include "deconflict/convex_qp.hpp"
#include "deconflict/errors.hpp"
#include "deconflict/interior_point.hpp"

namespace deconflict {

enum class EnvelopeVariant { verbatim, qbar };

/// Upper secant bound var_tilde <= slope * var + intercept.
struct SecantLine {
  double slope = 0.0;
  double intercept = 0.0;

  double eval(double v) const { return slope * v + intercept; }
};

/// Convex outer envelope of the nonconvex speed ring lower bound
/// q_lo^2 <= dx^2 + dy^2. Auxiliary variables dt_x, dt_y >= 0 stand in for
/// the squares:
///   q_lo^2 <= dt_x + dt_y,   dt_x <= secant_x(dx),   dt_y <= secant_y(dy).
/// secant_x is the chord of x^2 over [q_lo cos(theta_max), 1] (verbatim
/// variant) or [q_lo cos(theta_max), q_hi] (qbar variant); secant_y is the
/// chord of y^2 over the dy box [q_hi sin(theta_lo), q_hi sin(theta_hi)].
struct HullEnvelope {
  SecantLine secant_x;
  SecantLine secant_y;
  double q_lo_sq = 0.0;
};

/// Chord of the parabola v^2 through v = a and v = b.
inline SecantLine parabola_secant(double a, double b) {
  return {a + b, -a * b};
}

inline HullEnvelope hull_envelope(const ControlBounds& b,
                                  EnvelopeVariant variant =
                                      EnvelopeVariant::verbatim) {
  const double theta_max = std::max(std::abs(b.theta_lo), std::abs(b.theta_hi));
  const double qc = b.q_lo * std::cos(theta_max);
  HullEnvelope env;
  env.secant_x = variant == EnvelopeVariant::verbatim
                     ? parabola_secant(qc, 1.0)
                     : parabola_secant(qc, b.q_hi);
  env.secant_y =
      parabola_secant(b.q_hi * std::sin(b.theta_lo), b.q_hi * std::sin(b.theta_hi));
  env.q_lo_sq = b.q_lo * b.q_lo;
  return env;
}

enum class ModelKind { lb_miqp, lb_miqcp, ub_nlp };

/// A relaxation (or the fixed-branch restriction) of the conflict-resolution
/// model, kept in structured form. Lowering to a ConvexQP happens per solve
/// so branch-and-bound nodes can fix z subsets cheaply.
struct RelaxedModel {
  ModelKind kind = ModelKind::lb_miqp;
  ProblemInstance instance;
  ControlBounds bounds;
  ControlBox box;
  HullEnvelope envelope;         // lb kinds only
  bool has_envelope = false;
  bool has_ring_upper = false;   // lb_miqcp, ub_nlp
  bool has_ring_lower = false;   // ub_nlp (handled by the local NLP solver)
  std::vector<DisjunctiveConstraintPair> pairs;
  std::vector<int> z_fixed;      // per pair: -1 free, else 0/1

  int num_aircraft() const { return instance.size(); }
  int num_pairs() const { return static_cast<int>(pairs.size()); }

  // Variable layout of the lowered QP:
  //   controls: dx_a = 2a, dy_a = 2a + 1
  //   envelope: dt_x_a = 2n + 2a, dt_y_a = 2n + 2a + 1 (lb kinds)
  //   one z per *free* pair, appended in pair order.
  int control_var_count() const { return 2 * num_aircraft(); }
  int fixed_var_count() const {
    return control_var_count() + (has_envelope ? 2 * num_aircraft() : 0);
  }
};

struct BuildOptions {
  EnvelopeVariant envelope = EnvelopeVariant::verbatim;
  DisjunctionOptions disjunctions;
};

namespace relax_detail {

inline RelaxedModel build_common(const ProblemInstance& inst,
                                 const ControlBounds& bounds,
                                 const BuildOptions& opts, ModelKind kind) {
  inst.validate();
  bounds.validate();
  RelaxedModel m;
  m.kind = kind;
  m.instance = inst;
  m.bounds = bounds;
  m.box = box_bounds(bounds);
  m.pairs = build_disjunctions(inst, bounds, opts.disjunctions);
  m.z_fixed.assign(m.pairs.size(), -1);
  return m;
}

}  // namespace relax_detail

/// Lower bounding MIQP: deviation objective, control box, heading cone,
/// pairwise disjunctions, hull envelope. No speed ring at all.
inline RelaxedModel build_lb_miqp(const ProblemInstance& inst,
                                  const ControlBounds& bounds,
                                  const BuildOptions& opts = {}) {
  RelaxedModel m = relax_detail::build_common(inst, bounds, opts,
                                              ModelKind::lb_miqp);
  m.envelope = hull_envelope(bounds, opts.envelope);
  m.has_envelope = true;
  return m;
}

/// Lower bounding MIQCP: the MIQP plus the convex upper ring
/// dx^2 + dy^2 <= q_hi^2.
inline RelaxedModel build_lb_miqcp(const ProblemInstance& inst,
                                   const ControlBounds& bounds,
                                   const BuildOptions& opts = {}) {
  RelaxedModel m = relax_detail::build_common(inst, bounds, opts,
                                              ModelKind::lb_miqcp);
  m.envelope = hull_envelope(bounds, opts.envelope);
  m.has_envelope = true;
  m.has_ring_upper = true;
  return m;
}

/// Upper bounding NLP: the exact model with every disjunction branch fixed to
/// the given z and both sides of the speed ring. The nonconvex lower ring is
/// flagged here and enforced by solve_local_nlp.
inline RelaxedModel build_ub_nlp(const ProblemInstance& inst,
                                 const ControlBounds& bounds,
                                 const std::vector<int>& z,
                                 const BuildOptions& opts = {}) {
  RelaxedModel m = relax_detail::build_common(inst, bounds, opts,
                                              ModelKind::ub_nlp);
  if (z.size() != m.pairs.size())
    throw InputError("z assignment size does not match pair count");
  for (int zp : z)
    if (zp != 0 && zp != 1 && zp != 2)
      throw InputError("ub_nlp requires every z fixed (0, 1, or 2)");
  m.z_fixed = z;
  m.has_ring_upper = true;
  m.has_ring_lower = true;
  return m;
}

/// Number of aircraft whose implied speed multiplier q = |(dx, dy)| falls
/// outside [q_lo - tol, q_hi + tol].
inline int check_bound_violations(const std::vector<ControlDecision>& controls,
                                  const ControlBounds& bounds,
                                  double tol = 1e-6) {
  int n_v = 0;
  for (const ControlDecision& c : controls) {
    const double q = c.q();
    if (q < bounds.q_lo - tol || q > bounds.q_hi + tol) ++n_v;
  }
  return n_v;
}

/// Lowers a relaxed model to solver form. `z_value[p]` overrides the model's
/// fixing per pair: -1 keeps z free (relaxed into [0, 1]), 0/1 substitutes
/// the branch, 2 emits no rows (pair proven conflict free by presolve).
/// Every row is scale-normalized. The nonconvex lower ring is never emitted
/// here.
inline ConvexQP lower_to_qp(const RelaxedModel& m,
                            const std::vector<int>& z_value,
                            std::vector<int>* z_var_index_out = nullptr) {
  const int n = m.num_aircraft();
  const int np = m.num_pairs();
  int num_free_z = 0;
  for (int p = 0; p < np; ++p)
    if (z_value[p] == -1) ++num_free_z;

  ConvexQP qp;
  qp.resize(m.fixed_var_count() + num_free_z);
  if (z_var_index_out != nullptr) z_var_index_out->assign(np, -1);

  // Objective: sum (1 - dx)^2 + dy^2 = sum dx^2 - 2 dx + 1 + dy^2.
  for (int a = 0; a < n; ++a) {
    qp.q_diag[2 * a] = 2.0;
    qp.c[2 * a] = -2.0;
    qp.q_diag[2 * a + 1] = 2.0;
    qp.c0 += 1.0;
  }

  auto push_row = [&qp](LinearRow row) {
    row.normalize();
    qp.rows.push_back(std::move(row));
  };

  const double tan_lo = std::tan(m.bounds.theta_lo);
  const double tan_hi = std::tan(m.bounds.theta_hi);
  for (int a = 0; a < n; ++a) {
    const int dx = 2 * a;
    const int dy = 2 * a + 1;
    push_row({{{dx, -1.0}}, -m.box.dx_lo});
    push_row({{{dx, 1.0}}, m.box.dx_hi});
    push_row({{{dy, -1.0}}, -m.box.dy_lo});
    push_row({{{dy, 1.0}}, m.box.dy_hi});
    // Heading cone: tan(theta_lo) dx <= dy <= tan(theta_hi) dx.
    push_row({{{dx, tan_lo}, {dy, -1.0}}, 0.0});
    push_row({{{dx, -tan_hi}, {dy, 1.0}}, 0.0});
    if (m.has_envelope) {
      const int tx = 2 * n + 2 * a;
      const int ty = 2 * n + 2 * a + 1;
      push_row({{{tx, -1.0}, {ty, -1.0}}, -m.envelope.q_lo_sq});
      push_row({{{tx, 1.0}, {dx, -m.envelope.secant_x.slope}},
                m.envelope.secant_x.intercept});
      push_row({{{ty, 1.0}, {dy, -m.envelope.secant_y.slope}},
                m.envelope.secant_y.intercept});
      push_row({{{tx, -1.0}}, 0.0});
      push_row({{{ty, -1.0}}, 0.0});
    }
    if (m.has_ring_upper)
      qp.discs.push_back({dx, dy, m.bounds.q_hi * m.bounds.q_hi, -1});
  }

  int next_z = m.fixed_var_count();
  for (int p = 0; p < np; ++p) {
    const DisjunctiveConstraintPair& pr = m.pairs[p];
    auto terms_of = [&](const PairLinearForm& f, double sign) {
      return std::vector<LinearTerm>{{2 * f.i, sign * f.c_ix},
                                     {2 * f.i + 1, sign * f.c_iy},
                                     {2 * f.j, sign * f.c_jx},
                                     {2 * f.j + 1, sign * f.c_jy}};
    };
    if (z_value[p] == 1) {
      push_row({terms_of(pr.n_form, 1.0), 0.0});
      push_row({terms_of(pr.l_form, 1.0), 0.0});
    } else if (z_value[p] == 0) {
      push_row({terms_of(pr.n_form, -1.0), 0.0});
      push_row({terms_of(pr.u_form, -1.0), 0.0});
    } else if (z_value[p] == 2) {
      // Presolve proved the pair conflict free for every admissible control;
      // no rows needed.
    } else {
      const int z = next_z++;
      if (z_var_index_out != nullptr) (*z_var_index_out)[p] = z;
      // N <= M_n (1 - z), -N <= M_n z, L_l <= M_l (1 - z), -L_u <= M_u z.
      auto with_z = [&](std::vector<LinearTerm> t, double zc) {
        t.push_back({z, zc});
        return t;
      };
      push_row({with_z(terms_of(pr.n_form, 1.0), pr.big_m_n), pr.big_m_n});
      push_row({with_z(terms_of(pr.n_form, -1.0), -pr.big_m_n), 0.0});
      push_row({with_z(terms_of(pr.l_form, 1.0), pr.big_m_l), pr.big_m_l});
      push_row({with_z(terms_of(pr.u_form, -1.0), -pr.big_m_u), 0.0});
      push_row({{{z, -1.0}}, 0.0});
      push_row({{{z, 1.0}}, 1.0});
    }
  }
  return qp;
}

/// Extracts the per-aircraft controls from a lowered-QP solution vector.
inline std::vector<ControlDecision> controls_from_x(
    const RelaxedModel& m, const std::vector<double>& x) {
  std::vector<ControlDecision> out(m.num_aircraft());
  for (int a = 0; a < m.num_aircraft(); ++a)
    out[a] = {x[2 * a], x[2 * a + 1]};
  return out;
}

/// Solves one convex subproblem of a relaxed model: free z are relaxed into
/// [0, 1], fixed z substituted. This is the node solve of branch-and-bound
/// and the "polish" solve for incumbents.
inline SubproblemSolution solve_convex_subproblem(
    const RelaxedModel& m, const std::vector<int>& z_value,
    const IpmOptions& opts = {},
    const std::vector<double>* warm_start = nullptr) {
  const ConvexQP qp = lower_to_qp(m, z_value);
  if (warm_start != nullptr && !warm_start->empty()) {
    // Warm starts carry the control/envelope prefix; free z re-center at 0.5.
    std::vector<double> padded(qp.num_vars, 0.5);
    const std::size_t k =
        std::min(warm_start->size(), static_cast<std::size_t>(qp.num_vars));
    std::copy(warm_start->begin(), warm_start->begin() + k, padded.begin());
    return solve_convex_qp(qp, opts, &padded);
  }
  return solve_convex_qp(qp, opts, nullptr);
}

namespace relax_detail {

/// One pair form as a row over the four presolve variables
/// (dx_i, dy_i, dx_j, dy_j); sign * form <= 0.
inline LinearRow pair_form_row(const PairLinearForm& f, double sign) {
  return {{{0, sign * f.c_ix},
           {1, sign * f.c_iy},
           {2, sign * f.c_jx},
           {3, sign * f.c_jy}},
          0.0};
}

/// Feasibility probe for one pair: can controls inside the box and heading
/// cone satisfy `extra`? Errs toward "yes" when the solve is inconclusive,
/// which keeps the caller's eliminations conservative.
inline bool pair_region_reachable(const RelaxedModel& m,
                                  std::vector<LinearRow> extra,
                                  const IpmOptions& opts) {
  ConvexQP qp;
  qp.resize(4);
  for (int k = 0; k < 4; ++k) qp.q_diag[k] = 1e-9;
  const double tan_lo = std::tan(m.bounds.theta_lo);
  const double tan_hi = std::tan(m.bounds.theta_hi);
  for (int a = 0; a < 2; ++a) {
    const int dx = 2 * a;
    const int dy = 2 * a + 1;
    qp.rows.push_back({{{dx, -1.0}}, -m.box.dx_lo});
    qp.rows.push_back({{{dx, 1.0}}, m.box.dx_hi});
    qp.rows.push_back({{{dy, -1.0}}, -m.box.dy_lo});
    qp.rows.push_back({{{dy, 1.0}}, m.box.dy_hi});
    qp.rows.push_back({{{dx, tan_lo}, {dy, -1.0}}, 0.0});
    qp.rows.push_back({{{dx, -tan_hi}, {dy, 1.0}}, 0.0});
  }
  for (LinearRow& row : extra) {
    row.normalize();
    qp.rows.push_back(std::move(row));
  }
  return solve_convex_qp(qp, opts).status != SubproblemStatus::infeasible;
}

/// Control samples spanning the admissible sector: identity plus the four
/// speed/heading extremes. Cheap witnesses that skip most probe solves.
inline std::array<ControlDecision, 5> sector_samples(const ControlBounds& b) {
  auto at = [](double q, double th) {
    return ControlDecision{q * std::cos(th), q * std::sin(th)};
  };
  return {identity_control(), at(b.q_lo, b.theta_lo), at(b.q_lo, b.theta_hi),
          at(b.q_hi, b.theta_lo), at(b.q_hi, b.theta_hi)};
}

}  // namespace relax_detail

/// Classifies every free disjunction before search. A pair whose collision
/// cone {L_l > 0, L_u < 0} no admissible control pair can reach is conflict
/// free however it is flown: its rows are vacuous and z is fixed to 2 (no
/// rows, no binary). A pair with exactly one reachable branch loses its
/// binary. Probes run over the box-and-cone superset of every model's
/// per-aircraft feasible set, so the optimum of each lowered model is
/// unchanged; only the search space shrinks.
inline void presolve_disjunctions(RelaxedModel& m, const IpmOptions& opts = {}) {
  const auto samples = relax_detail::sector_samples(m.bounds);
  for (int p = 0; p < m.num_pairs(); ++p) {
    if (m.z_fixed[p] != -1) continue;
    const DisjunctiveConstraintPair& pr = m.pairs[p];
    bool cone_hit = false;
    bool hit1 = false;
    bool hit0 = false;
    for (const ControlDecision& ci : samples) {
      for (const ControlDecision& cj : samples) {
        const double n = pr.n_form.eval(ci, cj);
        const double l = pr.l_form.eval(ci, cj);
        const double u = pr.u_form.eval(ci, cj);
        cone_hit = cone_hit || (l >= 0.0 && u <= 0.0);
        hit1 = hit1 || (n <= 0.0 && l <= 0.0);
        hit0 = hit0 || (n >= 0.0 && u >= 0.0);
      }
    }
    using relax_detail::pair_form_row;
    using relax_detail::pair_region_reachable;
    const bool cone_reachable =
        cone_hit ||
        pair_region_reachable(m,
                              {pair_form_row(pr.l_form, -1.0),
                               pair_form_row(pr.u_form, 1.0)},
                              opts);
    if (!cone_reachable) {
      m.z_fixed[p] = 2;
      continue;
    }
    const bool branch1 =
        hit1 || pair_region_reachable(m,
                                      {pair_form_row(pr.n_form, 1.0),
                                       pair_form_row(pr.l_form, 1.0)},
                                      opts);
    const bool branch0 =
        hit0 || pair_region_reachable(m,
                                      {pair_form_row(pr.n_form, -1.0),
                                       pair_form_row(pr.u_form, -1.0)},
                                      opts);
    // Neither branch reachable means every admissible point conflicts; the
    // fixed branch then renders the model infeasible, which is the honest
    // answer.
    if (!branch1) m.z_fixed[p] = 0;
    else if (!branch0) m.z_fixed[p] = 1;
  }
}

}  // namespace deconflict
