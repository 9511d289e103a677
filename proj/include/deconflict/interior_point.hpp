#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "deconflict/convex_qp.hpp"

namespace deconflict {

enum class SubproblemStatus { optimal, infeasible, iteration_limit };

struct IpmOptions {
  int max_iterations = 150;
  double kkt_target = 1e-10;      // iterate until the scaled residual is here
  double optimal_tol = 1e-8;      // status optimal iff kkt_residual <= this
  double infeasibility_tol = 1e-7;  // phase-1 objective above this certifies
  double step_fraction = 0.995;
};

struct SubproblemSolution {
  SubproblemStatus status = SubproblemStatus::iteration_limit;
  std::vector<double> x;
  double objective = std::numeric_limits<double>::infinity();
  double kkt_residual = std::numeric_limits<double>::infinity();
  double phase1_objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
};

namespace ipm_detail {

/// Shared dense primal-dual state for one Mehrotra predictor-corrector run.
struct Workspace {
  int n = 0;
  int m = 0;
  Eigen::VectorXd x, s, lam;
  Eigen::VectorXd f;        // constraint values
  Eigen::VectorXd r_d;      // dual residual
  Eigen::MatrixXd kmat;     // n x n reduced system
  Eigen::VectorXd dx_aff, ds_aff, dlam_aff, dx, ds, dlam;
};

/// Gradient rows of all constraints at the current x, as sparse term lists.
/// Linear rows are constant; disc gradients depend on x.
inline void constraint_values_and_grads(
    const ConvexQP& qp, const Eigen::VectorXd& x, Eigen::VectorXd& f,
    std::vector<std::vector<LinearTerm>>& grads) {
  const int nr = static_cast<int>(qp.rows.size());
  for (int i = 0; i < nr; ++i) {
    double v = -qp.rows[i].rhs;
    for (const LinearTerm& t : qp.rows[i].terms) v += t.coeff * x[t.index];
    f[i] = v;
    // linear gradients are filled once by the caller
  }
  for (std::size_t k = 0; k < qp.discs.size(); ++k) {
    const DiscConstraint& dc = qp.discs[k];
    double v = x[dc.ix] * x[dc.ix] + x[dc.iy] * x[dc.iy] - dc.r_sq;
    if (dc.t_index >= 0) v -= x[dc.t_index];
    f[nr + static_cast<int>(k)] = v;
    std::vector<LinearTerm>& g = grads[nr + static_cast<int>(k)];
    g.clear();
    g.push_back({dc.ix, 2.0 * x[dc.ix]});
    g.push_back({dc.iy, 2.0 * x[dc.iy]});
    if (dc.t_index >= 0) g.push_back({dc.t_index, -1.0});
  }
}

inline double step_length(const Eigen::VectorXd& v, const Eigen::VectorXd& dv,
                          double fraction) {
  double alpha = 1.0;
  for (int i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) alpha = std::min(alpha, -fraction * v[i] / dv[i]);
  return alpha;
}

}  // namespace ipm_detail

/// Primal-dual interior-point method (Mehrotra predictor-corrector) for a
/// ConvexQP. Inequalities are slacked, s > 0, lam > 0; convex quadratic
/// constraints enter through their gradients and a diagonal Hessian
/// contribution. Deterministic: no randomness, fixed iteration order.
///
/// Returns iteration_limit when the target residual is not reached; the
/// caller decides whether to fall back to phase-1 (see
/// solve_convex_subproblem below, which certifies infeasibility).
inline SubproblemSolution ipm_solve(const ConvexQP& qp,
                                    const IpmOptions& opts = {},
                                    const std::vector<double>* warm_start =
                                        nullptr) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const int n = qp.num_vars;
  const int nr = static_cast<int>(qp.rows.size());
  const int m = qp.num_constraints();

  SubproblemSolution out;
  if (m == 0) {
    // Unconstrained separable QP: closed form per coordinate.
    out.x.assign(n, 0.0);
    for (int k = 0; k < n; ++k)
      out.x[k] = qp.q_diag[k] > 0.0 ? -qp.c[k] / qp.q_diag[k] : 0.0;
    out.objective = qp.objective(out.x);
    out.kkt_residual = 0.0;
    out.status = SubproblemStatus::optimal;
    return out;
  }

  VectorXd x = VectorXd::Zero(n);
  if (warm_start != nullptr && static_cast<int>(warm_start->size()) == n)
    for (int k = 0; k < n; ++k) x[k] = (*warm_start)[k];

  // Constraint values and gradient term lists (linear parts are constant).
  VectorXd f(m);
  std::vector<std::vector<LinearTerm>> grads(m);
  for (int i = 0; i < nr; ++i) grads[i] = qp.rows[i].terms;
  ipm_detail::constraint_values_and_grads(qp, x, f, grads);

  VectorXd s(m), lam(m);
  for (int i = 0; i < m; ++i) {
    s[i] = std::max(1.0, -f[i]);
    lam[i] = 1.0;
  }

  double obj_scale_base = 1.0;
  for (int k = 0; k < n; ++k) obj_scale_base = std::max(obj_scale_base, std::abs(qp.c[k]));

  MatrixXd kmat(n, n);
  VectorXd r_d(n), rhs(n), dx(n), ds(m), dlam(m), dx_cc(n);
  VectorXd grad0(n);

  const double prune_reg = 1e-11;
  double best_kkt = std::numeric_limits<double>::infinity();
  VectorXd best_x = x;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    // A degenerate step can blow the iterate up to inf/NaN; fall back to the
    // best iterate seen instead of letting NaN comparisons run the loop.
    if (!x.allFinite() || !s.allFinite() || !lam.allFinite()) break;
    ipm_detail::constraint_values_and_grads(qp, x, f, grads);
    if (!f.allFinite()) break;

    // Residuals. r_d = Qx + c + J^T lam; r_p = f + s; comp = s.lam.
    for (int k = 0; k < n; ++k) grad0[k] = qp.q_diag[k] * x[k] + qp.c[k];
    r_d = grad0;
    for (int i = 0; i < m; ++i)
      for (const LinearTerm& t : grads[i]) r_d[t.index] += lam[i] * t.coeff;

    double stat = 0.0;
    for (int k = 0; k < n; ++k) stat = std::max(stat, std::abs(r_d[k]));
    double scale = obj_scale_base;
    for (int k = 0; k < n; ++k)
      scale = std::max(scale, std::abs(qp.q_diag[k] * x[k]));
    stat /= scale;

    double pfeas = 0.0;
    for (int i = 0; i < m; ++i) pfeas = std::max(pfeas, f[i]);
    pfeas = std::max(0.0, pfeas);

    const double mu = s.dot(lam) / m;
    const double obj = qp.objective(std::vector<double>(x.data(), x.data() + n));
    const double comp = mu / (1.0 + std::abs(obj));
    const double kkt = std::max({stat, pfeas, comp});

    if (std::isfinite(kkt) && kkt < best_kkt) {
      best_kkt = kkt;
      best_x = x;
    }
    out.iterations = iter;
    if (std::isfinite(kkt) && kkt <= opts.kkt_target) break;

    // Lagrangian Hessian diagonal: objective diag + 2 lam_k on disc coords.
    VectorXd h = VectorXd::Zero(n);
    for (int k = 0; k < n; ++k) h[k] = qp.q_diag[k];
    for (std::size_t k = 0; k < qp.discs.size(); ++k) {
      const double lk = lam[nr + static_cast<int>(k)];
      h[qp.discs[k].ix] += 2.0 * lk;
      h[qp.discs[k].iy] += 2.0 * lk;
    }

    // K = H + J^T diag(lam/s) J, built from sparse gradient rows.
    kmat.setZero();
    for (int k = 0; k < n; ++k) kmat(k, k) = h[k] + prune_reg * (1.0 + h[k]);
    for (int i = 0; i < m; ++i) {
      const double d = lam[i] / s[i];
      const std::vector<LinearTerm>& g = grads[i];
      for (const LinearTerm& a : g)
        for (const LinearTerm& b : g)
          kmat(a.index, b.index) += d * a.coeff * b.coeff;
    }

    Eigen::LLT<MatrixXd> llt(kmat);
    if (llt.info() != Eigen::Success) {
      for (int k = 0; k < n; ++k) kmat(k, k) += 1e-7 * (1.0 + h[k]);
      llt.compute(kmat);
      if (llt.info() != Eigen::Success) break;  // give up, report best iterate
    }

    // r_p uses the slacked equality f + s = 0.
    VectorXd r_p = f + s;

    auto solve_step = [&](const VectorXd& r_c, VectorXd& dxo, VectorXd& dso,
                          VectorXd& dlo) {
      // dlam = diag(lam/s) (J dx + r_p) - r_c / s; eliminate into K dx = rhs.
      rhs = -r_d;
      for (int i = 0; i < m; ++i) {
        const double w = (lam[i] / s[i]) * r_p[i] - r_c[i] / s[i];
        for (const LinearTerm& t : grads[i]) rhs[t.index] -= t.coeff * w;
      }
      dxo = llt.solve(rhs);
      for (int i = 0; i < m; ++i) {
        double jdx = 0.0;
        for (const LinearTerm& t : grads[i]) jdx += t.coeff * dxo[t.index];
        dlo[i] = (lam[i] / s[i]) * (jdx + r_p[i]) - r_c[i] / s[i];
        dso[i] = -(r_c[i] + s[i] * dlo[i]) / lam[i];
      }
    };

    // Predictor (affine scaling) step.
    VectorXd r_c_aff(m);
    for (int i = 0; i < m; ++i) r_c_aff[i] = s[i] * lam[i];
    VectorXd dx_aff(n), ds_aff(m), dlam_aff(m);
    solve_step(r_c_aff, dx_aff, ds_aff, dlam_aff);

    if (!dx_aff.allFinite() || !ds_aff.allFinite() || !dlam_aff.allFinite())
      break;
    const double a_p_aff = ipm_detail::step_length(s, ds_aff, 1.0);
    const double a_d_aff = ipm_detail::step_length(lam, dlam_aff, 1.0);
    double mu_aff = 0.0;
    for (int i = 0; i < m; ++i)
      mu_aff += (s[i] + a_p_aff * ds_aff[i]) * (lam[i] + a_d_aff * dlam_aff[i]);
    mu_aff /= m;
    const double sigma =
        mu > 0.0 ? std::pow(std::max(0.0, mu_aff / mu), 3) : 0.0;

    // Corrector step.
    VectorXd r_c(m);
    for (int i = 0; i < m; ++i)
      r_c[i] = s[i] * lam[i] + ds_aff[i] * dlam_aff[i] - sigma * mu;
    solve_step(r_c, dx, ds, dlam);
    if (!dx.allFinite() || !ds.allFinite() || !dlam.allFinite()) break;

    const double a_p =
        std::min(1.0, ipm_detail::step_length(s, ds, opts.step_fraction));
    const double a_d =
        std::min(1.0, ipm_detail::step_length(lam, dlam, opts.step_fraction));

    x += a_p * dx;
    s += a_p * ds;
    lam += a_d * dlam;
    if (a_p < 1e-12 && a_d < 1e-12) break;  // stalled
  }

  const std::vector<double> xv(best_x.data(), best_x.data() + n);
  out.x = xv;
  out.objective = qp.objective(xv);
  out.kkt_residual = best_kkt;
  out.status = best_kkt <= opts.optimal_tol ? SubproblemStatus::optimal
                                            : SubproblemStatus::iteration_limit;
  return out;
}

/// Phase-1: minimize t subject to f_i(x) <= t and t >= -2. The optimum is the
/// smallest uniform relaxation that makes the problem feasible; a value above
/// the infeasibility tolerance certifies the original constraints as
/// inconsistent.
inline SubproblemSolution ipm_phase1(const ConvexQP& qp,
                                     const IpmOptions& opts = {}) {
  ConvexQP p1;
  p1.resize(qp.num_vars + 1);
  const int t = qp.num_vars;
  p1.c[t] = 1.0;
  // Tiny curvature keeps x bounded and the Newton matrix definite; the bias
  // on the phase-1 optimum is orders of magnitude below infeasibility_tol.
  for (int k = 0; k < qp.num_vars; ++k) p1.q_diag[k] = 1e-9;
  p1.rows.reserve(qp.rows.size() + 1);
  for (const LinearRow& r : qp.rows) {
    LinearRow rr = r;
    rr.terms.push_back({t, -1.0});
    p1.rows.push_back(rr);
  }
  LinearRow floor_row;
  floor_row.terms.push_back({t, -1.0});
  floor_row.rhs = 2.0;
  p1.rows.push_back(floor_row);
  for (const DiscConstraint& d : qp.discs) {
    DiscConstraint dd = d;
    dd.t_index = t;
    p1.discs.push_back(dd);
  }
  IpmOptions p1_opts = opts;
  p1_opts.kkt_target = std::min(1e-10, opts.kkt_target);
  SubproblemSolution sol = ipm_solve(p1, p1_opts);
  sol.phase1_objective = sol.x.empty() ? std::numeric_limits<double>::infinity()
                                       : sol.x[t];
  return sol;
}

/// Full solve with infeasibility certification: direct interior-point first;
/// on failure to converge, phase-1 decides between a certified infeasible
/// answer and one warm-started retry.
inline SubproblemSolution solve_convex_qp(const ConvexQP& qp,
                                          const IpmOptions& opts = {},
                                          const std::vector<double>*
                                              warm_start = nullptr) {
  SubproblemSolution sol = ipm_solve(qp, opts, warm_start);
  if (sol.status == SubproblemStatus::optimal) return sol;

  SubproblemSolution p1 = ipm_phase1(qp, opts);
  // The phase-1 optimum only certifies anything when phase-1 itself
  // converged; a stalled iterate with a large t proves nothing.
  if (p1.status == SubproblemStatus::optimal &&
      p1.phase1_objective > opts.infeasibility_tol) {
    SubproblemSolution inf;
    inf.status = SubproblemStatus::infeasible;
    inf.phase1_objective = p1.phase1_objective;
    inf.iterations = sol.iterations + p1.iterations;
    return inf;
  }
  std::vector<double> start(p1.x.begin(), p1.x.begin() + qp.num_vars);
  SubproblemSolution retry = ipm_solve(qp, opts, &start);
  retry.phase1_objective = p1.phase1_objective;
  retry.iterations += sol.iterations + p1.iterations;
  if (retry.status == SubproblemStatus::optimal) return retry;
  return retry.kkt_residual <= sol.kkt_residual ? retry : sol;
}

}  // namespace deconflict
