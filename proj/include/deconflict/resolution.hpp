#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "deconflict/branch_and_bound.hpp"
#include "deconflict/geometry.hpp"
#include "deconflict/local_nlp.hpp"
#include "deconflict/relaxations.hpp"
#include "deconflict/rng.hpp"

namespace deconflict {

/// Outcome of the staged resolution pipeline.
///   global: solution is feasible and matches the best lower bound within the
///           gap tolerance
///   local:  feasible solution without a matching bound (time limit or
///           nonconvex stage)
///   infeas: a relaxation was proven infeasible, so the instance has no
///           resolution within the control bounds
///   nosol:  no feasible point was produced (and infeasibility not proven)
enum class ResolveStatus { global, local, infeas, nosol };

inline const char* to_string(ResolveStatus s) {
  switch (s) {
    case ResolveStatus::global: return "global";
    case ResolveStatus::local: return "local";
    case ResolveStatus::infeas: return "infeas";
    default: return "nosol";
  }
}

inline const char* to_string(MipStatus s) {
  switch (s) {
    case MipStatus::optimal: return "optimal";
    case MipStatus::feasible_time_limit: return "time-limit";
    default: return "infeasible";
  }
}

inline const char* to_string(LocalStatus s) {
  switch (s) {
    case LocalStatus::converged: return "converged";
    case LocalStatus::feasible_point: return "feasible";
    default: return "no-solution";
  }
}

/// One pipeline stage, as reported in solve output and benchmark tables.
/// `viol` is the count of aircraft whose implied speed leaves the allowed
/// ring (the test that decides whether the next stage runs); -1 when the
/// stage produced no point to check.
struct StepRecord {
  std::string name;    // "lb-miqp", "lb-miqcp", "ub-nlp"
  std::string status;
  double objective = std::numeric_limits<double>::infinity();
  double bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  int viol = -1;
  long nodes = 0;
  double time_s = 0.0;
};

struct ResolveOptions {
  ControlBounds bounds;
  BuildOptions build;
  MipOptions mip;
  LocalNlpOptions nlp;
  /// Sampling budget of the feasibility search that seeds the local stage
  /// with a branch assignment independent of the relaxation incumbents.
  int feasibility_samples = 2000;
  /// Classify pair disjunctions before search (drop unreachable conflicts,
  /// fix one-sided branches). Off by default: on the circle benchmarks every
  /// pair is steerable into conflict, so nothing prunes; the pass pays off
  /// on sparse geometries.
  bool presolve_pairs = false;
};

struct ResolutionReport {
  std::string instance_name;
  ResolveStatus status = ResolveStatus::nosol;
  bool has_controls = false;
  std::vector<ControlDecision> controls;
  double objective = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  int initial_conflicts = 0;
  std::vector<StepRecord> steps;
  double total_time_s = 0.0;
};

/// Independent check of a resolution: control bounds (speed ring and heading
/// cone) within `bound_tol` and every pairwise miss distance at least
/// d - margin_tol_nm nautical miles under the controlled velocities.
struct VerificationReport {
  bool ok = false;
  double min_margin_nm = std::numeric_limits<double>::infinity();
  int worst_pair_i = -1;
  int worst_pair_j = -1;
  int bound_violations = 0;
  int separation_violations = 0;
};

inline VerificationReport verify_controls(
    const ProblemInstance& inst, const std::vector<ControlDecision>& controls,
    const ControlBounds& bounds, double margin_tol_nm = 1e-6,
    double bound_tol = 1e-6) {
  inst.validate();
  if (controls.size() != static_cast<std::size_t>(inst.size()))
    throw InputError("control count does not match aircraft count");
  VerificationReport rep;
  for (const ControlDecision& c : controls)
    if (!bounds.contains(c, bound_tol)) ++rep.bound_violations;
  const int n = inst.size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec2 p_hat = inst.aircraft[i].position - inst.aircraft[j].position;
      const Vec2 v = relative_velocity(inst.aircraft[i], inst.aircraft[j],
                                       controls[i], controls[j]);
      const double margin = pair_margin(p_hat, inst.d_nm, v);
      if (margin < rep.min_margin_nm) {
        rep.min_margin_nm = margin;
        rep.worst_pair_i = i;
        rep.worst_pair_j = j;
      }
      if (margin < -margin_tol_nm) ++rep.separation_violations;
    }
  }
  rep.ok = rep.bound_violations == 0 && rep.separation_violations == 0;
  return rep;
}

namespace resolve_detail {

inline StepRecord mip_step(const char* name, const MipSolution& s,
                           const ControlBounds& bounds) {
  StepRecord rec;
  rec.name = name;
  rec.status = to_string(s.status);
  rec.objective = s.objective;
  rec.bound = s.lower_bound;
  rec.gap = s.gap;
  rec.nodes = s.nodes;
  rec.time_s = s.solve_time_s;
  if (s.has_incumbent)
    rec.viol = check_bound_violations(s.controls, bounds);
  return rec;
}

/// Branch assignment implied by the uncontrolled relative velocities: each
/// free pair takes the side its current velocity already leans toward, and
/// exact head-on ties (every pair of a symmetric encounter) fall to `tie`,
/// so the two tie fills give the two uniform-rotation patterns. Presolved
/// fixings in the model are kept.
inline std::vector<int> sign_branch_assignment(const RelaxedModel& model,
                                               int tie) {
  const ControlDecision id = identity_control();
  std::vector<int> z = model.z_fixed;
  for (int p = 0; p < model.num_pairs(); ++p) {
    if (z[p] != -1) continue;
    const PairLinearForm& nf = model.pairs[p].n_form;
    const double n = nf.eval(id, id) / nf.scale();
    if (n < -1e-9)
      z[p] = 1;
    else if (n > 1e-9)
      z[p] = 0;
    else
      z[p] = tie;
  }
  return z;
}

/// Deterministic search for any control vector inside the speed ring and
/// heading cone with all pair margins nonnegative: uniform (q, theta)
/// sampling scored by the worst margin, then a shrinking coordinate pattern
/// search from the best sample. A feasible point's branch sides form a
/// candidate assignment that no relaxation incumbent suggests, which matters
/// when every incumbent's assignment is inconsistent with the speed ring.
inline bool sample_feasible_controls(const ProblemInstance& inst,
                                     const ControlBounds& b, int samples,
                                     std::vector<ControlDecision>* out) {
  const int n = inst.size();
  struct PairGeom {
    int i, j;
    Vec2 p_hat;
  };
  std::vector<PairGeom> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      pairs.push_back(
          {i, j, inst.aircraft[i].position - inst.aircraft[j].position});

  std::vector<ControlDecision> c(n);
  auto to_controls = [&](const std::vector<double>& q,
                         const std::vector<double>& th) {
    for (int a = 0; a < n; ++a)
      c[a] = {q[a] * std::cos(th[a]), q[a] * std::sin(th[a])};
  };
  auto min_margin = [&]() {
    double m = std::numeric_limits<double>::infinity();
    for (const PairGeom& pg : pairs) {
      const Vec2 v = relative_velocity(inst.aircraft[pg.i],
                                       inst.aircraft[pg.j], c[pg.i], c[pg.j]);
      m = std::min(m, pair_margin(pg.p_hat, inst.d_nm, v));
    }
    return m;
  };

  PortableRng rng(substream_seed(inst.seed, 0xfea51b1eULL));
  std::vector<double> q(n), th(n), bq(n), bth(n);
  double best = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < samples; ++trial) {
    for (int a = 0; a < n; ++a) {
      q[a] = rng.uniform(b.q_lo, b.q_hi);
      th[a] = rng.uniform(b.theta_lo, b.theta_hi);
    }
    to_controls(q, th);
    const double m = min_margin();
    if (m > best) {
      best = m;
      bq = q;
      bth = th;
    }
  }

  double step_q = 0.25 * (b.q_hi - b.q_lo);
  double step_t = 0.25 * (b.theta_hi - b.theta_lo);
  while (best < 0.05 && step_q > 1e-5) {
    bool improved = false;
    for (int a = 0; a < n; ++a) {
      for (int dim = 0; dim < 2; ++dim) {
        for (int sgn = -1; sgn <= 1; sgn += 2) {
          q = bq;
          th = bth;
          if (dim == 0)
            q[a] = std::clamp(q[a] + sgn * step_q, b.q_lo, b.q_hi);
          else
            th[a] = std::clamp(th[a] + sgn * step_t, b.theta_lo, b.theta_hi);
          to_controls(q, th);
          const double m = min_margin();
          if (m > best) {
            best = m;
            bq = q;
            bth = th;
            improved = true;
          }
        }
      }
    }
    if (!improved) {
      step_q *= 0.5;
      step_t *= 0.5;
    }
  }

  if (best < 0.0) return false;
  to_controls(bq, bth);
  *out = c;
  return true;
}

}  // namespace resolve_detail

/// Staged resolution. Each lower-bounding stage is a branch-and-bound solve
/// of a relaxation whose solutions may leave the speed ring; if the incumbent
/// happens to respect the ring it already solves the full problem (globally
/// when the stage closed its gap). Otherwise the second stage tightens the
/// relaxation with the convex outer ring, and as a last resort the branch
/// assignment of the best incumbent is fixed and polished by the local
/// nonlinear solver, whose result is certified against the best relaxation
/// bound.
inline ResolutionReport resolve(const ProblemInstance& inst,
                                const ResolveOptions& opts = {}) {
  ResolutionReport rep;
  rep.instance_name = inst.name();
  rep.initial_conflicts = count_conflicts(inst);

  auto finish = [&](ResolveStatus status) {
    rep.status = status;
    for (const StepRecord& s : rep.steps) rep.total_time_s += s.time_s;
    return rep;
  };
  auto adopt = [&](const std::vector<ControlDecision>& controls, double obj) {
    rep.has_controls = true;
    rep.controls = controls;
    rep.objective = obj;
    rep.gap = bnb_detail::relative_gap(rep.objective, rep.lower_bound);
  };

  const MipSolution* best_incumbent = nullptr;

  RelaxedModel miqp = build_lb_miqp(inst, opts.bounds, opts.build);
  if (opts.presolve_pairs) presolve_disjunctions(miqp, opts.mip.ipm);
  const MipSolution sol1 = solve_mip(miqp, opts.mip);
  rep.steps.push_back(resolve_detail::mip_step("lb-miqp", sol1, opts.bounds));
  if (sol1.status == MipStatus::infeasible) return finish(ResolveStatus::infeas);
  rep.lower_bound = std::max(rep.lower_bound, sol1.lower_bound);
  if (sol1.has_incumbent) {
    best_incumbent = &sol1;
    if (rep.steps.back().viol == 0) {
      adopt(sol1.controls, sol1.objective);
      return finish(sol1.status == MipStatus::optimal ? ResolveStatus::global
                                                      : ResolveStatus::local);
    }
  }

  RelaxedModel miqcp = build_lb_miqcp(inst, opts.bounds, opts.build);
  // The pair classification depends only on geometry and bounds, which the
  // two relaxations share.
  miqcp.z_fixed = miqp.z_fixed;
  // The first stage's bound is valid here too (this model is more
  // constrained), so a truncated second stage never reports a weaker bound.
  MipOptions mip2 = opts.mip;
  if (std::isfinite(sol1.lower_bound))
    mip2.lower_bound_floor = std::max(mip2.lower_bound_floor,
                                      sol1.lower_bound);
  const MipSolution sol2 = solve_mip(miqcp, mip2);
  rep.steps.push_back(resolve_detail::mip_step("lb-miqcp", sol2, opts.bounds));
  if (sol2.status == MipStatus::infeasible) return finish(ResolveStatus::infeas);
  rep.lower_bound = std::max(rep.lower_bound, sol2.lower_bound);
  if (sol2.has_incumbent) {
    if (best_incumbent == nullptr ||
        sol2.objective < best_incumbent->objective)
      best_incumbent = &sol2;
    if (rep.steps.back().viol == 0) {
      adopt(sol2.controls, sol2.objective);
      return finish(sol2.status == MipStatus::optimal ? ResolveStatus::global
                                                      : ResolveStatus::local);
    }
  }

  // Last stage: fix a full branch assignment and polish with the local
  // nonlinear solver. A relaxation incumbent's assignment can be inconsistent
  // with the lower speed ring (the relaxations never see it), so several
  // candidate assignments are tried: the stage incumbents, then the two
  // sign-based fills of the uncontrolled geometry.
  struct ZCandidate {
    std::vector<int> z;
    const std::vector<ControlDecision>* start;
  };
  std::vector<ZCandidate> candidates;
  if (sol1.has_incumbent) candidates.push_back({sol1.z, &sol1.controls});
  if (sol2.has_incumbent) candidates.push_back({sol2.z, &sol2.controls});
  if (best_incumbent == &sol2 && candidates.size() == 2)
    std::swap(candidates[0], candidates[1]);
  std::vector<ControlDecision> sampled;
  if (resolve_detail::sample_feasible_controls(
          inst, opts.bounds, opts.feasibility_samples, &sampled)) {
    std::vector<int> z = miqp.z_fixed;
    for (int p = 0; p < miqp.num_pairs(); ++p) {
      if (z[p] != -1) continue;
      const PairLinearForm& nf = miqp.pairs[p].n_form;
      z[p] = nf.eval(sampled[nf.i], sampled[nf.j]) <= 0.0 ? 1 : 0;
    }
    candidates.push_back({std::move(z), &sampled});
  }
  candidates.push_back({resolve_detail::sign_branch_assignment(miqp, 1),
                        nullptr});
  candidates.push_back({resolve_detail::sign_branch_assignment(miqp, 0),
                        nullptr});

  const auto t_nlp = std::chrono::steady_clock::now();
  LocalNlpSolution best_nlp;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    bool seen = false;
    for (std::size_t r = 0; r < k && !seen; ++r)
      seen = candidates[r].z == candidates[k].z;
    if (seen) continue;
    const RelaxedModel nlp_model =
        build_ub_nlp(inst, opts.bounds, candidates[k].z, opts.build);
    const LocalNlpSolution nlp =
        solve_local_nlp(nlp_model, opts.nlp, candidates[k].start);
    if (nlp.has_solution &&
        (!best_nlp.has_solution || nlp.objective < best_nlp.objective))
      best_nlp = nlp;
    else if (!best_nlp.has_solution && !nlp.has_solution)
      best_nlp.status = nlp.status;
  }
  {
    StepRecord rec;
    rec.name = "ub-nlp";
    rec.status = to_string(best_nlp.status);
    rec.objective = best_nlp.objective;
    rec.bound = rep.lower_bound;
    rec.viol = best_nlp.has_solution ? 0 : -1;
    rec.time_s = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t_nlp)
                     .count();
    if (best_nlp.has_solution)
      rec.gap = bnb_detail::relative_gap(best_nlp.objective, rep.lower_bound);
    rep.steps.push_back(rec);
  }
  if (!best_nlp.has_solution) return finish(ResolveStatus::nosol);
  adopt(best_nlp.controls, best_nlp.objective);
  return finish(rep.gap <= opts.mip.mip_gap_tol ? ResolveStatus::global
                                                : ResolveStatus::local);
}

}  // namespace deconflict
