#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <set>
#include <vector>

#include "deconflict/relaxations.hpp"

namespace deconflict {

enum class MipStatus { optimal, feasible_time_limit, infeasible };

struct MipOptions {
  double time_limit_s = 300.0;
  /// Deterministic search budget: stop after this many node solves (0 = no
  /// budget). Unlike the wall-clock limit, truncation at a node budget
  /// reproduces bit-identically across runs and machines.
  long node_limit = 0;
  double mip_gap_tol = 1e-6;
  /// Externally proven lower bound on this model's optimum, e.g. the bound of
  /// a weaker relaxation solved earlier. Folded into the reported bound (and
  /// the gap termination test), so truncated solves of a staged pipeline
  /// still report monotone bounds.
  double lower_bound_floor = -std::numeric_limits<double>::infinity();
  IpmOptions ipm;
};

struct MipSolution {
  MipStatus status = MipStatus::infeasible;
  bool has_incumbent = false;
  std::vector<ControlDecision> controls;
  std::vector<int> z;  ///< branch choice per pair (when an incumbent exists)
  std::vector<double> x_incumbent;  ///< control/envelope prefix of the leaf
  double objective = std::numeric_limits<double>::infinity();   // UB
  double lower_bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  long nodes = 0;
  double solve_time_s = 0.0;
  bool hit_time_limit = false;
};

namespace bnb_detail {

struct Node {
  std::vector<int> z;       // -1 free, 0/1 fixed
  double bound = -std::numeric_limits<double>::infinity();
  std::vector<double> warm; // control/envelope prefix of the parent solution
  long id = 0;
  int depth = 0;
  bool closed = false;
};

inline double relative_gap(double ub, double lb) {
  if (!std::isfinite(ub)) return std::numeric_limits<double>::infinity();
  return (ub - lb) / std::max(std::abs(ub), 1e-10);
}

/// Residuals of one pair's disjunction at a relaxed point. fits1/fits0 say
/// whether the z=1 / z=0 branch constraints hold (loose accept band);
/// viol1/viol0 are the normalized infeasibilities of forcing each branch.
struct BranchFit {
  bool fits1 = false;
  bool fits0 = false;
  double viol1 = 0.0;
  double viol0 = 0.0;
};

inline BranchFit branch_fit(const DisjunctiveConstraintPair& pr,
                            ControlDecision ci, ControlDecision cj) {
  constexpr double accept = 1e-6;
  const double n = pr.n_form.eval(ci, cj) / pr.n_form.scale();
  const double l = pr.l_form.eval(ci, cj) / pr.l_form.scale();
  const double u = pr.u_form.eval(ci, cj) / pr.u_form.scale();
  BranchFit f;
  f.viol1 = std::max(n, l);
  f.viol0 = std::max(-n, -u);
  f.fits1 = f.viol1 <= accept;
  f.fits0 = f.viol0 <= accept;
  return f;
}

/// Branch assignment implied by the relaxed point: the branch (if any) whose
/// two constraints hold at the pair's relative velocity; the leaf polish
/// re-solves with the assignment enforced exactly. Returns -1 when neither
/// branch fits.
inline int assignable_branch(const DisjunctiveConstraintPair& pr,
                             ControlDecision ci, ControlDecision cj,
                             double z_relaxed) {
  const BranchFit f = branch_fit(pr, ci, cj);
  if (f.fits1 && f.fits0) return z_relaxed >= 0.5 ? 1 : 0;
  if (f.fits1) return 1;
  if (f.fits0) return 0;
  return -1;
}

}  // namespace bnb_detail

/// Best-bound branch-and-bound over the pair disjunction binaries.
///
/// Node relaxations keep free z in [0, 1]. Before the first incumbent the
/// tree is explored depth-first (plunging); each node also tries to close the
/// relaxed point into a full branch assignment and polishes it with one
/// all-fixed convex solve, which guarantees incumbent feasibility at solver
/// tolerance. Branching picks the pair whose relaxed point fits neither
/// branch (largest two-sided violation), descending into the nearer side
/// first; when every pair fits some branch it falls back to the most
/// fractional free z, ties broken by the pair's initial-conflict severity
/// (most negative g) and then lexicographic pair order. Deterministic: node
/// ids break every remaining tie; the wall-clock limit only truncates the
/// search, it never alters decisions (use node_limit for reproducible
/// truncation).
inline MipSolution solve_mip(const RelaxedModel& model,
                             const MipOptions& opts = {}) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  auto elapsed_s = [&] {
    return std::chrono::duration<double>(clock::now() - t_start).count();
  };

  const int np = model.num_pairs();
  MipSolution out;

  std::deque<bnb_detail::Node> nodes;
  std::set<std::pair<double, long>> open_by_bound;  // (bound, id)
  std::vector<long> dfs_stack;

  {
    bnb_detail::Node root;
    root.z = model.z_fixed;
    root.id = 0;
    nodes.push_back(std::move(root));
    open_by_bound.insert({nodes[0].bound, 0});
    dfs_stack.push_back(0);
  }

  double ub = std::numeric_limits<double>::infinity();
  bool any_unresolved_drop = false;
  long next_id = 1;

  auto incumbent_eps = [&] { return 1e-12 * std::max(1.0, std::abs(ub)); };
  auto current_lb = [&] {
    const double open_lb = open_by_bound.empty()
                               ? ub
                               : std::min(ub, open_by_bound.begin()->first);
    return std::max(open_lb, opts.lower_bound_floor);
  };

  std::vector<int> z_leaf(np);
  std::vector<int> z_var_index(np, -1);

  while (!open_by_bound.empty()) {
    if (elapsed_s() > opts.time_limit_s ||
        (opts.node_limit > 0 && out.nodes >= opts.node_limit)) {
      out.hit_time_limit = true;
      break;
    }
    if (out.has_incumbent &&
        bnb_detail::relative_gap(ub, current_lb()) <= opts.mip_gap_tol)
      break;

    // Node selection: plunge (most recent) before any incumbent exists, best
    // bound afterwards.
    long pick = -1;
    if (!out.has_incumbent) {
      while (!dfs_stack.empty() && nodes[dfs_stack.back()].closed)
        dfs_stack.pop_back();
      if (!dfs_stack.empty()) pick = dfs_stack.back();
    }
    if (pick == -1) pick = open_by_bound.begin()->second;

    bnb_detail::Node& node = nodes[pick];
    open_by_bound.erase({node.bound, node.id});
    node.closed = true;

    if (out.has_incumbent && node.bound >= ub - incumbent_eps()) continue;

    SubproblemSolution rel = solve_convex_subproblem(
        model, node.z, opts.ipm, node.warm.empty() ? nullptr : &node.warm);
    ++out.nodes;

    if (rel.status == SubproblemStatus::infeasible) continue;
    const bool bound_trusted = rel.status == SubproblemStatus::optimal;
    const double node_bound =
        bound_trusted ? std::max(node.bound, rel.objective) : node.bound;
    if (out.has_incumbent && node_bound >= ub - incumbent_eps()) continue;

    const std::vector<ControlDecision> node_controls =
        controls_from_x(model, rel.x);

    // Positions of the free z variables in this node's lowered QP.
    {
      int next_z = model.fixed_var_count();
      for (int p = 0; p < np; ++p)
        z_var_index[p] = node.z[p] == -1 ? next_z++ : -1;
    }

    // Incumbent attempt: read a branch per free pair off the relaxed point
    // and close it with one all-fixed polish solve. The same sweep records
    // the most violated disjunction for branching.
    bool assignable = true;
    int violated_pair = -1;
    int violated_side = 1;
    double worst_violation = 0.0;
    for (int p = 0; p < np; ++p) {
      if (node.z[p] != -1) {
        z_leaf[p] = node.z[p];
        continue;
      }
      const DisjunctiveConstraintPair& pr = model.pairs[p];
      const bnb_detail::BranchFit fit = bnb_detail::branch_fit(
          pr, node_controls[pr.n_form.i], node_controls[pr.n_form.j]);
      if (fit.fits1 || fit.fits0) {
        if (fit.fits1 && fit.fits0)
          z_leaf[p] = rel.x[z_var_index[p]] >= 0.5 ? 1 : 0;
        else
          z_leaf[p] = fit.fits1 ? 1 : 0;
        continue;
      }
      assignable = false;
      z_leaf[p] = 0;  // placeholder; the polish is skipped on this path
      const double viol = std::min(fit.viol1, fit.viol0);
      if (viol > worst_violation + 1e-12) {
        worst_violation = viol;
        violated_pair = p;
        violated_side = fit.viol1 <= fit.viol0 ? 1 : 0;
      }
    }

    if (assignable) {
      std::vector<double> warm(rel.x.begin(),
                               rel.x.begin() + model.fixed_var_count());
      SubproblemSolution leaf =
          solve_convex_subproblem(model, z_leaf, opts.ipm, &warm);
      // Note ub - incumbent_eps() is NaN while ub is still infinite; any
      // finite leaf beats an empty incumbent.
      if (leaf.status == SubproblemStatus::optimal &&
          std::isfinite(leaf.objective) &&
          (!out.has_incumbent || leaf.objective < ub - incumbent_eps())) {
        ub = leaf.objective;
        out.has_incumbent = true;
        out.objective = ub;
        out.z = z_leaf;
        out.controls = controls_from_x(model, leaf.x);
        out.x_incumbent.assign(leaf.x.begin(),
                               leaf.x.begin() + model.fixed_var_count());
        for (auto it = open_by_bound.begin(); it != open_by_bound.end();) {
          if (it->first >= ub - incumbent_eps()) {
            nodes[it->second].closed = true;
            it = open_by_bound.erase(it);
          } else {
            ++it;
          }
        }
      }
    }

    if (out.has_incumbent && node_bound >= ub - incumbent_eps()) continue;

    // Branch on the most violated disjunction: a pair whose relaxed point
    // fits neither branch is where the big-M rows are actually at work, so
    // splitting it moves the child bounds. (Fractionality is useless here:
    // the barrier centers the z of slack pairs near 0.5 regardless of
    // relevance.) When every pair fits a branch, fall back to the most
    // fractional free z; ties by severity then pair order.
    int branch_pair = violated_pair;
    int preferred = violated_side;
    if (branch_pair == -1) {
      double best_frac = std::numeric_limits<double>::infinity();
      double best_severity = std::numeric_limits<double>::infinity();
      for (int p = 0; p < np; ++p) {
        if (node.z[p] != -1) continue;
        const double frac = std::abs(rel.x[z_var_index[p]] - 0.5);
        const double severity = model.pairs[p].g_identity;
        if (frac < best_frac - 1e-12 ||
            (frac <= best_frac + 1e-12 && severity < best_severity - 1e-12)) {
          best_frac = frac;
          best_severity = severity;
          branch_pair = p;
        }
      }
      if (branch_pair != -1)
        preferred = rel.x[z_var_index[branch_pair]] >= 0.5 ? 1 : 0;
    }
    if (branch_pair == -1) {
      // Fully fixed node that did not close into an incumbent: only possible
      // when its solve hit the iteration limit, so the answer is unknown.
      if (!bound_trusted) any_unresolved_drop = true;
      continue;
    }
    std::vector<double> warm(rel.x.begin(),
                             rel.x.begin() + model.fixed_var_count());
    for (int side = 0; side < 2; ++side) {
      // Push the preferred child second so the plunge pops it first.
      const int zv = side == 0 ? 1 - preferred : preferred;
      bnb_detail::Node child;
      child.z = node.z;
      child.z[branch_pair] = zv;
      child.bound = node_bound;
      child.warm = warm;
      child.id = next_id++;
      child.depth = node.depth + 1;
      const long id = child.id;
      const double bound = child.bound;
      nodes.push_back(std::move(child));
      open_by_bound.insert({bound, id});
      dfs_stack.push_back(id);
    }
  }

  out.lower_bound = current_lb();
  if (out.has_incumbent)
    out.lower_bound = std::min(out.lower_bound, out.objective);
  out.gap = bnb_detail::relative_gap(out.objective, out.lower_bound);
  out.solve_time_s = elapsed_s();

  if (out.has_incumbent) {
    out.status = out.gap <= opts.mip_gap_tol ? MipStatus::optimal
                                             : MipStatus::feasible_time_limit;
  } else if (open_by_bound.empty() && !out.hit_time_limit &&
             !any_unresolved_drop) {
    out.status = MipStatus::infeasible;
  } else {
    // Timed out (or lost nodes to iteration limits) before any incumbent.
    out.status = MipStatus::feasible_time_limit;
    out.gap = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace deconflict
