#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "deconflict/deconflict.hpp"
#include "reference.hpp"

using namespace deconflict;
using Catch::Approx;

namespace {

/// Best objective over every completion of the model's fixed branches,
/// honoring z_fixed entries (2 = no rows) and enumerating only the free ones.
double enumerate_with_fixings(const RelaxedModel& m) {
  std::vector<int> free_pairs;
  for (int p = 0; p < m.num_pairs(); ++p)
    if (m.z_fixed[p] == -1) free_pairs.push_back(p);
  double best = std::numeric_limits<double>::infinity();
  const long total = 1L << free_pairs.size();
  std::vector<int> z = m.z_fixed;
  for (long mask = 0; mask < total; ++mask) {
    for (std::size_t k = 0; k < free_pairs.size(); ++k)
      z[free_pairs[k]] = (mask >> k) & 1 ? 1 : 0;
    const SubproblemSolution sol = solve_convex_subproblem(m, z);
    if (sol.status == SubproblemStatus::optimal)
      best = std::min(best, sol.objective);
  }
  return best;
}

}  // namespace

TEST_CASE("parabola secant touches the square at its endpoints") {
  PortableRng rng(11);
  for (int k = 0; k < 200; ++k) {
    const double a = rng.uniform(-2.0, 2.0);
    const double b = a + rng.uniform(0.01, 2.0);
    const SecantLine s = parabola_secant(a, b);
    CHECK(s.eval(a) == Approx(a * a).margin(1e-12));
    CHECK(s.eval(b) == Approx(b * b).margin(1e-12));
    for (int m = 0; m < 20; ++m) {
      const double v = rng.uniform(a, b);
      CHECK(s.eval(v) >= v * v - 1e-12);
    }
  }
}

TEST_CASE("speed-ring envelope for the default control ranges") {
  const ControlBounds b;
  const double qc = b.q_lo * std::cos(std::numbers::pi / 6.0);

  const HullEnvelope env = hull_envelope(b);
  CHECK(env.q_lo_sq == Approx(0.8836));
  CHECK(env.secant_x.slope == Approx(1.0 + qc).epsilon(1e-15));
  CHECK(env.secant_x.slope == Approx(1.8140638795573723).epsilon(1e-15));
  CHECK(env.secant_x.intercept == Approx(-qc).epsilon(1e-15));
  // chord endpoints qc and 1: exact contact with the square
  CHECK(env.secant_x.eval(qc) == Approx(qc * qc));
  CHECK(env.secant_x.eval(1.0) == Approx(1.0));
  // symmetric dy window: horizontal chord at the square of the half width
  CHECK(env.secant_y.slope == Approx(0.0).margin(1e-15));
  CHECK(env.secant_y.intercept == Approx(0.265225).epsilon(1e-12));

  const HullEnvelope wide = hull_envelope(b, EnvelopeVariant::qbar);
  CHECK(wide.secant_x.eval(qc) == Approx(qc * qc));
  CHECK(wide.secant_x.eval(b.q_hi) == Approx(b.q_hi * b.q_hi));
  // Past its right endpoint the narrow chord drops below the square, so the
  // wider chord (tight at q_hi) sits above it there.
  CHECK(wide.secant_x.eval(b.q_hi) > env.secant_x.eval(b.q_hi));
}

TEST_CASE("envelope admits every admissible polar control") {
  const ControlBounds cases[] = {
      ControlBounds{},
      {0.9, 1.1, -0.3, 0.2},      // asymmetric heading window
      {0.99, 1.0, -0.05, 0.05},   // thin ring
  };
  PortableRng rng(13);
  for (const ControlBounds& b : cases) {
    for (const EnvelopeVariant variant :
         {EnvelopeVariant::verbatim, EnvelopeVariant::qbar}) {
      const HullEnvelope env = hull_envelope(b, variant);
      for (int k = 0; k < 4000; ++k) {
        const double q = rng.uniform(b.q_lo, b.q_hi);
        const double th = rng.uniform(b.theta_lo, b.theta_hi);
        const ControlDecision c = ControlDecision::from_polar(q, th);
        const double sx = env.secant_x.eval(c.dx);
        const double sy = env.secant_y.eval(c.dy);
        // dt_x in [0, sx], dt_y in [0, sy], dt_x + dt_y >= q_lo^2 must have a
        // solution at every point the exact ring admits.
        CHECK(sx >= -1e-12);
        CHECK(sy >= -1e-12);
        CHECK(sx + sy >= env.q_lo_sq - 1e-9);
      }
    }
  }
}

TEST_CASE("lowered variable layout and row counts per model kind") {
  const ProblemInstance inst = generate_cp(4);
  const ControlBounds bounds;

  const RelaxedModel miqp = build_lb_miqp(inst, bounds);
  REQUIRE(miqp.num_pairs() == 6);
  CHECK(miqp.has_envelope);
  CHECK_FALSE(miqp.has_ring_upper);
  CHECK_FALSE(miqp.has_ring_lower);
  CHECK(miqp.control_var_count() == 8);
  CHECK(miqp.fixed_var_count() == 16);
  std::vector<int> z_index;
  const ConvexQP qp = lower_to_qp(miqp, miqp.z_fixed, &z_index);
  // 16 structural vars plus one relaxed binary per pair
  CHECK(qp.num_vars == 22);
  REQUIRE(z_index.size() == 6);
  for (int p = 0; p < 6; ++p) CHECK(z_index[p] == 16 + p);
  // per aircraft: 4 box + 2 cone + 5 envelope; per free pair: 4 big-M + 2 unit
  CHECK(qp.rows.size() == 4u * 11u + 6u * 6u);
  CHECK(qp.discs.empty());

  const RelaxedModel miqcp = build_lb_miqcp(inst, bounds);
  CHECK(miqcp.has_ring_upper);
  const ConvexQP qp2 = lower_to_qp(miqcp, miqcp.z_fixed);
  CHECK(qp2.discs.size() == 4u);
  for (const DiscConstraint& disc : qp2.discs) {
    CHECK(disc.r_sq == Approx(bounds.q_hi * bounds.q_hi));
    CHECK(disc.t_index == -1);
  }

  const RelaxedModel nlp = build_ub_nlp(inst, bounds, {1, 1, 1, 1, 1, 1});
  CHECK_FALSE(nlp.has_envelope);
  CHECK(nlp.has_ring_upper);
  CHECK(nlp.has_ring_lower);
  CHECK(nlp.fixed_var_count() == 8);
  const ConvexQP qp3 = lower_to_qp(nlp, nlp.z_fixed);
  CHECK(qp3.num_vars == 8);
  // per aircraft: 4 box + 2 cone; per fixed pair: 2 branch rows
  CHECK(qp3.rows.size() == 4u * 6u + 6u * 2u);
  CHECK(qp3.discs.size() == 4u);
}

TEST_CASE("a branch marked conflict free contributes no rows") {
  const ProblemInstance inst = generate_cp(3);
  const RelaxedModel m = build_lb_miqp(inst, ControlBounds{});
  const ConvexQP all_free = lower_to_qp(m, {-1, -1, -1});
  const ConvexQP one_gone = lower_to_qp(m, {-1, 2, -1});
  const ConvexQP fixed_one = lower_to_qp(m, {-1, 1, -1});
  CHECK(one_gone.rows.size() == all_free.rows.size() - 6u);
  CHECK(one_gone.num_vars == all_free.num_vars - 1);
  CHECK(fixed_one.rows.size() == all_free.rows.size() - 4u);
}

TEST_CASE("lowered objective equals the control deviation cost") {
  const ProblemInstance inst = generate_cp(3);
  const RelaxedModel m = build_lb_miqp(inst, ControlBounds{});
  const ConvexQP qp = lower_to_qp(m, m.z_fixed);
  PortableRng rng(17);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> x(qp.num_vars, 0.0);
    for (double& v : x) v = rng.uniform(-1.0, 1.5);
    const std::vector<ControlDecision> controls = controls_from_x(m, x);
    CHECK(qp.objective(x) == Approx(deviation_cost(controls)).margin(1e-12));
  }
}

TEST_CASE("fixed-branch restriction validates its assignment") {
  const ProblemInstance inst = generate_cp(4);
  CHECK_THROWS_AS(build_ub_nlp(inst, ControlBounds{}, {1, 1, 1}), InputError);
  CHECK_THROWS_AS(build_ub_nlp(inst, ControlBounds{}, {1, 1, 1, 1, 1, -1}),
                  InputError);
  CHECK_THROWS_AS(build_ub_nlp(inst, ControlBounds{}, {1, 1, 1, 1, 1, 3}),
                  InputError);
  CHECK_NOTHROW(build_ub_nlp(inst, ControlBounds{}, {0, 1, 2, 0, 1, 2}));
}

TEST_CASE("speed multiplier bound violations are counted per aircraft") {
  const ControlBounds b;
  CHECK(check_bound_violations({identity_control()}, b) == 0);
  CHECK(check_bound_violations({{0.5, 0.0}}, b) == 1);
  CHECK(check_bound_violations({{1.04, 0.0}}, b) == 1);
  CHECK(check_bound_violations({{1.03 + 1e-9, 0.0}}, b) == 0);
  const double qc = 0.94 * std::cos(std::numbers::pi / 6.0);
  CHECK(check_bound_violations({{qc, 0.0}, identity_control(), {0.2, 0.2}},
                               b) == 2);
}

TEST_CASE("relaxation roots are ordered: plain below ring-capped") {
  for (std::uint64_t seed : {4ull, 9ull, 15ull}) {
    const ProblemInstance inst = generate_rcp(4, seed);
    const RelaxedModel miqp = build_lb_miqp(inst, ControlBounds{});
    const RelaxedModel miqcp = build_lb_miqcp(inst, ControlBounds{});
    const SubproblemSolution r1 = solve_convex_subproblem(miqp, miqp.z_fixed);
    const SubproblemSolution r2 = solve_convex_subproblem(miqcp, miqcp.z_fixed);
    REQUIRE(r1.status == SubproblemStatus::optimal);
    REQUIRE(r2.status == SubproblemStatus::optimal);
    CHECK(r1.objective <= r2.objective + 1e-8);
  }
}

TEST_CASE("presolve fixes branches without changing the optimum") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const ProblemInstance inst = generate_rcp(4, seed);
    const RelaxedModel plain = build_lb_miqp(inst, ControlBounds{});
    RelaxedModel pre = plain;
    presolve_disjunctions(pre);
    const double a = enumerate_with_fixings(plain);
    const double b = enumerate_with_fixings(pre);
    REQUIRE(std::isfinite(a));
    REQUIRE(std::isfinite(b));
    CHECK(b == Approx(a).margin(1e-6));
  }
}

TEST_CASE("presolve drops the binary of a pair no control can conflict") {
  // Aircraft 0 and 1 fly directly apart: their closing speed is negative for
  // every admissible control, so that pair needs no rows at all. Aircraft 2
  // meets aircraft 0 head on and keeps both passing sides open.
  ProblemInstance inst;
  inst.kind = "custom";
  inst.aircraft = {
      {0, {0.0, 0.0}, 400.0, std::numbers::pi},
      {1, {100.0, 0.0}, 400.0, 0.0},
      {2, {-60.0, 1.0}, 400.0, 0.0},
  };
  const RelaxedModel plain = build_lb_miqp(inst, ControlBounds{});
  RelaxedModel pre = plain;
  presolve_disjunctions(pre);
  REQUIRE(pre.num_pairs() == 3);
  CHECK(pre.z_fixed[0] == 2);   // pair (0,1): always diverging
  CHECK(pre.z_fixed[1] == -1);  // pair (0,2): head on, both sides usable
  const double a = enumerate_with_fixings(plain);
  const double b = enumerate_with_fixings(pre);
  REQUIRE(std::isfinite(a));
  CHECK(b == Approx(a).margin(1e-6));
}
