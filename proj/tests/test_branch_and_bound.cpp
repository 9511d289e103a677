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

void check_solution_invariants(const MipSolution& sol, const MipOptions& opts) {
  CHECK(sol.gap >= -1e-9);
  if (sol.has_incumbent) CHECK(sol.lower_bound <= sol.objective + 1e-6);
  if (sol.status == MipStatus::optimal) CHECK(sol.gap <= opts.mip_gap_tol);
  if (sol.status == MipStatus::infeasible) CHECK_FALSE(sol.has_incumbent);
}

}  // namespace

TEST_CASE("search agrees with complete branch enumeration") {
  int feasible_seen = 0;
  int infeasible_seen = 0;
  std::uint64_t seed = 100;
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 2 + trial % 3;  // 2, 3, 4 aircraft
    const ProblemInstance inst = generate_rcp(n, ++seed);
    const RelaxedModel model = trial % 2 == 0
                                   ? build_lb_miqp(inst, ControlBounds{})
                                   : build_lb_miqcp(inst, ControlBounds{});
    const reference::EnumerationResult ref =
        reference::enumerate_assignments(model);
    const MipOptions opts;
    const MipSolution sol = solve_mip(model, opts);
    check_solution_invariants(sol, opts);
    if (ref.feasible) {
      ++feasible_seen;
      REQUIRE(sol.has_incumbent);
      CHECK(sol.status == MipStatus::optimal);
      CHECK(sol.objective == Approx(ref.objective).margin(1e-6));
      CHECK(sol.lower_bound <= ref.objective + 1e-6);
      // The incumbent must actually satisfy its own branch assignment.
      const SubproblemSolution replay =
          solve_convex_subproblem(model, sol.z);
      REQUIRE(replay.status == SubproblemStatus::optimal);
      CHECK(replay.objective == Approx(sol.objective).margin(1e-6));
    } else {
      ++infeasible_seen;
      CHECK(sol.status == MipStatus::infeasible);
    }
  }
  // The seeds above produce solvable instances; the impossible case is
  // exercised separately with a purpose-built instance.
  CHECK(feasible_seen == 15);
  CHECK(infeasible_seen == 0);
}

TEST_CASE("ten binaries: search agrees with the 1024-branch enumeration") {
  const ProblemInstance inst = generate_rcp(5, 3);
  const RelaxedModel model = build_lb_miqp(inst, ControlBounds{});
  REQUIRE(model.num_pairs() == 10);
  const reference::EnumerationResult ref =
      reference::enumerate_assignments(model);
  REQUIRE(ref.feasible);
  const MipSolution sol = solve_mip(model);
  REQUIRE(sol.status == MipStatus::optimal);
  CHECK(sol.objective == Approx(ref.objective).margin(1e-6));
}

TEST_CASE("one aircraft needs no deviation at all") {
  ProblemInstance inst;
  inst.kind = "custom";
  inst.aircraft = {{0, {0.0, 0.0}, 500.0, 0.3}};
  const RelaxedModel model = build_lb_miqp(inst, ControlBounds{});
  REQUIRE(model.num_pairs() == 0);
  const MipSolution sol = solve_mip(model);
  REQUIRE(sol.status == MipStatus::optimal);
  CHECK(sol.nodes == 1);
  CHECK(sol.objective == Approx(0.0).margin(1e-7));
  REQUIRE(sol.controls.size() == 1);
  CHECK(sol.controls[0].dx == Approx(1.0).margin(1e-5));
  CHECK(sol.controls[0].dy == Approx(0.0).margin(1e-5));
}

TEST_CASE("four-aircraft circle: certified optimum at the known level") {
  const ProblemInstance inst = generate_cp(4);
  const MipOptions opts;
  const MipSolution sol = solve_mip(build_lb_miqp(inst, ControlBounds{}), opts);
  REQUIRE(sol.status == MipStatus::optimal);
  CHECK(sol.objective == Approx(0.001250).epsilon(0.05));
  CHECK(sol.gap <= opts.mip_gap_tol);
  check_solution_invariants(sol, opts);
}

TEST_CASE("node budget truncates the search deterministically") {
  const RelaxedModel model = build_lb_miqp(generate_cp(10), ControlBounds{});
  MipOptions opts;
  opts.node_limit = 50;
  opts.time_limit_s = 1e9;
  const MipSolution a = solve_mip(model, opts);
  const MipSolution b = solve_mip(model, opts);
  CHECK(a.nodes <= 50);
  CHECK(a.hit_time_limit);
  CHECK(a.status != MipStatus::infeasible);
  check_solution_invariants(a, opts);
  // bit-identical replay
  CHECK(a.nodes == b.nodes);
  CHECK(a.objective == b.objective);
  CHECK(a.lower_bound == b.lower_bound);
  CHECK(a.gap == b.gap);
  CHECK(a.z == b.z);
}

TEST_CASE("a trusted external bound closes the gap early") {
  const RelaxedModel model = build_lb_miqp(generate_cp(10), ControlBounds{});
  MipOptions opts;
  opts.node_limit = 200;
  opts.time_limit_s = 1e9;
  const MipSolution truncated = solve_mip(model, opts);
  REQUIRE(truncated.has_incumbent);
  REQUIRE(truncated.gap > opts.mip_gap_tol);

  MipOptions with_floor = opts;
  with_floor.lower_bound_floor = truncated.objective;
  const MipSolution closed = solve_mip(model, with_floor);
  REQUIRE(closed.has_incumbent);
  CHECK(closed.status == MipStatus::optimal);
  CHECK(closed.gap <= with_floor.mip_gap_tol);
  CHECK(closed.lower_bound >= truncated.objective - 1e-9);
  CHECK(closed.nodes <= truncated.nodes);
}

TEST_CASE("a bound floor below the optimum changes nothing") {
  const RelaxedModel model = build_lb_miqp(generate_cp(4), ControlBounds{});
  const MipSolution plain = solve_mip(model);
  MipOptions opts;
  opts.lower_bound_floor = 0.5 * plain.objective;
  const MipSolution floored = solve_mip(model, opts);
  REQUIRE(floored.status == MipStatus::optimal);
  CHECK(floored.objective == Approx(plain.objective).margin(1e-9));
}

TEST_CASE("an unresolvable head-on pair is certified infeasible") {
  // Nearly rigid controls: two aircraft meeting head on cannot miss by 5 NM
  // with 0.01 percent speed play and a ten-thousandth of a radian of heading.
  ControlBounds tight;
  tight.q_lo = 0.9999;
  tight.q_hi = 1.0001;
  tight.theta_lo = -1e-4;
  tight.theta_hi = 1e-4;
  const ProblemInstance inst = generate_cp(2);
  const MipSolution sol = solve_mip(build_lb_miqp(inst, tight));
  CHECK(sol.status == MipStatus::infeasible);
  CHECK_FALSE(sol.has_incumbent);
  CHECK(sol.objective == std::numeric_limits<double>::infinity());
}

TEST_CASE("repeated full solves are bit-identical") {
  const RelaxedModel model = build_lb_miqcp(generate_cp(6), ControlBounds{});
  const MipSolution a = solve_mip(model);
  const MipSolution b = solve_mip(model);
  REQUIRE(a.status == MipStatus::optimal);
  CHECK(a.objective == b.objective);
  CHECK(a.lower_bound == b.lower_bound);
  CHECK(a.nodes == b.nodes);
  CHECK(a.z == b.z);
  REQUIRE(a.controls.size() == b.controls.size());
  for (std::size_t k = 0; k < a.controls.size(); ++k) {
    CHECK(a.controls[k].dx == b.controls[k].dx);
    CHECK(a.controls[k].dy == b.controls[k].dy);
  }
}
