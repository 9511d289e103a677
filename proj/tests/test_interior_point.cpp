#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "deconflict/deconflict.hpp"
#include "reference.hpp"

using namespace deconflict;
using Catch::Approx;

namespace {

ConvexQP shifted_parabola() {
  // minimize (x - 1)^2 = 0.5 * 2 x^2 - 2 x + 1
  ConvexQP qp;
  qp.resize(1);
  qp.q_diag[0] = 2.0;
  qp.c[0] = -2.0;
  qp.c0 = 1.0;
  return qp;
}

}  // namespace

TEST_CASE("active box constraint clips the parabola minimum") {
  ConvexQP qp = shifted_parabola();
  qp.rows.push_back({{{0, 1.0}}, 0.5});  // x <= 0.5
  const SubproblemSolution sol = solve_convex_qp(qp);
  REQUIRE(sol.status == SubproblemStatus::optimal);
  CHECK(sol.x[0] == Approx(0.5).margin(1e-7));
  CHECK(sol.objective == Approx(0.25).margin(1e-7));
  CHECK(sol.kkt_residual <= 1e-8);
}

TEST_CASE("inactive constraints leave the unconstrained minimum alone") {
  ConvexQP qp = shifted_parabola();
  qp.rows.push_back({{{0, 1.0}}, 5.0});    // x <= 5
  qp.rows.push_back({{{0, -1.0}}, 5.0});   // x >= -5
  const SubproblemSolution sol = solve_convex_qp(qp);
  REQUIRE(sol.status == SubproblemStatus::optimal);
  CHECK(sol.x[0] == Approx(1.0).margin(1e-7));
  CHECK(sol.objective == Approx(0.0).margin(1e-9));
}

TEST_CASE("random boxed programs match the active-set reference") {
  PortableRng rng(41);
  int infeasible_seen = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 2);  // 2 or 3 vars
    ConvexQP qp;
    qp.resize(n);
    for (int k = 0; k < n; ++k) {
      qp.q_diag[k] = rng.uniform(0.5, 3.0);
      qp.c[k] = rng.uniform(-2.0, 2.0);
      qp.rows.push_back({{{k, 1.0}}, 2.0});
      qp.rows.push_back({{{k, -1.0}}, 2.0});
    }
    for (int r = 0; r < 2; ++r) {
      LinearRow row;
      for (int k = 0; k < n; ++k)
        row.terms.push_back({k, rng.uniform(-1.0, 1.0)});
      row.rhs = rng.uniform(-1.5, 1.0);
      qp.rows.push_back(row);
    }
    const double ref = reference::qp_active_set_minimum(qp);
    const SubproblemSolution sol = solve_convex_qp(qp);
    if (std::isfinite(ref)) {
      REQUIRE(sol.status == SubproblemStatus::optimal);
      CHECK(sol.objective == Approx(ref).margin(1e-6));
      CHECK(qp.max_violation(sol.x) <= 1e-7);
    } else {
      CHECK(sol.status == SubproblemStatus::infeasible);
      ++infeasible_seen;
    }
  }
  // The draw ranges are tuned so both outcomes occur.
  CHECK(infeasible_seen > 0);
  CHECK(infeasible_seen < 40);
}

TEST_CASE("contradictory bounds yield an infeasibility certificate") {
  ConvexQP qp = shifted_parabola();
  qp.rows.push_back({{{0, 1.0}}, 0.0});    // x <= 0
  qp.rows.push_back({{{0, -1.0}}, -1.0});  // x >= 1
  const SubproblemSolution sol = solve_convex_qp(qp);
  REQUIRE(sol.status == SubproblemStatus::infeasible);
  // The certificate level is the smallest uniform relaxation that makes the
  // rows consistent: half the gap between the contradictory bounds.
  CHECK(sol.phase1_objective > 1e-7);
  CHECK(sol.phase1_objective == Approx(0.5).epsilon(0.05));
}

TEST_CASE("disc constraint projects the target onto the circle") {
  // minimize (x - 2)^2 + (y - 2)^2 subject to x^2 + y^2 <= 1; the optimum is
  // the unit-circle point nearest (2, 2).
  ConvexQP qp;
  qp.resize(2);
  qp.q_diag = {2.0, 2.0};
  qp.c = {-4.0, -4.0};
  qp.c0 = 8.0;
  qp.discs.push_back({0, 1, 1.0, -1});
  const SubproblemSolution sol = solve_convex_qp(qp);
  REQUIRE(sol.status == SubproblemStatus::optimal);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(sol.x[0] == Approx(inv_sqrt2).margin(1e-6));
  CHECK(sol.x[1] == Approx(inv_sqrt2).margin(1e-6));
  CHECK(sol.objective ==
        Approx(2.0 * (2.0 - inv_sqrt2) * (2.0 - inv_sqrt2)).margin(1e-7));
  CHECK(sol.x[0] * sol.x[0] + sol.x[1] * sol.x[1] <= 1.0 + 1e-7);
}

TEST_CASE("disc constraint with a slack variable evaluates correctly") {
  const DiscConstraint dc{0, 1, 4.0, 2};
  CHECK(dc.eval({1.0, 2.0, 0.5}) == Approx(1.0 + 4.0 - 4.0 - 0.5));
  const DiscConstraint plain{0, 1, 4.0, -1};
  CHECK(plain.eval({1.0, 2.0}) == Approx(1.0));
}

TEST_CASE("warm starts do not change the answer") {
  ConvexQP qp;
  qp.resize(2);
  qp.q_diag = {2.0, 2.0};
  qp.c = {-4.0, -4.0};
  qp.c0 = 8.0;
  qp.discs.push_back({0, 1, 1.0, -1});
  qp.rows.push_back({{{0, 1.0}, {1, 1.0}}, 1.2});

  const SubproblemSolution cold = solve_convex_qp(qp);
  const std::vector<double> starts[] = {
      {0.0, 0.0}, {0.7, 0.7}, {-3.0, 5.0}, {100.0, 100.0}};
  for (const std::vector<double>& w : starts) {
    const SubproblemSolution warm = solve_convex_qp(qp, IpmOptions{}, &w);
    REQUIRE(warm.status == SubproblemStatus::optimal);
    CHECK(warm.objective == Approx(cold.objective).margin(1e-7));
  }
}

TEST_CASE("optimal status certifies a small stationarity residual") {
  PortableRng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    ConvexQP qp;
    qp.resize(3);
    for (int k = 0; k < 3; ++k) {
      qp.q_diag[k] = rng.uniform(0.5, 4.0);
      qp.c[k] = rng.uniform(-3.0, 3.0);
      qp.rows.push_back({{{k, 1.0}}, rng.uniform(0.2, 2.0)});
      qp.rows.push_back({{{k, -1.0}}, rng.uniform(0.2, 2.0)});
    }
    const SubproblemSolution sol = solve_convex_qp(qp);
    REQUIRE(sol.status == SubproblemStatus::optimal);
    CHECK(sol.kkt_residual <= 1e-8);
    // Up to three capped phases can run (direct, phase 1, retry).
    CHECK(sol.iterations <= 3 * IpmOptions{}.max_iterations);
  }
}

TEST_CASE("iteration budget is respected per phase") {
  ConvexQP qp;
  qp.resize(2);
  qp.q_diag = {2.0, 2.0};
  qp.c = {-4.0, -4.0};
  qp.c0 = 8.0;
  qp.discs.push_back({0, 1, 1.0, -1});
  IpmOptions opts;
  opts.max_iterations = 2;
  const SubproblemSolution sol = solve_convex_qp(qp, opts);
  CHECK(sol.iterations <= 3 * opts.max_iterations);
  if (sol.status == SubproblemStatus::optimal) CHECK(sol.kkt_residual <= 1e-8);
}
