#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "riskuc/dcopf_rt.hpp"

using namespace riskuc;
using namespace riskuc::testing;

TEST_CASE("appendix-A golden: all generators on") {
  PowerSystem sys = appendix_a_system();
  CommitmentSchedule all_on = CommitmentSchedule::from_y({{1, 1}, {1, 1}, {1, 1}});
  RtSolution sol = solve_dcopf(sys, all_on, Scenario::baseline(sys));
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.p_thermal[0][0] == doctest::Approx(50.0).epsilon(1e-6));
  CHECK(sol.p_thermal[1][0] == doctest::Approx(9.0).epsilon(1e-6));
  CHECK(sol.p_thermal[2][0] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(sol.p_thermal[0][1] == doctest::Approx(50.0).epsilon(1e-6));
  CHECK(sol.p_thermal[1][1] == doctest::Approx(9.0).epsilon(1e-6));
  CHECK(sol.p_thermal[2][1] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(sol.lmp[0][0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(sol.lmp[0][1] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("appendix-A golden: gen 1 off in hour 1 flips the hour-2 price") {
  PowerSystem sys = appendix_a_system();
  CommitmentSchedule y_prime = CommitmentSchedule::from_y({{0, 1}, {1, 0}, {1, 1}});
  // hour 1: gens 2+3 serve 59 -> [_,10,49]; hour 2: gen 3 ramp-limited to 48,
  // gen 1 covers the rest and sets the price
  RtSolution sol = solve_dcopf(sys, y_prime, Scenario::baseline(sys));
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.p_thermal[0][0] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(sol.p_thermal[1][0] == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(sol.p_thermal[2][0] == doctest::Approx(49.0).epsilon(1e-6));
  CHECK(sol.p_thermal[0][1] == doctest::Approx(11.0).epsilon(1e-6));
  CHECK(sol.p_thermal[1][1] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(sol.p_thermal[2][1] == doctest::Approx(48.0).epsilon(1e-6));
  CHECK(sol.lmp[0][1] == doctest::Approx(1.0).epsilon(1e-6));
  // binding RT ramp makes the hour-2 LMP drop from 2 to 1
}

TEST_CASE("forecast scenario under the deterministic schedule has zero excess") {
  PowerSystem sys = appendix_a_system();
  auto det = solve_deterministic(sys, 1e-9);
  RtSolution sol = solve_dcopf(sys, det.schedule, Scenario::baseline(sys));
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.exposure.total == doctest::Approx(0.0));
}

TEST_CASE("Eq-8 exposure arithmetic") {
  SUBCASE("single excess bus") {
    // lmp 2 everywhere, one bus one period with +1 MW excess, n_tp = 1
    auto e = consumer_exposure({{2.0}, {2.0}}, {{8.0}, {3.0}}, {{7.0}, {5.0}}, 1);
    CHECK(e.total == doctest::Approx(2.0));
    CHECK(e.per_bus[0] == doctest::Approx(2.0));
    CHECK(e.per_bus[1] == doctest::Approx(0.0));
  }
  SUBCASE("no excess anywhere clips to zero") {
    auto e = consumer_exposure({{5.0, 5.0}}, {{3.0, 4.0}}, {{3.0, 4.0}}, 1);
    CHECK(e.total == doctest::Approx(0.0));
  }
  SUBCASE("n_tp scaling: 120 over 12 periods-per-hour gives 10") {
    auto e = consumer_exposure({{60.0}}, {{12.0}}, {{10.0}}, 12);
    CHECK(e.total == doctest::Approx(10.0));
    CHECK(e.per_rt_hour[0] == doctest::Approx(10.0));
  }
  SUBCASE("per-bus additivity") {
    auto e = consumer_exposure({{2.0}, {3.0}, {4.0}}, {{5.0}, {6.0}, {7.0}},
                               {{4.0}, {4.0}, {7.5}}, 1);
    CHECK(e.total == doctest::Approx(e.per_bus[0] + e.per_bus[1] + e.per_bus[2]));
    CHECK(e.total == doctest::Approx(2.0 * 1 + 3.0 * 2 + 0.0));
  }
}

TEST_CASE("producer surplus cases") {
  SUBCASE("marginal unit earns zero rent") {
    PowerSystem sys = single_bus_system({{.p_max = 100, .slope = 10}}, {50});
    CommitmentSchedule on = CommitmentSchedule::from_y({{1}});
    RtSolution sol = solve_dcopf(sys, on, Scenario::baseline(sys));
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.lmp[0][0] == doctest::Approx(10.0));
    CHECK(sol.producer_surplus == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("slope-1 unit at output 50 under price 2 earns 50") {
    PowerSystem sys =
        single_bus_system({{.p_max = 50, .slope = 1}, {.p_max = 50, .slope = 2}}, {60});
    CommitmentSchedule on = CommitmentSchedule::from_y({{1}, {1}});
    RtSolution sol = solve_dcopf(sys, on, Scenario::baseline(sys));
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.lmp[0][0] == doctest::Approx(2.0));
    CHECK(sol.producer_surplus == doctest::Approx(50.0).epsilon(1e-9));
  }
  SUBCASE("zero output everywhere earns nothing") {
    PowerSystem sys = single_bus_system({{.p_max = 100, .slope = 10}}, {0});
    CommitmentSchedule off = CommitmentSchedule::from_y({{0}});
    RtSolution sol = solve_dcopf(sys, off, Scenario::baseline(sys));
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.producer_surplus == doctest::Approx(0.0));
  }
}

TEST_CASE("LMP equals the finite-difference marginal cost on nondegenerate cases") {
  std::mt19937 rng(21);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    // distinct slopes, loads chosen interior to a unit's range
    double s1 = 5.0 + (rng() % 10), s2 = s1 + 7.0 + (rng() % 10);
    double load = 110.0 + static_cast<double>(rng() % 50) + 0.37;  // > cap of unit 1
    PowerSystem sys =
        single_bus_system({{.p_max = 100, .slope = s1}, {.p_max = 120, .slope = s2}}, {load});
    CommitmentSchedule on = CommitmentSchedule::from_y({{1}, {1}});
    RtSolution base = solve_dcopf(sys, on, Scenario::baseline(sys));
    REQUIRE(base.status == SolveStatus::Optimal);

    const double eps = 1e-3;
    Scenario bumped = Scenario::baseline(sys);
    bumped.d_rt[0][0] += eps;
    RtSolution pert = solve_dcopf(sys, on, bumped);
    REQUIRE(pert.status == SolveStatus::Optimal);
    double fd = (pert.objective - base.objective) / eps;
    CHECK(std::abs(fd - base.lmp[0][0]) <= 1e-4 * (1.0 + std::abs(base.lmp[0][0])));
    CHECK(base.dual_gap <= 1e-6 * (1.0 + std::abs(base.objective)));
    ++checked;
  }
  CHECK(checked == 10);
}

TEST_CASE("uncongested, unconstrained-ramp: turning a unit off never lowers prices") {
  PowerSystem sys = single_bus_system(
      {{.p_max = 60, .slope = 4}, {.p_max = 60, .slope = 9}, {.p_max = 60, .slope = 13}},
      {100, 100});
  CommitmentSchedule all_on = CommitmentSchedule::from_y({{1, 1}, {1, 1}, {1, 1}});
  RtSolution base = solve_dcopf(sys, all_on, Scenario::baseline(sys));
  REQUIRE(base.status == SolveStatus::Optimal);
  for (int g = 0; g < 3; ++g) {
    for (int t = 0; t < 2; ++t) {
      auto y = all_on.y;
      y[g][t] = 0;
      RtSolution off = solve_dcopf(sys, CommitmentSchedule::from_y(y), Scenario::baseline(sys));
      REQUIRE(off.status == SolveStatus::Optimal);
      for (int r = 0; r < 2; ++r) CHECK(off.lmp[0][r] >= base.lmp[0][r] - 1e-6);
    }
  }
}

TEST_CASE("RT prices never exceed the RT VOLL") {
  PowerSystem sys = single_bus_system({{.p_max = 10, .slope = 3}}, {50});
  CommitmentSchedule on = CommitmentSchedule::from_y({{1}});
  RtSolution sol = solve_dcopf(sys, on, Scenario::baseline(sys));
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.lmp[0][0] == doctest::Approx(sys.voll_rt));
  CHECK(sol.lmp[0][0] <= sys.voll_rt + 1e-6);
  CHECK(sol.unmet[0][0] == doctest::Approx(40.0));
}

TEST_CASE("scenario dimension mismatch is rejected") {
  PowerSystem sys = appendix_a_system();
  Scenario s = Scenario::baseline(sys);
  s.d_rt.pop_back();  // wrong bus count? (single bus -> empties the vector)
  CommitmentSchedule on = CommitmentSchedule::from_y({{1, 1}, {1, 1}, {1, 1}});
  CHECK_THROWS_AS(solve_dcopf(sys, on, s), ValidationError);
}

TEST_CASE("RT ramp anchor: first window period is tied to the preceding DA hour") {
  // two DA hours, RT window = hour 2 only; gen 2 has RT ramp 5 and starts the
  // window anchored at its hour-1 DA dispatch of 100
  PowerSystem sys = single_bus_system(
      {{.p_max = 100, .slope = 10, .startup = 40}, {.p_max = 120, .slope = 2, .ramp_rt = 5}},
      {100, 100},
      /*rt_hours=*/{2});
  auto det = solve_deterministic(sys, 1e-9);
  CHECK(det.schedule.y[0] == std::vector<int>{0, 0});  // startup cost keeps gen 1 out
  CHECK(det.dispatch.p_thermal[1][1] == doctest::Approx(100.0));

  Scenario high = Scenario::baseline(sys);
  high.d_rt[0][0] = 115.0;  // gen 2 may only climb to 105; the rest is unmet
  RtSolution sol = solve_dcopf(sys, det.schedule, high);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.p_thermal[1][0] == doctest::Approx(105.0).epsilon(1e-6));
  CHECK(sol.unmet[0][0] == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(sol.lmp[0][0] == doctest::Approx(sys.voll_rt));
}
