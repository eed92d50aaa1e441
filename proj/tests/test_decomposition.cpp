#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "riskuc/decomposition.hpp"
#include "riskuc/evaluation.hpp"

using namespace riskuc;
using namespace riskuc::testing;

namespace {

HistoryMatrix single_col_history(double base, double amp, int n = 60) {
  HistoryMatrix h;
  h.column_ids = {"b1"};
  h.values.resize(n, 1);
  for (int i = 0; i < n; ++i) h.values(i, 0) = base + amp * std::sin(0.8 * i);
  return h;
}

// 2 thermal generators, 1 hour, stressed single bus: the worst grid exceeds
// the cheap unit's capacity, so exposure depends strongly on the commitment.
struct Toy {
  PowerSystem sys;
  UncertaintySet uset;
  CommitmentSchedule det;
};

Toy make_toy(double load = 90, double R = 25) {
  Toy t;
  t.sys = single_bus_system(
      {{.p_max = 100, .slope = 10, .startup = 20}, {.p_max = 60, .slope = 30, .startup = 15}},
      {load});
  HistoryMatrix hist = single_col_history(load, 5.0);
  t.uset = build_uncertainty_set(t.sys, hist, nullptr, 1, R, 0.0);
  t.det = solve_deterministic(t.sys, 1e-9).schedule;
  return t;
}

// True worst-case exposure per commitment, via the adversary.
double true_exposure(const Toy& t, const std::vector<std::vector<int>>& y) {
  return solve_adversary(t.sys, t.uset, CommitmentSchedule::from_y(y)).worst_exposure;
}

}  // namespace

TEST_CASE("no-good cut: exact at y*, non-positive after any flip") {
  PowerSystem sys = single_bus_system({{.p_max = 50}, {.p_max = 50}}, {40});
  CommitmentSchedule all_on = CommitmentSchedule::from_y({{1}, {1}});
  Cut cut = make_no_good_cut(sys, all_on, 100.0);
  CHECK(cut.bound_at(all_on.y) == doctest::Approx(100.0));
  CHECK(cut.bound_at({{0}, {1}}) <= 1e-12);
  CHECK(cut.bound_at({{1}, {0}}) <= 1e-12);
  CHECK(cut.bound_at({{0}, {0}}) <= 1e-12);
}

TEST_CASE("L-shaped cut arithmetic from the paper's a-formula") {
  PowerSystem sys = single_bus_system({{.p_max = 50}, {.p_max = 50}}, {40});
  CommitmentSchedule all_on = CommitmentSchedule::from_y({{1}, {1}});
  SUBCASE("a = max(100-80, (100-0)/2) = 50; 1-neighbor bound 50") {
    Cut cut = make_l_shaped_cut(sys, all_on, 100.0, 80.0, 0.0);
    CHECK(cut.bound_at(all_on.y) == doctest::Approx(100.0));
    CHECK(cut.bound_at({{0}, {1}}) == doctest::Approx(50.0));  // V* - a
    CHECK(cut.bound_at({{0}, {0}}) <= 1e-12);                  // two flips -> <= v0
  }
  SUBCASE("V1 >= V* switches to the (V*-V0)/2 branch") {
    Cut cut = make_l_shaped_cut(sys, all_on, 100.0, 150.0, 0.0);
    CHECK(cut.bound_at({{0}, {1}}) == doctest::Approx(50.0));  // a = 50 again via half rule
    Cut cut2 = make_l_shaped_cut(sys, all_on, 100.0, 150.0, 40.0);
    CHECK(cut2.bound_at({{0}, {1}}) == doctest::Approx(100.0 - 30.0));  // a = 30
  }
}

TEST_CASE("LBBD cut: empty off-set reduces to V >= sum of hour terms") {
  PowerSystem sys = single_bus_system({{.p_max = 50}, {.p_max = 50}}, {40, 40});
  CommitmentSchedule all_on = CommitmentSchedule::from_y({{1, 1}, {1, 1}});
  Cut cut = make_lbbd_cut(sys, all_on, {60.0, 40.0});
  CHECK(cut.y_terms.empty());
  CHECK(cut.bound_at(all_on.y) == doctest::Approx(100.0));

  CommitmentSchedule partial = CommitmentSchedule::from_y({{1, 1}, {0, 1}});
  Cut cut2 = make_lbbd_cut(sys, partial, {60.0, 40.0});
  CHECK(cut2.bound_at(partial.y) == doctest::Approx(100.0));
  // turning the hour-1 off-unit on zeroes that hour's term
  CHECK(cut2.bound_at({{1, 1}, {1, 1}}) == doctest::Approx(40.0));
}

TEST_CASE("exhaustive cut validity on the uncongested no-ramp toy") {
  Toy t = make_toy();
  CommitmentSchedule all_on = CommitmentSchedule::from_y({{1}, {1}});
  AdversaryResult adv = solve_adversary(t.sys, t.uset, all_on);
  Cut ng = make_no_good_cut(t.sys, all_on, adv.worst_exposure);
  double v1 = min_one_neighbor_exposure(t.sys, t.uset, all_on, {});
  Cut ls = make_l_shaped_cut(t.sys, all_on, adv.worst_exposure, v1, 0.0);
  Cut lb = make_lbbd_cut(t.sys, all_on, adv.per_hour_exposure);

  for (int mask = 0; mask < 4; ++mask) {
    std::vector<std::vector<int>> y = {{mask & 1}, {(mask >> 1) & 1}};
    double truth = true_exposure(t, y);
    CHECK(ng.bound_at(y) <= truth + 1e-9);
    CHECK(ls.bound_at(y) <= truth + 1e-9);
    CHECK(lb.bound_at(y) <= truth + 1e-9);  // Proposition-1 preconditions hold here
    CHECK(lb.bound_at(y) >= ng.bound_at(y) - 1e-12);
  }
}

TEST_CASE("LBBD dominates no-good at every commitment, congested or not") {
  Toy t = make_toy(70, 40);
  for (int mask = 0; mask < 4; ++mask) {
    std::vector<std::vector<int>> ystar = {{mask & 1}, {(mask >> 1) & 1}};
    CommitmentSchedule s = CommitmentSchedule::from_y(ystar);
    AdversaryResult adv = solve_adversary(t.sys, t.uset, s);
    Cut ng = make_no_good_cut(t.sys, s, adv.worst_exposure);
    Cut lb = make_lbbd_cut(t.sys, s, adv.per_hour_exposure);
    for (int m2 = 0; m2 < 4; ++m2) {
      std::vector<std::vector<int>> y = {{m2 & 1}, {(m2 >> 1) & 1}};
      CHECK(lb.bound_at(y) >= ng.bound_at(y) - 1e-12);
    }
  }
}

TEST_CASE("risk-aware solve matches brute force on the tiny instance") {
  Toy t = make_toy();
  RiskAwareOptions opt;
  opt.rho = 1.0;
  opt.gap = 1e-9;
  opt.tol_exposure_rel = 1e-9;
  RiskAwareSolution sol = solve_risk_aware(t.sys, t.uset, t.det, opt);
  REQUIRE(sol.converged);

  // oracle: enumerate flex commitments; objective = DA cost + rho * exposure
  double best = std::numeric_limits<double>::infinity();
  for (auto& [sched, cost] : enumerate_commitments(t.sys, t.det, flex_cells(t.sys))) {
    if (!std::isfinite(cost)) continue;
    best = std::min(best, cost + opt.rho * true_exposure(t, sched.y));
  }
  CHECK(sol.total_objective == doctest::Approx(best).epsilon(1e-6));
  CHECK(sol.total_objective == doctest::Approx(sol.da_cost + sol.rho * sol.v_hat).epsilon(1e-9));
}

TEST_CASE("branch-and-cut mode reaches the iterative optimum") {
  Toy t = make_toy();
  RiskAwareOptions it;
  it.gap = 1e-9;
  it.tol_exposure_rel = 1e-9;
  RiskAwareOptions bc = it;
  bc.mode = DecompositionMode::BranchAndCut;
  RiskAwareSolution a = solve_risk_aware(t.sys, t.uset, t.det, it);
  RiskAwareSolution b = solve_risk_aware(t.sys, t.uset, t.det, bc);
  CHECK(a.total_objective == doctest::Approx(b.total_objective).epsilon(1e-6));
  CHECK(b.converged);
}

TEST_CASE("root cuts pre-seed the pool and do not change the optimum") {
  Toy t = make_toy();
  RiskAwareOptions opt;
  opt.gap = 1e-9;
  opt.tol_exposure_rel = 1e-9;
  opt.root_cuts = 2;
  opt.mode = DecompositionMode::BranchAndCut;
  RiskAwareSolution sol = solve_risk_aware(t.sys, t.uset, t.det, opt);
  RiskAwareOptions plain;
  plain.gap = 1e-9;
  plain.tol_exposure_rel = 1e-9;
  RiskAwareSolution ref = solve_risk_aware(t.sys, t.uset, t.det, plain);
  CHECK(sol.total_objective == doctest::Approx(ref.total_objective).epsilon(1e-6));
}

TEST_CASE("rho = 0 returns the deterministic schedule after one iteration") {
  Toy t = make_toy();
  RiskAwareOptions opt;
  opt.rho = 0.0;
  RiskAwareSolution sol = solve_risk_aware(t.sys, t.uset, t.det, opt);
  CHECK(sol.iterations == 1);
  CHECK(sol.schedule == t.det);
  CHECK(sol.v_hat == 0.0);
  CHECK(sol.total_objective == doctest::Approx(sol.da_cost));
}

TEST_CASE("zero covariance converges within two iterations") {
  PowerSystem sys = single_bus_system({{.p_max = 100, .slope = 10, .startup = 20}}, {50});
  HistoryMatrix hist = single_col_history(50.0, 0.0);
  UncertaintySet u = build_uncertainty_set(sys, hist, nullptr, 1, 10.0, 0.0);
  CommitmentSchedule det = solve_deterministic(sys).schedule;
  RiskAwareOptions opt;
  RiskAwareSolution sol = solve_risk_aware(sys, u, det, opt);
  CHECK(sol.converged);
  CHECK(sol.iterations <= 2);
  CHECK(sol.v_hat == doctest::Approx(0.0));
}

TEST_CASE("no-good-only iterative mode terminates within the 2^(G*H) bound") {
  Toy t = make_toy();
  RiskAwareOptions opt;
  opt.cut_families = {CutFamily::NoGood};
  opt.gap = 1e-9;
  RiskAwareSolution sol = solve_risk_aware(t.sys, t.uset, t.det, opt);
  CHECK(sol.converged);
  CHECK(sol.iterations <= 4);  // 2 gens x 1 critical hour
}

TEST_CASE("master bound is nondecreasing across iterations") {
  Toy t = make_toy();
  RiskAwareOptions opt;
  opt.cut_families = {CutFamily::NoGood};  // forces several iterations
  opt.gap = 1e-9;
  RiskAwareSolution sol = solve_risk_aware(t.sys, t.uset, t.det, opt);
  for (size_t i = 1; i < sol.trace.size(); ++i)
    CHECK(sol.trace[i].master_objective >= sol.trace[i - 1].master_objective - 1e-6);
}

TEST_CASE("L-shaped family converges to the same optimum") {
  Toy t = make_toy();
  RiskAwareOptions opt;
  opt.cut_families = {CutFamily::LShaped};
  opt.gap = 1e-9;
  opt.tol_exposure_rel = 1e-9;
  RiskAwareSolution sol = solve_risk_aware(t.sys, t.uset, t.det, opt);
  RiskAwareOptions ref;
  ref.gap = 1e-9;
  ref.tol_exposure_rel = 1e-9;
  RiskAwareSolution lbbd = solve_risk_aware(t.sys, t.uset, t.det, ref);
  CHECK(sol.converged);
  CHECK(sol.total_objective == doctest::Approx(lbbd.total_objective).epsilon(1e-6));
}

TEST_CASE("partial fixing pins hours outside the flex window") {
  // two hours, flex window restricted to hour 2 (the RT hour)
  PowerSystem sys = single_bus_system(
      {{.p_max = 100, .slope = 10, .startup = 20}, {.p_max = 60, .slope = 30, .startup = 15}},
      {90, 90}, /*rt_hours=*/{2}, 1, /*flex=*/{2});
  HistoryMatrix hist = single_col_history(90.0, 5.0);
  UncertaintySet u = build_uncertainty_set(sys, hist, nullptr, 1, 25.0, 0.0);
  CommitmentSchedule det = solve_deterministic(sys, 1e-9).schedule;
  RiskAwareOptions opt;
  opt.gap = 1e-9;
  RiskAwareSolution sol = solve_risk_aware(sys, u, det, opt);
  for (int g = 0; g < sys.n_thermal(); ++g)
    CHECK(sol.schedule.y[g][0] == det.y[g][0]);  // hour 1 stays deterministic
}
