#pragma once

// Shared toy systems and brute-force oracles for the test suites.

#include <cmath>
#include <random>
#include <vector>

#include "riskuc/dcopf_rt.hpp"
#include "riskuc/power_system.hpp"
#include "riskuc/scuc_da.hpp"
#include "riskuc/solver.hpp"

namespace riskuc::testing {

// Single-bus system with three thermal generators: caps [50,10,50], constant
// marginal costs [1,2,3], RT ramp [unbounded, unbounded, 1], load 59 in both
// hours, no startup/shutdown costs. The RT window covers both hours.
inline PowerSystem appendix_a_system() {
  PowerSystem sys;
  sys.voll_da = 10000.0;
  sys.voll_rt = 20000.0;
  sys.time.da_hours = {1, 2};
  sys.time.rt_hours = {1, 2};
  sys.time.n_tp = 1;
  sys.time.flex_window = {1, 2};
  Bus b;
  b.id = "b1";
  b.forecast_load = {59.0, 59.0};
  b.rt_forecast_load = {59.0, 59.0};
  sys.buses.push_back(b);
  const double caps[3] = {50.0, 10.0, 50.0};
  const double slopes[3] = {1.0, 2.0, 3.0};
  const double ramps[3] = {kUnbounded, kUnbounded, 1.0};
  for (int g = 0; g < 3; ++g) {
    ThermalGenerator tg;
    tg.id = "g" + std::to_string(g + 1);
    tg.bus = "b1";
    tg.bus_idx = 0;
    tg.p_min = 0.0;
    tg.p_max = caps[g];
    tg.ramp_hourly = kUnbounded;
    tg.ramp_rt = ramps[g];
    tg.startup_cost = 0.0;
    tg.shutdown_cost = 0.0;
    tg.cost_segments = {{slopes[g], 0.0}};
    sys.thermal_generators.push_back(tg);
  }
  sys.validate();
  return sys;
}

struct GenSpec {
  double p_min = 0.0, p_max = 100.0;
  double slope = 10.0, intercept = 0.0;
  double startup = 0.0, shutdown = 0.0;
  double ramp_hourly = kUnbounded, ramp_rt = kUnbounded;
};

// One-bus system with the given generators and per-hour loads; RT window over
// the listed rt hour labels (1-based positions into the load vector).
inline PowerSystem single_bus_system(const std::vector<GenSpec>& gens,
                                     const std::vector<double>& loads,
                                     std::vector<int> rt_hours = {}, int n_tp = 1,
                                     std::vector<int> flex = {}) {
  PowerSystem sys;
  sys.voll_da = 10000.0;
  sys.voll_rt = 20000.0;
  for (size_t t = 0; t < loads.size(); ++t) sys.time.da_hours.push_back(static_cast<int>(t + 1));
  if (rt_hours.empty()) rt_hours = sys.time.da_hours;
  sys.time.rt_hours = rt_hours;
  sys.time.n_tp = n_tp;
  sys.time.flex_window = flex.empty() ? sys.time.da_hours : flex;
  Bus b;
  b.id = "b1";
  b.forecast_load = loads;
  for (int r = 0; r < sys.time.n_rt_periods(); ++r)
    b.rt_forecast_load.push_back(loads[sys.time.hour_index(rt_hours[r / n_tp])]);
  sys.buses.push_back(b);
  int i = 0;
  for (const auto& gs : gens) {
    ThermalGenerator tg;
    tg.id = "g" + std::to_string(++i);
    tg.bus = "b1";
    tg.bus_idx = 0;
    tg.p_min = gs.p_min;
    tg.p_max = gs.p_max;
    tg.ramp_hourly = gs.ramp_hourly;
    tg.ramp_rt = gs.ramp_rt;
    tg.startup_cost = gs.startup;
    tg.shutdown_cost = gs.shutdown;
    tg.cost_segments = {{gs.slope, gs.intercept}};
    sys.thermal_generators.push_back(tg);
  }
  sys.validate();
  return sys;
}

// DA cost of a fixed commitment: LP over dispatch with y, v, w pinned.
// Returns +inf if the fixing is infeasible.
inline double da_cost_of(const PowerSystem& sys, const CommitmentSchedule& sched) {
  try {
    PricingRun pr = da_pricing_run(sys, sched);
    return pr.dispatch.objective;
  } catch (const SolveError&) {
    return std::numeric_limits<double>::infinity();
  }
}

// Enumerates every commitment over (gen, hour) cells listed in `free_cells`,
// holding the rest at `base`; returns every schedule paired with its DA cost.
inline std::vector<std::pair<CommitmentSchedule, double>> enumerate_commitments(
    const PowerSystem& sys, const CommitmentSchedule& base,
    const std::vector<std::pair<int, int>>& free_cells) {
  std::vector<std::pair<CommitmentSchedule, double>> out;
  const size_t n = free_cells.size();
  for (size_t mask = 0; mask < (1ull << n); ++mask) {
    auto y = base.y;
    for (size_t i = 0; i < n; ++i)
      y[free_cells[i].first][free_cells[i].second] = (mask >> i) & 1 ? 1 : 0;
    CommitmentSchedule s = CommitmentSchedule::from_y(y);
    out.emplace_back(s, da_cost_of(sys, s));
  }
  return out;
}

// All (gen, hour) cells inside the flex window.
inline std::vector<std::pair<int, int>> flex_cells(const PowerSystem& sys) {
  std::vector<std::pair<int, int>> cells;
  for (int g = 0; g < sys.n_thermal(); ++g)
    for (int t = 0; t < sys.time.n_da(); ++t)
      if (sys.time.hour_in_flex(t)) cells.emplace_back(g, t);
  return cells;
}

}  // namespace riskuc::testing
