#pragma once

#include "riskuc/power_system.hpp"
#include "riskuc/solver.hpp"

namespace riskuc {

// Binary on/off, startup and shutdown decisions per (thermal generator, DA hour).
struct CommitmentSchedule {
  std::vector<std::vector<int>> y, v, w;  // [g][t]

  // Derives startup/shutdown canonically from y (cold start: y_{g,0} = 0):
  // v = (y_t - y_{t-1})^+, w = (y_{t-1} - y_t)^+.
  static CommitmentSchedule from_y(std::vector<std::vector<int>> y);

  int n_gens() const { return static_cast<int>(y.size()); }
  int n_hours() const { return y.empty() ? 0 : static_cast<int>(y[0].size()); }
  bool operator==(const CommitmentSchedule& o) const { return y == o.y; }
};

struct DaDispatch {
  std::vector<std::vector<double>> p_thermal;  // [g][t] MW
  std::vector<std::vector<double>> h;          // [g][t] $ (thermal production cost)
  std::vector<std::vector<double>> p_wind;     // [w][t] MW
  std::vector<std::vector<double>> curtail;    // [w][t] MW
  std::vector<std::vector<double>> flow;       // [l][t] MW
  std::vector<std::vector<double>> theta;      // [b][t] rad
  std::vector<std::vector<double>> unmet;      // [b][t] MW
  double objective = 0.0;                      // DA cost (no rho term)

  // Objective recomputed from parts: sum h + startup + shutdown + VOLL*unmet.
  double cost_breakdown(const PowerSystem& sys, const CommitmentSchedule& s) const;
};

// Variable/row layout of the DA model; shared by the decomposition master.
struct DaModelIndex {
  int n_g = 0, n_w = 0, n_b = 0, n_l = 0, n_t = 0;
  int y0 = 0, v0 = 0, w0 = 0, p0 = 0, h0 = 0, pw0 = 0, cu0 = 0, f0 = 0, th0 = 0, un0 = 0;
  int vhat = -1;  // exposure estimate variable (master problem only)
  std::vector<int> balance_rows;  // per (bus, hour): row carrying the DA LMP dual

  int y(int g, int t) const { return y0 + g * n_t + t; }
  int v(int g, int t) const { return v0 + g * n_t + t; }
  int w(int g, int t) const { return w0 + g * n_t + t; }
  int p(int g, int t) const { return p0 + g * n_t + t; }
  int h(int g, int t) const { return h0 + g * n_t + t; }
  int pw(int k, int t) const { return pw0 + k * n_t + t; }
  int cu(int k, int t) const { return cu0 + k * n_t + t; }
  int f(int l, int t) const { return f0 + l * n_t + t; }
  int th(int b, int t) const { return th0 + b * n_t + t; }
  int un(int b, int t) const { return un0 + b * n_t + t; }
  int balance(int b, int t) const { return balance_rows[b * n_t + t]; }
};

struct DaBuildOptions {
  bool with_vhat = false;  // add the exposure variable (weight rho) for the master
  double rho = 0.0;
  // Partial fixing: y outside the flex window is pinned to this schedule.
  const CommitmentSchedule* fix_outside_flex = nullptr;
};

// Objective Eq-style DA SCUC: piecewise cost epigraph, load balance, DC flow,
// startup/shutdown linking (cold start), production bounds, hourly ramping.
DaModelIndex build_da_model(const PowerSystem& sys, Model& model, const DaBuildOptions& opts = {});

CommitmentSchedule extract_schedule(const PowerSystem& sys, const DaModelIndex& idx,
                                    const std::vector<double>& x);
DaDispatch extract_da_dispatch(const PowerSystem& sys, const DaModelIndex& idx,
                               const std::vector<double>& x);

struct DeterministicSolution {
  CommitmentSchedule schedule;
  DaDispatch dispatch;
  SolveResult result;
};

DeterministicSolution solve_deterministic(const PowerSystem& sys, double gap = 1e-6,
                                          double time_limit_sec = 1e30);

// LP with the commitment fixed; duals of the load-balance rows are the DA
// LMPs, and payment = LMP x DA load per bus-hour.
struct PricingRun {
  std::vector<std::vector<double>> lmp;      // [b][t] $/MWh
  std::vector<std::vector<double>> payment;  // [b][t] $
  DaDispatch dispatch;
  SolveResult result;
};

PricingRun da_pricing_run(const PowerSystem& sys, const CommitmentSchedule& fixed);

}  // namespace riskuc
