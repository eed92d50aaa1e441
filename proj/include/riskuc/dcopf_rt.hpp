#pragma once

#include "riskuc/scuc_da.hpp"

namespace riskuc {

// Concrete RT realization: loads and wind caps per RT period.
struct Scenario {
  std::vector<std::vector<double>> d_rt;      // [bus][rt period] MW
  std::vector<std::vector<double>> p_cap_rt;  // [wind][rt period] MW

  static Scenario baseline(const PowerSystem& sys);
  void check_dimensions(const PowerSystem& sys) const;
};

struct ExposureBreakdown {
  double total = 0.0;
  std::vector<double> per_rt_hour;
  std::vector<double> per_bus;
};

struct RtSolution {
  std::vector<std::vector<double>> p_thermal;  // [g][r]
  std::vector<std::vector<double>> h;          // [g][r]
  std::vector<std::vector<double>> p_wind;     // [w][r]
  std::vector<std::vector<double>> curtail;    // [w][r]
  std::vector<std::vector<double>> flow;       // [l][r]
  std::vector<std::vector<double>> theta;      // [b][r]
  std::vector<std::vector<double>> unmet;      // [b][r]
  std::vector<std::vector<double>> lmp;        // [b][r]
  double objective = 0.0;                      // RT dispatch cost with RT VOLL
  ExposureBreakdown exposure;                  // Eq-8 consumer exposure vs DA baselines
  double producer_surplus = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  double dual_gap = 0.0;  // |primal - dual| of the underlying LP
};

// Ramp anchor for the first RT period: DA dispatch and commitment of the hour
// preceding the critical window (absent when the window starts the horizon or
// no generator has a finite RT ramp).
struct RtAnchor {
  bool present = false;
  std::vector<double> p_prev;  // per thermal gen
  std::vector<int> y_prev;
};

RtAnchor make_rt_anchor(const PowerSystem& sys, const CommitmentSchedule& y_star);

// Solves DCOPF(y*, omega) over the critical window: commitment fixed, RT
// loads/wind caps from the scenario, RT VOLL, prorated ramping. LMPs come
// from the load-balance duals. When `anchor` is null it is derived from a
// DA dispatch of y* on demand.
RtSolution solve_dcopf(const PowerSystem& sys, const CommitmentSchedule& y_star,
                       const Scenario& omega, const RtAnchor* anchor = nullptr,
                       const SolverOptions& opt = {});

// Eq-8 exposure from raw per-(bus, period) arrays: (1/n_tp) sum of
// lmp * (d_rt - da_load)^+ with per-hour and per-bus breakdowns. Periods are
// grouped into hours as consecutive runs of n_tp.
ExposureBreakdown consumer_exposure(const std::vector<std::vector<double>>& lmp,
                                    const std::vector<std::vector<double>>& d_rt,
                                    const std::vector<std::vector<double>>& da_load, int n_tp);

// DA parent-hour forecast per (bus, RT period) — the settlement baseline.
std::vector<std::vector<double>> da_baseline_by_period(const PowerSystem& sys);

// Sum over generators and periods of (lmp at the bus x output - production
// cost) / n_tp, with the cost recomputed segment-exact from the output.
double producer_surplus(const PowerSystem& sys, const CommitmentSchedule& y_star,
                        const RtSolution& sol);

}  // namespace riskuc
