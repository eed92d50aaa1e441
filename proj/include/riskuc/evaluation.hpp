#pragma once

#include <cstdint>
#include <utility>

#include "riskuc/decomposition.hpp"

namespace riskuc {

enum class SampleMethod { Cone, Uniform };

struct SampleSpec {
  SampleMethod method = SampleMethod::Uniform;
  int n_samples = 100;
  double cone_angle = 1.0471975511965976;  // pi/3
  StressorVector center;                   // cone only; the adverse stressor alpha*
  std::uint64_t seed = 0;
  // One cone over the concatenated per-kind stressor vector instead of a cone
  // per (kind, period).
  bool joint_cone = false;
};

// Cone: fixed norm ||center||, direction uniform over the spherical cap of
// half-angle cone_angle around the center, per (kind, period).
// Uniform: i.i.d. U[-R, R] per (mode, period, kind); realizations are later
// clipped at 0.
std::vector<StressorVector> sample_stressors(const UncertaintySet& uset, const SampleSpec& spec);

// Replicates per-period stressors of one granularity onto another (hour-wise).
StressorVector regrain_stressor(const StressorVector& s, int n_rt_hours, int n_tp_to);

// System copy with n_tp RT periods per hour; RT baselines hold the hourly
// forecast constant across each hour's periods.
PowerSystem with_rt_granularity(const PowerSystem& sys, int n_tp);

struct ScheduleStats {
  std::string name;
  double da_cost = 0.0;
  double mean_total_cost = 0.0;  // da_cost + per-sample RT consumer exposure
  double cost_std = 0.0;         // sample std (n-1)
  double mean_exposure = 0.0;
  double mean_surplus = 0.0;
  std::vector<double> da_lmp;       // per bus, averaged over DA hours
  std::vector<double> mean_rt_lmp;  // per bus, averaged over periods and samples
};

struct EvalReport {
  std::vector<ScheduleStats> per_schedule;
  // [subject][comparator]: save = comparator mean cost - subject mean cost
  std::vector<std::vector<double>> save;
  std::vector<std::vector<double>> cost_red;       // save / comparator mean cost
  std::vector<std::vector<double>> exposure_diff;  // subject - comparator mean exposure
  int n_samples_used = 0;
  int n_samples_failed = 0;
};

struct EvalOptions {
  SampleSpec spec;
  int eval_n_tp = 0;  // 0 = keep the system granularity (e.g. 12 for 5-minute)
  int workers = 1;
};

// Paired out-of-sample evaluation: the same realized scenarios are applied to
// every schedule; samples failing for any schedule are excluded pairwise.
EvalReport evaluate_schedules(const PowerSystem& sys,
                              const std::vector<std::pair<std::string, CommitmentSchedule>>& schedules,
                              const UncertaintySet& uset, const EvalOptions& opt);

struct StochasticSolution {
  CommitmentSchedule schedule;
  DaDispatch first_scenario_dispatch;
  std::vector<double> scenario_costs;  // c_s
  double z = 0.0;                      // VaR level
  std::vector<double> eta;             // (c_s - z)^+ at optimum
  double objective = 0.0;
  double mean_cost = 0.0;
  double cvar = 0.0;  // z + mean(eta) / (1 - beta)
  SolveResult result;
};

// Extensive-form two-stage stochastic SCUC with a CVaR term: first-stage
// commitment shared across equally likely scenarios, per-scenario dispatch,
// RT VOLL in the scenario costs. Scenario loads/wind enter at the hourly
// level (per-period values averaged into their hour). `fix_schedule` pins the
// first stage (evaluating the objective of a given commitment).
StochasticSolution solve_stochastic_scuc(const PowerSystem& sys,
                                         const std::vector<Scenario>& scenarios, double rho_sto,
                                         double beta, double gap = 1e-6,
                                         double time_limit_sec = 1e30,
                                         const CommitmentSchedule* warm_start = nullptr,
                                         const CommitmentSchedule* fix_schedule = nullptr);

}  // namespace riskuc
