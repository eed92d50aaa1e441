#pragma once

#include <optional>

#include "riskuc/dcopf_rt.hpp"
#include "riskuc/power_system.hpp"

namespace riskuc {

// Stressor coefficients per (leading mode, RT period).
struct StressorVector {
  std::vector<std::vector<double>> alpha_d;  // [k][period]
  std::vector<std::vector<double>> alpha_w;  // [k][period]; empty when no wind

  static StressorVector zeros(int K, int n_periods, bool with_wind);
};

// Data-driven uncertainty set: per-RT-hour leading modes of the load and wind
// sample covariances, stressor box bounds R and sum bounds Sigma, and the
// per-period forecast baselines scenarios are built around.
struct UncertaintySet {
  struct KindData {
    std::vector<std::vector<Eigen::VectorXd>> modes;  // [rt_hour][k], unit norm
    std::vector<std::vector<double>> eigvals;         // [rt_hour][k], descending
    std::vector<double> total_variance;               // [rt_hour] trace of the covariance
    double R = 0.0;                                   // per-stressor bound
    double sigma = 0.0;                               // bound on |sum_k alpha_kt|
  };
  int K = 0;
  int n_rt_hours = 0;
  int n_tp = 1;
  KindData load;
  KindData wind;  // modes empty when the system has no wind farms
  std::vector<std::vector<double>> base_load;  // [bus][period]
  std::vector<std::vector<double>> base_wind;  // [farm][period]
  std::vector<std::string> warnings;           // e.g. rank deficiency

  int n_periods() const { return n_rt_hours * n_tp; }
  int hour_of_period(int r) const { return r / n_tp; }

  // Same modes, baselines re-derived for a re-granulated copy of the system
  // (out-of-sample evaluation at finer RT periods).
  UncertaintySet regrain(const PowerSystem& eval_sys) const;
};

// Sample covariance (n-1 denominator) per kind, spectral decomposition, top-K
// modes with the sign convention: largest-magnitude component positive, ties
// to the lowest index. The single history covariance is shared by every RT
// hour. sigma_mult sets Sigma = sigma_mult * R per kind.
UncertaintySet build_uncertainty_set(const PowerSystem& sys, const HistoryMatrix& load_hist,
                                     const HistoryMatrix* wind_hist, int K, double R_d,
                                     double R_w, double sigma_mult = 3.0);

// Checks the stressor box and sum bounds; throws ValidationError on violation.
void check_stressor(const UncertaintySet& uset, const StressorVector& alpha,
                    bool enforce_sum = true);

enum class NegativePolicy {
  Error,    // throw, naming the bus/farm and period (the default realize path)
  ClipZero  // clamp to 0 (grid-adjustment and sampling paths)
};

// Realizes the scenario d = base + sum_k Q_k alpha_k (and the wind analogue).
Scenario realize(const UncertaintySet& uset, const StressorVector& alpha,
                 NegativePolicy policy = NegativePolicy::Error, bool enforce_sum = true);

// Fixed-sign stressor grids. For K = 3: wind takes all 8 sign patterns of
// (+-R)^3, load exactly [R,-R,R] and [R,R,-R]; other K fall back to full
// sign enumeration (2^K each). The sum bound is relaxed (Sigma = 3R rule) and
// the last stressor is adjusted per period to the extreme value restoring
// nonnegativity where a realized entry would go negative.
std::vector<StressorVector> grid_points(const UncertaintySet& uset);

// Number of load/wind patterns grid_points combines (for logs and tests).
int n_load_patterns(int K);
int n_wind_patterns(int K);

}  // namespace riskuc
