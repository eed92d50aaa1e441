#pragma once

#include "riskuc/uncertainty.hpp"

namespace riskuc {

struct GridLogEntry {
  int grid_index = -1;
  StressorVector stressor;
  double exposure = 0.0;
  bool solved = false;
};

struct AdversaryResult {
  Scenario worst_scenario;
  double worst_exposure = 0.0;
  std::vector<double> per_hour_exposure;  // per RT hour; sums to worst_exposure
  RtSolution worst_rt_solution;
  StressorVector worst_stressor;
  std::vector<GridLogEntry> grid_log;
  int worst_index = -1;
};

struct AdversaryOptions {
  int workers = 1;  // bounded parallelism over grid evaluations
  // Expand patterns independently per RT hour instead of holding one sign
  // pattern across the whole window (combinatorial).
  bool per_hour_patterns = false;
  SolverOptions solver;
};

// Grid search over the uncertainty set: realize each fixed-sign stressor,
// solve DCOPF(y*, omega), keep the exposure maximizer. Deterministic: grids
// are evaluated in enumeration order and ties go to the first maximum.
AdversaryResult solve_adversary(const PowerSystem& sys, const UncertaintySet& uset,
                                const CommitmentSchedule& y_star,
                                const AdversaryOptions& opt = {});

}  // namespace riskuc
