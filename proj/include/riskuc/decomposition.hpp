#pragma once

#include "riskuc/adversary.hpp"

namespace riskuc {

enum class CutFamily { NoGood, LShaped, Lbbd };

const char* to_string(CutFamily f);

// Linear lower bound V >= f(y) = constant + sum coeff_gt * y_gt over the RT
// hours, tagged with its family and generating point.
struct Cut {
  CutFamily family = CutFamily::NoGood;
  struct YTerm {
    int gen = -1;
    int hour = -1;  // DA hour index
    double coeff = 0.0;
  };
  std::vector<YTerm> y_terms;
  double constant = 0.0;
  double vhat_coeff = 1.0;

  struct Provenance {
    std::vector<std::vector<int>> y_star;
    double v_star = 0.0;
    int iteration = 0;
  } provenance;

  // f(y): the exposure lower bound this cut asserts at commitment y.
  double bound_at(const std::vector<std::vector<int>>& y) const;
  // Row form for the master: vhat - sum coeff*y >= constant.
  CutRow to_row(const DaModelIndex& idx) const;
};

// Eq-16 style: exact at y*, vacuous after any flip within the RT hours.
Cut make_no_good_cut(const PowerSystem& sys, const CommitmentSchedule& y_star, double v_star,
                     int iteration = 0);

// Integer L-shaped: a = max(v_star - v1, (v_star - v0) / 2), where v1 is the
// minimum adversary exposure over 1-neighbors and v0 a global lower bound
// (trivially 0).
Cut make_l_shaped_cut(const PowerSystem& sys, const CommitmentSchedule& y_star, double v_star,
                      double v1, double v0 = 0.0, int iteration = 0);

// Logic-based Benders: per-hour terms keyed on the off-set staying off;
// dominates the no-good cut and is exact at y*.
Cut make_lbbd_cut(const PowerSystem& sys, const CommitmentSchedule& y_star,
                  const std::vector<double>& per_hour_exposure, int iteration = 0);

// Minimum adversary exposure over all single (gen, RT-hour within flex) flips
// of y_star — the L-shaped v1.
double min_one_neighbor_exposure(const PowerSystem& sys, const UncertaintySet& uset,
                                 const CommitmentSchedule& y_star, const AdversaryOptions& adv);

enum class DecompositionMode { Iterative, BranchAndCut };

struct RiskAwareOptions {
  double rho = 1.0;
  std::vector<CutFamily> cut_families = {CutFamily::Lbbd};
  DecompositionMode mode = DecompositionMode::Iterative;
  int root_cuts = 0;
  double gap = 1e-6;              // master MIP gap
  double time_limit_sec = 1e30;
  double tol_exposure_rel = 1e-4;  // convergence: vhat >= V* - rel*(1+V*)
  int max_iterations = 10000;
  AdversaryOptions adversary;
};

struct IterationRecord {
  int iteration = 0;
  double master_objective = 0.0;
  double vhat_master = 0.0;
  double adversary_exposure = 0.0;
  int cuts_added = 0;
  double wall_time_sec = 0.0;
};

struct RiskAwareSolution {
  CommitmentSchedule schedule;
  DaDispatch da_dispatch;
  double da_cost = 0.0;
  double v_hat = 0.0;  // adversary exposure at the returned schedule
  double rho = 0.0;
  double total_objective = 0.0;  // da_cost + rho * v_hat
  std::vector<Cut> cuts;
  int iterations = 0;
  double opt_gap = 0.0;
  bool converged = false;
  std::vector<IterationRecord> trace;
  std::vector<std::string> notes;  // e.g. congestion flags on kept LBBD cuts
};

// Master SCUC with V >= 0 and accumulating cuts against the grid-search
// adversary; y outside the flex window is fixed to the deterministic
// schedule. Iterative re-solve or branch-and-cut via the lazy callback.
RiskAwareSolution solve_risk_aware(const PowerSystem& sys, const UncertaintySet& uset,
                                   const CommitmentSchedule& det_schedule,
                                   const RiskAwareOptions& opt = {});

}  // namespace riskuc
