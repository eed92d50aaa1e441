#include "riskuc/decomposition.hpp"

#include <chrono>
#include <cmath>

namespace riskuc {

const char* to_string(CutFamily f) {
  switch (f) {
    case CutFamily::NoGood: return "no_good";
    case CutFamily::LShaped: return "l_shaped";
    case CutFamily::Lbbd: return "lbbd";
  }
  return "unknown";
}

double Cut::bound_at(const std::vector<std::vector<int>>& y) const {
  double f = constant;
  for (const auto& t : y_terms) f += t.coeff * y[t.gen][t.hour];
  return f;
}

CutRow Cut::to_row(const DaModelIndex& idx) const {
  CutRow row;
  row.terms.push_back({idx.vhat, vhat_coeff});
  for (const auto& t : y_terms) row.terms.push_back({idx.y(t.gen, t.hour), -t.coeff});
  row.sense = RowSense::GreaterEqual;
  row.rhs = constant;
  row.name = to_string(family);
  return row;
}

namespace {

std::vector<int> rt_hour_indices(const PowerSystem& sys) {
  std::vector<int> hours;
  for (int label : sys.time.rt_hours) hours.push_back(sys.time.hour_index(label));
  return hours;
}

}  // namespace

Cut make_no_good_cut(const PowerSystem& sys, const CommitmentSchedule& y_star, double v_star,
                     int iteration) {
  Cut cut;
  cut.family = CutFamily::NoGood;
  cut.provenance = {y_star.y, v_star, iteration};
  int n_on = 0;
  for (int hour : rt_hour_indices(sys)) {
    for (int g = 0; g < sys.n_thermal(); ++g) {
      if (y_star.y[g][hour] == 1) {
        cut.y_terms.push_back({g, hour, v_star});
        ++n_on;
      } else {
        cut.y_terms.push_back({g, hour, -v_star});
      }
    }
  }
  cut.constant = v_star * (1.0 - n_on);
  return cut;
}

Cut make_l_shaped_cut(const PowerSystem& sys, const CommitmentSchedule& y_star, double v_star,
                      double v1, double v0, int iteration) {
  Cut cut;
  cut.family = CutFamily::LShaped;
  cut.provenance = {y_star.y, v_star, iteration};
  const double a = std::max(v_star - v1, (v_star - v0) / 2.0);
  int n_on = 0;
  for (int hour : rt_hour_indices(sys)) {
    for (int g = 0; g < sys.n_thermal(); ++g) {
      if (y_star.y[g][hour] == 1) {
        cut.y_terms.push_back({g, hour, a});
        ++n_on;
      } else {
        cut.y_terms.push_back({g, hour, -a});
      }
    }
  }
  cut.constant = v_star - a * n_on;
  return cut;
}

Cut make_lbbd_cut(const PowerSystem& sys, const CommitmentSchedule& y_star,
                  const std::vector<double>& per_hour_exposure, int iteration) {
  Cut cut;
  cut.family = CutFamily::Lbbd;
  double v_star = 0.0;
  for (double v : per_hour_exposure) v_star += v;
  cut.provenance = {y_star.y, v_star, iteration};
  auto hours = rt_hour_indices(sys);
  if (hours.size() != per_hour_exposure.size())
    throw ValidationError("lbbd cut: per-hour exposure length != RT hour count");
  for (size_t hi = 0; hi < hours.size(); ++hi) {
    for (int g = 0; g < sys.n_thermal(); ++g)
      if (y_star.y[g][hours[hi]] == 0)
        cut.y_terms.push_back({g, hours[hi], -per_hour_exposure[hi]});
    cut.constant += per_hour_exposure[hi];
  }
  return cut;
}

double min_one_neighbor_exposure(const PowerSystem& sys, const UncertaintySet& uset,
                                 const CommitmentSchedule& y_star, const AdversaryOptions& adv) {
  double v1 = std::numeric_limits<double>::infinity();
  for (int hour : rt_hour_indices(sys)) {
    if (!sys.time.hour_in_flex(hour)) continue;
    for (int g = 0; g < sys.n_thermal(); ++g) {
      auto y = y_star.y;
      y[g][hour] = 1 - y[g][hour];
      try {
        AdversaryResult r = solve_adversary(sys, uset, CommitmentSchedule::from_y(y), adv);
        v1 = std::min(v1, r.worst_exposure);
      } catch (const SolveError&) {
        // infeasible neighbor commitment: no bound contribution
      }
    }
  }
  return std::isfinite(v1) ? v1 : 0.0;
}

namespace {

bool worst_case_congested(const PowerSystem& sys, const RtSolution& sol) {
  for (int l = 0; l < sys.n_lines(); ++l)
    for (size_t r = 0; r < sol.flow[l].size(); ++r)
      if (std::abs(sol.flow[l][r]) >= sys.lines[l].capacity - 1e-6) return true;
  return false;
}

struct MasterContext {
  Model model;
  DaModelIndex idx;
};

std::vector<Cut> generate_cuts(const PowerSystem& sys, const UncertaintySet& uset,
                               const CommitmentSchedule& y_star, const AdversaryResult& adv,
                               const RiskAwareOptions& opt, int iteration) {
  std::vector<Cut> cuts;
  for (CutFamily fam : opt.cut_families) {
    switch (fam) {
      case CutFamily::NoGood:
        cuts.push_back(make_no_good_cut(sys, y_star, adv.worst_exposure, iteration));
        break;
      case CutFamily::LShaped: {
        double v1 = min_one_neighbor_exposure(sys, uset, y_star, opt.adversary);
        cuts.push_back(make_l_shaped_cut(sys, y_star, adv.worst_exposure, v1, 0.0, iteration));
        break;
      }
      case CutFamily::Lbbd:
        cuts.push_back(make_lbbd_cut(sys, y_star, adv.per_hour_exposure, iteration));
        break;
    }
  }
  return cuts;
}

}  // namespace

RiskAwareSolution solve_risk_aware(const PowerSystem& sys, const UncertaintySet& uset,
                                   const CommitmentSchedule& det_schedule,
                                   const RiskAwareOptions& opt) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };
  auto remaining = [&] { return std::max(1e-3, opt.time_limit_sec - elapsed()); };

  RiskAwareSolution out;
  out.rho = opt.rho;

  // rho = 0: the exposure term vanishes; the deterministic schedule stands.
  if (opt.rho == 0.0) {
    out.schedule = det_schedule;
    out.da_dispatch = da_pricing_run(sys, det_schedule).dispatch;
    out.da_cost = out.da_dispatch.objective;
    out.v_hat = 0.0;
    out.total_objective = out.da_cost;
    out.iterations = 1;
    out.converged = true;
    return out;
  }

  DaBuildOptions build;
  build.with_vhat = true;
  build.rho = opt.rho;
  build.fix_outside_flex = &det_schedule;
  MasterContext mc;
  mc.idx = build_da_model(sys, mc.model, build);

  std::vector<CutRow> pool;
  auto tol_of = [&](double v_star) { return opt.tol_exposure_rel * (1.0 + v_star); };

  auto record = [&](int iter, double master_obj, double vhat_master, double adv_exposure,
                    int added) {
    out.trace.push_back({iter, master_obj, vhat_master, adv_exposure, added, elapsed()});
  };

  auto note_congestion = [&](const AdversaryResult& adv, int iter) {
    bool lbbd = false;
    for (CutFamily f : opt.cut_families) lbbd |= f == CutFamily::Lbbd;
    if (lbbd && worst_case_congested(sys, adv.worst_rt_solution))
      out.notes.push_back("iteration " + std::to_string(iter) +
                          ": worst case congested; LBBD cut kept but may overestimate");
  };

  // Iterative master/adversary loop. Runs the warm-up (root cuts) phase and,
  // in iterative mode, the main loop as well.
  int iteration = 0;
  CommitmentSchedule y_cur;
  SolveResult master_res;
  auto iterate = [&](int max_rounds, bool stop_when_converged) -> bool {
    for (int round = 0; round < max_rounds; ++round) {
      ++iteration;
      SolverOptions mopt;
      mopt.mip_gap = opt.gap;
      mopt.time_limit_sec = remaining();
      mopt.initial_cuts = pool;
      master_res = solve_mip(mc.model, mopt);
      if (!master_res.ok()) {
        if (master_res.status == SolveStatus::TimeLimit && !master_res.x.empty()) {
          // keep the incumbent; fall through to the convergence check
        } else {
          throw SolveError(std::string("risk-aware master: ") + to_string(master_res.status));
        }
      }
      y_cur = extract_schedule(sys, mc.idx, master_res.x);
      double vhat_master = master_res.x[mc.idx.vhat];
      AdversaryResult adv = solve_adversary(sys, uset, y_cur, opt.adversary);
      out.v_hat = adv.worst_exposure;
      if (vhat_master >= adv.worst_exposure - tol_of(adv.worst_exposure)) {
        record(iteration, master_res.objective, vhat_master, adv.worst_exposure, 0);
        out.da_dispatch = extract_da_dispatch(sys, mc.idx, master_res.x);
        return true;
      }
      auto cuts = generate_cuts(sys, uset, y_cur, adv, opt, iteration);
      note_congestion(adv, iteration);
      for (auto& c : cuts) {
        pool.push_back(c.to_row(mc.idx));
        out.cuts.push_back(std::move(c));
      }
      record(iteration, master_res.objective, vhat_master, adv.worst_exposure,
             static_cast<int>(cuts.size()));
      if (master_res.status == SolveStatus::TimeLimit || elapsed() > opt.time_limit_sec) {
        out.da_dispatch = extract_da_dispatch(sys, mc.idx, master_res.x);
        return false;
      }
      (void)stop_when_converged;
    }
    return false;
  };

  bool converged = false;
  if (opt.root_cuts > 0) converged = iterate(opt.root_cuts, true);

  if (!converged && opt.mode == DecompositionMode::Iterative) {
    converged = iterate(opt.max_iterations - iteration, true);
    if (!converged && iteration >= opt.max_iterations)
      throw SolveError("risk-aware: iteration limit without convergence");
  } else if (!converged && opt.mode == DecompositionMode::BranchAndCut) {
    SolverOptions mopt;
    mopt.mip_gap = opt.gap;
    mopt.time_limit_sec = remaining();
    mopt.initial_cuts = pool;
    mopt.lazy_cb = [&](const std::vector<double>& x) -> std::vector<CutRow> {
      CommitmentSchedule y_cand = extract_schedule(sys, mc.idx, x);
      double vhat_cand = x[mc.idx.vhat];
      AdversaryResult adv = solve_adversary(sys, uset, y_cand, opt.adversary);
      ++iteration;
      if (vhat_cand >= adv.worst_exposure - tol_of(adv.worst_exposure)) {
        record(iteration, 0.0, vhat_cand, adv.worst_exposure, 0);
        return {};
      }
      auto cuts = generate_cuts(sys, uset, y_cand, adv, opt, iteration);
      note_congestion(adv, iteration);
      std::vector<CutRow> rows;
      for (auto& c : cuts) {
        rows.push_back(c.to_row(mc.idx));
        out.cuts.push_back(std::move(c));
      }
      record(iteration, 0.0, vhat_cand, adv.worst_exposure, static_cast<int>(rows.size()));
      return rows;
    };
    master_res = solve_mip(mc.model, mopt);
    if (master_res.x.empty())
      throw SolveError(std::string("risk-aware branch-and-cut: ") + to_string(master_res.status));
    y_cur = extract_schedule(sys, mc.idx, master_res.x);
    out.da_dispatch = extract_da_dispatch(sys, mc.idx, master_res.x);
    converged = master_res.ok();
  }

  out.schedule = y_cur;
  out.converged = converged;
  out.iterations = iteration;

  // Report the adversary's exact value at the returned schedule.
  AdversaryResult final_adv = solve_adversary(sys, uset, out.schedule, opt.adversary);
  out.v_hat = final_adv.worst_exposure;
  out.da_cost = out.da_dispatch.objective;
  out.total_objective = out.da_cost + opt.rho * out.v_hat;
  double lower = master_res.objective;
  out.opt_gap = converged ? std::max(0.0, (out.total_objective - lower) /
                                              std::max(1.0, std::abs(out.total_objective)))
                          : std::max(master_res.mip_gap,
                                     (out.total_objective - lower) /
                                         std::max(1.0, std::abs(out.total_objective)));
  return out;
}

}  // namespace riskuc
