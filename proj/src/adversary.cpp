#include "riskuc/adversary.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace riskuc {

namespace {

// Per-hour pattern expansion: each RT hour independently picks one of the
// base grids; the odometer enumerates all combinations.
std::vector<StressorVector> expand_per_hour(const std::vector<StressorVector>& base,
                                            const UncertaintySet& uset) {
  const int H = uset.n_rt_hours;
  const int K = uset.K;
  const int n_tp = uset.n_tp;
  std::vector<StressorVector> out;
  std::vector<size_t> pick(H, 0);
  while (true) {
    StressorVector s = base[0];
    for (int h = 0; h < H; ++h) {
      const StressorVector& src = base[pick[h]];
      for (int k = 0; k < K; ++k)
        for (int r = h * n_tp; r < (h + 1) * n_tp; ++r) {
          s.alpha_d[k][r] = src.alpha_d[k][r];
          if (!s.alpha_w.empty()) s.alpha_w[k][r] = src.alpha_w[k][r];
        }
    }
    out.push_back(std::move(s));
    int h = H - 1;
    while (h >= 0 && ++pick[h] == base.size()) pick[h--] = 0;
    if (h < 0) break;
  }
  return out;
}

}  // namespace

AdversaryResult solve_adversary(const PowerSystem& sys, const UncertaintySet& uset,
                                const CommitmentSchedule& y_star, const AdversaryOptions& opt) {
  std::vector<StressorVector> grids = grid_points(uset);
  if (opt.per_hour_patterns && uset.n_rt_hours > 1) grids = expand_per_hour(grids, uset);

  const RtAnchor anchor = make_rt_anchor(sys, y_star);
  const int n = static_cast<int>(grids.size());

  struct Eval {
    RtSolution sol;
    Scenario omega;
    bool solved = false;
    std::string error;
  };
  std::vector<Eval> evals(n);

  auto eval_one = [&](int i) {
    Eval& e = evals[i];
    try {
      e.omega = realize(uset, grids[i], NegativePolicy::ClipZero, /*enforce_sum=*/false);
      e.sol = solve_dcopf(sys, y_star, e.omega, &anchor, opt.solver);
      e.solved = e.sol.status == SolveStatus::Optimal;
      if (!e.solved) e.error = to_string(e.sol.status);
    } catch (const std::exception& ex) {
      e.solved = false;
      e.error = ex.what();
    }
  };

  const int workers = std::max(1, opt.workers);
  if (workers == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) eval_one(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(workers, n); ++w)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) eval_one(i);
      });
    for (auto& th : pool) th.join();
  }

  AdversaryResult res;
  res.grid_log.reserve(n);
  int failures = 0;
  std::string first_error;
  for (int i = 0; i < n; ++i) {
    GridLogEntry log;
    log.grid_index = i;
    log.stressor = grids[i];
    log.solved = evals[i].solved;
    log.exposure = evals[i].solved ? evals[i].sol.exposure.total : 0.0;
    res.grid_log.push_back(std::move(log));
    if (!evals[i].solved) {
      ++failures;
      if (first_error.empty()) first_error = evals[i].error;
      continue;
    }
    if (res.worst_index < 0 || evals[i].sol.exposure.total > res.worst_exposure) {
      res.worst_index = i;
      res.worst_exposure = evals[i].sol.exposure.total;
    }
  }
  if (res.worst_index < 0)
    throw SolveError("adversary: every grid DCOPF failed (" + std::to_string(failures) + " of " +
                     std::to_string(n) + "; first: " + first_error + ")");

  Eval& best = evals[res.worst_index];
  res.worst_scenario = std::move(best.omega);
  res.worst_rt_solution = std::move(best.sol);
  res.worst_stressor = grids[res.worst_index];
  res.per_hour_exposure = res.worst_rt_solution.exposure.per_rt_hour;
  return res;
}

}  // namespace riskuc
