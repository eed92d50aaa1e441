#include "riskuc/scuc_da.hpp"

#include <cmath>

namespace riskuc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CommitmentSchedule CommitmentSchedule::from_y(std::vector<std::vector<int>> y) {
  CommitmentSchedule s;
  s.y = std::move(y);
  const int G = s.n_gens(), T = s.n_hours();
  s.v.assign(G, std::vector<int>(T, 0));
  s.w.assign(G, std::vector<int>(T, 0));
  for (int g = 0; g < G; ++g) {
    for (int t = 0; t < T; ++t) {
      int prev = t == 0 ? 0 : s.y[g][t - 1];  // cold start
      int d = s.y[g][t] - prev;
      s.v[g][t] = d > 0 ? 1 : 0;
      s.w[g][t] = d < 0 ? 1 : 0;
    }
  }
  return s;
}

double DaDispatch::cost_breakdown(const PowerSystem& sys, const CommitmentSchedule& s) const {
  double total = 0.0;
  const int T = sys.time.n_da();
  for (int g = 0; g < sys.n_thermal(); ++g) {
    const auto& gen = sys.thermal_generators[g];
    for (int t = 0; t < T; ++t)
      total += h[g][t] + gen.startup_cost * s.v[g][t] + gen.shutdown_cost * s.w[g][t];
  }
  for (int b = 0; b < sys.n_buses(); ++b)
    for (int t = 0; t < T; ++t) total += sys.voll_da * unmet[b][t];
  return total;
}

namespace {

int reference_bus(const PowerSystem& sys) {
  int ref = 0;
  for (int b = 1; b < sys.n_buses(); ++b)
    if (sys.buses[b].id < sys.buses[ref].id) ref = b;
  return ref;
}

}  // namespace

DaModelIndex build_da_model(const PowerSystem& sys, Model& model, const DaBuildOptions& opts) {
  DaModelIndex idx;
  idx.n_g = sys.n_thermal();
  idx.n_w = sys.n_wind();
  idx.n_b = sys.n_buses();
  idx.n_l = sys.n_lines();
  idx.n_t = sys.time.n_da();
  const int G = idx.n_g, W = idx.n_w, B = idx.n_b, L = idx.n_l, T = idx.n_t;

  auto block = [&](int count, double lb, double ub, double obj, VarType type,
                   const char* tag) {
    int first = -1;
    for (int i = 0; i < count; ++i) {
      int v = model.add_var(lb, ub, obj, type, std::string(tag) + std::to_string(i));
      if (i == 0) first = v;
    }
    return first;
  };

  idx.y0 = block(G * T, 0, 1, 0.0, VarType::Binary, "y");
  idx.v0 = block(G * T, 0, 1, 0.0, VarType::Binary, "v");
  idx.w0 = block(G * T, 0, 1, 0.0, VarType::Binary, "w");
  for (int g = 0; g < G; ++g) {
    const auto& gen = sys.thermal_generators[g];
    for (int t = 0; t < T; ++t) {
      model.set_obj_coeff(idx.v(g, t), gen.startup_cost);
      model.set_obj_coeff(idx.w(g, t), gen.shutdown_cost);
    }
  }
  idx.p0 = block(G * T, 0, kInf, 0.0, VarType::Continuous, "p");
  idx.h0 = block(G * T, 0, kInf, 1.0, VarType::Continuous, "h");
  idx.pw0 = W > 0 ? block(W * T, 0, kInf, 0.0, VarType::Continuous, "pw") : 0;
  idx.cu0 = W > 0 ? block(W * T, 0, kInf, 0.0, VarType::Continuous, "cu") : 0;
  idx.f0 = L > 0 ? block(L * T, 0, 0, 0.0, VarType::Continuous, "f") : 0;
  for (int l = 0; l < L; ++l)
    for (int t = 0; t < T; ++t)
      model.set_bounds(idx.f(l, t), -sys.lines[l].capacity, sys.lines[l].capacity);
  idx.th0 = block(B * T, -kInf, kInf, 0.0, VarType::Continuous, "th");
  idx.un0 = block(B * T, 0, kInf, sys.voll_da, VarType::Continuous, "un");

  const int ref = reference_bus(sys);
  for (int t = 0; t < T; ++t) model.set_bounds(idx.th(ref, t), 0.0, 0.0);

  // cost epigraph per (segment, thermal gen, hour)
  for (int g = 0; g < G; ++g) {
    const auto& gen = sys.thermal_generators[g];
    for (int t = 0; t < T; ++t)
      for (const auto& seg : gen.cost_segments)
        model.add_row({{idx.h(g, t), 1.0}, {idx.p(g, t), -seg.slope}, {idx.y(g, t), -seg.intercept}},
                      RowSense::GreaterEqual, 0.0);
  }

  // load balance per (bus, hour); duals are the DA LMPs
  idx.balance_rows.assign(B * T, -1);
  for (int b = 0; b < B; ++b) {
    for (int t = 0; t < T; ++t) {
      std::vector<LinearTerm> terms;
      for (int g = 0; g < G; ++g)
        if (sys.thermal_generators[g].bus_idx == b) terms.push_back({idx.p(g, t), 1.0});
      for (int k = 0; k < W; ++k)
        if (sys.wind_generators[k].bus_idx == b) terms.push_back({idx.pw(k, t), 1.0});
      terms.push_back({idx.un(b, t), 1.0});
      for (int l = 0; l < L; ++l) {
        if (sys.lines[l].to_idx == b) terms.push_back({idx.f(l, t), 1.0});
        if (sys.lines[l].from_idx == b) terms.push_back({idx.f(l, t), -1.0});
      }
      idx.balance_rows[b * T + t] =
          model.add_row(std::move(terms), RowSense::Equal, sys.buses[b].forecast_load[t],
                        "bal_b" + std::to_string(b) + "_t" + std::to_string(t));
    }
  }

  // DC flow definition
  for (int l = 0; l < L; ++l) {
    const auto& ln = sys.lines[l];
    for (int t = 0; t < T; ++t)
      model.add_row({{idx.f(l, t), 1.0},
                     {idx.th(ln.from_idx, t), -ln.susceptance},
                     {idx.th(ln.to_idx, t), ln.susceptance}},
                    RowSense::Equal, 0.0);
  }

  // startup/shutdown linking; cold start makes v_g1 = y_g1
  for (int g = 0; g < G; ++g) {
    model.add_row({{idx.v(g, 0), 1.0}, {idx.w(g, 0), -1.0}, {idx.y(g, 0), -1.0}}, RowSense::Equal,
                  0.0);
    for (int t = 1; t < T; ++t)
      model.add_row({{idx.v(g, t), 1.0},
                     {idx.w(g, t), -1.0},
                     {idx.y(g, t), -1.0},
                     {idx.y(g, t - 1), 1.0}},
                    RowSense::Equal, 0.0);
  }

  // production bounds
  for (int g = 0; g < G; ++g) {
    const auto& gen = sys.thermal_generators[g];
    for (int t = 0; t < T; ++t) {
      model.add_row({{idx.p(g, t), 1.0}, {idx.y(g, t), -gen.p_max}}, RowSense::LessEqual, 0.0);
      model.add_row({{idx.p(g, t), 1.0}, {idx.y(g, t), -gen.p_min}}, RowSense::GreaterEqual, 0.0);
    }
  }
  for (int k = 0; k < W; ++k)
    for (int t = 0; t < T; ++t)
      model.add_row({{idx.pw(k, t), 1.0}, {idx.cu(k, t), 1.0}}, RowSense::Equal,
                    sys.wind_generators[k].forecast_cap[t]);

  // hourly ramping for t > 1; generators with the unbounded sentinel get no rows
  for (int g = 0; g < G; ++g) {
    const auto& gen = sys.thermal_generators[g];
    if (!gen.has_hourly_ramp()) continue;
    for (int t = 1; t < T; ++t) {
      model.add_row({{idx.p(g, t), 1.0},
                     {idx.p(g, t - 1), -1.0},
                     {idx.y(g, t - 1), -gen.ramp_hourly},
                     {idx.v(g, t), -gen.p_min}},
                    RowSense::LessEqual, 0.0);
      model.add_row({{idx.p(g, t - 1), 1.0},
                     {idx.p(g, t), -1.0},
                     {idx.y(g, t), -gen.ramp_hourly},
                     {idx.w(g, t), -gen.p_min}},
                    RowSense::LessEqual, 0.0);
    }
  }

  if (opts.with_vhat) {
    idx.vhat = model.add_var(0.0, kInf, opts.rho, VarType::Continuous, "vhat");
  }

  if (opts.fix_outside_flex) {
    const auto& det = *opts.fix_outside_flex;
    for (int t = 0; t < T; ++t) {
      if (sys.time.hour_in_flex(t)) continue;
      for (int g = 0; g < G; ++g) {
        double val = det.y[g][t];
        model.set_bounds(idx.y(g, t), val, val);
      }
    }
  }
  return idx;
}

CommitmentSchedule extract_schedule(const PowerSystem& sys, const DaModelIndex& idx,
                                    const std::vector<double>& x) {
  std::vector<std::vector<int>> y(idx.n_g, std::vector<int>(idx.n_t, 0));
  for (int g = 0; g < idx.n_g; ++g)
    for (int t = 0; t < idx.n_t; ++t) y[g][t] = x[idx.y(g, t)] >= 0.5 ? 1 : 0;
  (void)sys;
  return CommitmentSchedule::from_y(std::move(y));
}

DaDispatch extract_da_dispatch(const PowerSystem& sys, const DaModelIndex& idx,
                               const std::vector<double>& x) {
  DaDispatch d;
  auto grab = [&](int base, int count) {
    std::vector<std::vector<double>> out(count, std::vector<double>(idx.n_t, 0.0));
    for (int i = 0; i < count; ++i)
      for (int t = 0; t < idx.n_t; ++t) out[i][t] = x[base + i * idx.n_t + t];
    return out;
  };
  d.p_thermal = grab(idx.p0, idx.n_g);
  d.h = grab(idx.h0, idx.n_g);
  d.p_wind = idx.n_w > 0 ? grab(idx.pw0, idx.n_w) : std::vector<std::vector<double>>{};
  d.curtail = idx.n_w > 0 ? grab(idx.cu0, idx.n_w) : std::vector<std::vector<double>>{};
  d.flow = idx.n_l > 0 ? grab(idx.f0, idx.n_l) : std::vector<std::vector<double>>{};
  d.theta = grab(idx.th0, idx.n_b);
  d.unmet = grab(idx.un0, idx.n_b);
  d.objective = d.cost_breakdown(sys, extract_schedule(sys, idx, x));
  return d;
}

DeterministicSolution solve_deterministic(const PowerSystem& sys, double gap,
                                          double time_limit_sec) {
  Model model;
  DaModelIndex idx = build_da_model(sys, model);
  SolverOptions opt;
  opt.mip_gap = gap;
  opt.time_limit_sec = time_limit_sec;
  SolveResult res = solve_mip(model, opt);
  DeterministicSolution sol;
  sol.result = res;
  if (!res.ok() && res.status != SolveStatus::TimeLimit)
    throw SolveError(std::string("deterministic SCUC: ") + to_string(res.status));
  if (res.x.empty()) throw SolveError("deterministic SCUC: no incumbent at time limit");
  sol.schedule = extract_schedule(sys, idx, res.x);
  sol.dispatch = extract_da_dispatch(sys, idx, res.x);
  return sol;
}

PricingRun da_pricing_run(const PowerSystem& sys, const CommitmentSchedule& fixed) {
  Model model;
  DaModelIndex idx = build_da_model(sys, model);
  const int T = idx.n_t;
  for (int g = 0; g < idx.n_g; ++g) {
    for (int t = 0; t < T; ++t) {
      model.set_bounds(idx.y(g, t), fixed.y[g][t], fixed.y[g][t]);
      model.set_bounds(idx.v(g, t), fixed.v[g][t], fixed.v[g][t]);
      model.set_bounds(idx.w(g, t), fixed.w[g][t], fixed.w[g][t]);
    }
  }
  SolveResult res = solve_lp(model);
  if (res.status != SolveStatus::Optimal)
    throw SolveError(std::string("pricing run: fixing is ") + to_string(res.status));
  PricingRun pr;
  pr.result = res;
  pr.dispatch = extract_da_dispatch(sys, idx, res.x);
  pr.lmp.assign(idx.n_b, std::vector<double>(T, 0.0));
  pr.payment.assign(idx.n_b, std::vector<double>(T, 0.0));
  for (int b = 0; b < idx.n_b; ++b) {
    for (int t = 0; t < T; ++t) {
      pr.lmp[b][t] = res.duals[idx.balance(b, t)];
      pr.payment[b][t] = pr.lmp[b][t] * sys.buses[b].forecast_load[t];
    }
  }
  return pr;
}

}  // namespace riskuc
