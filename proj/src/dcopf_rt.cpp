#include "riskuc/dcopf_rt.hpp"

#include <cmath>

namespace riskuc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

int reference_bus(const PowerSystem& sys) {
  int ref = 0;
  for (int b = 1; b < sys.n_buses(); ++b)
    if (sys.buses[b].id < sys.buses[ref].id) ref = b;
  return ref;
}

}  // namespace

Scenario Scenario::baseline(const PowerSystem& sys) {
  const int P = sys.time.n_rt_periods();
  Scenario s;
  s.d_rt.assign(sys.n_buses(), std::vector<double>(P, 0.0));
  for (int b = 0; b < sys.n_buses(); ++b)
    for (int r = 0; r < P; ++r) s.d_rt[b][r] = sys.buses[b].rt_forecast_load[r];
  s.p_cap_rt.assign(sys.n_wind(), std::vector<double>(P, 0.0));
  for (int k = 0; k < sys.n_wind(); ++k)
    for (int r = 0; r < P; ++r) s.p_cap_rt[k][r] = sys.wind_generators[k].rt_forecast_cap[r];
  return s;
}

void Scenario::check_dimensions(const PowerSystem& sys) const {
  const int P = sys.time.n_rt_periods();
  if (static_cast<int>(d_rt.size()) != sys.n_buses())
    throw ValidationError("scenario: d_rt bus count mismatch");
  for (const auto& row : d_rt)
    if (static_cast<int>(row.size()) != P)
      throw ValidationError("scenario: d_rt period count mismatch");
  if (static_cast<int>(p_cap_rt.size()) != sys.n_wind())
    throw ValidationError("scenario: p_cap_rt wind count mismatch");
  for (const auto& row : p_cap_rt)
    if (static_cast<int>(row.size()) != P)
      throw ValidationError("scenario: p_cap_rt period count mismatch");
  for (const auto& row : d_rt)
    for (double x : row)
      if (!(x >= 0.0) || !std::isfinite(x))
        throw ValidationError("scenario: negative or non-finite RT load");
  for (const auto& row : p_cap_rt)
    for (double x : row)
      if (!(x >= 0.0) || !std::isfinite(x))
        throw ValidationError("scenario: negative or non-finite RT wind cap");
}

RtAnchor make_rt_anchor(const PowerSystem& sys, const CommitmentSchedule& y_star) {
  RtAnchor a;
  const int prev_hour = sys.time.rt_anchor_hour();
  if (prev_hour < 0) return a;
  bool any_rt_ramp = false;
  for (const auto& g : sys.thermal_generators) any_rt_ramp |= g.has_rt_ramp();
  if (!any_rt_ramp) return a;

  PricingRun pr = da_pricing_run(sys, y_star);
  a.present = true;
  a.p_prev.resize(sys.n_thermal());
  a.y_prev.resize(sys.n_thermal());
  for (int g = 0; g < sys.n_thermal(); ++g) {
    a.p_prev[g] = pr.dispatch.p_thermal[g][prev_hour];
    a.y_prev[g] = y_star.y[g][prev_hour];
  }
  return a;
}

ExposureBreakdown consumer_exposure(const std::vector<std::vector<double>>& lmp,
                                    const std::vector<std::vector<double>>& d_rt,
                                    const std::vector<std::vector<double>>& da_load, int n_tp) {
  ExposureBreakdown e;
  const int B = static_cast<int>(lmp.size());
  const int P = B > 0 ? static_cast<int>(lmp[0].size()) : 0;
  e.per_bus.assign(B, 0.0);
  e.per_rt_hour.assign(P > 0 ? (P + n_tp - 1) / n_tp : 0, 0.0);
  for (int b = 0; b < B; ++b) {
    for (int r = 0; r < P; ++r) {
      double excess = d_rt[b][r] - da_load[b][r];
      if (excess <= 0.0) continue;
      double val = lmp[b][r] * excess / n_tp;
      e.per_bus[b] += val;
      e.per_rt_hour[r / n_tp] += val;
      e.total += val;
    }
  }
  return e;
}

std::vector<std::vector<double>> da_baseline_by_period(const PowerSystem& sys) {
  const int P = sys.time.n_rt_periods();
  std::vector<std::vector<double>> base(sys.n_buses(), std::vector<double>(P, 0.0));
  for (int b = 0; b < sys.n_buses(); ++b)
    for (int r = 0; r < P; ++r)
      base[b][r] = sys.buses[b].forecast_load[sys.time.rt_parent_hour(r)];
  return base;
}

double producer_surplus(const PowerSystem& sys, const CommitmentSchedule& y_star,
                        const RtSolution& sol) {
  const int P = sys.time.n_rt_periods();
  double surplus = 0.0;
  for (int g = 0; g < sys.n_thermal(); ++g) {
    const auto& gen = sys.thermal_generators[g];
    for (int r = 0; r < P; ++r) {
      int hour = sys.time.rt_parent_hour(r);
      if (y_star.y[g][hour] == 0) continue;
      double p = sol.p_thermal[g][r];
      double cost = gen.cost_at(p);
      surplus += (sol.lmp[gen.bus_idx][r] * p - cost) / sys.time.n_tp;
    }
  }
  for (int k = 0; k < sys.n_wind(); ++k) {
    const auto& wg = sys.wind_generators[k];
    for (int r = 0; r < P; ++r)
      surplus += sol.lmp[wg.bus_idx][r] * sol.p_wind[k][r] / sys.time.n_tp;  // wind cost is 0
  }
  return surplus;
}

RtSolution solve_dcopf(const PowerSystem& sys, const CommitmentSchedule& y_star,
                       const Scenario& omega, const RtAnchor* anchor, const SolverOptions& opt) {
  omega.check_dimensions(sys);
  const int G = sys.n_thermal(), W = sys.n_wind(), B = sys.n_buses(), L = sys.n_lines();
  const int P = sys.time.n_rt_periods();
  if (static_cast<int>(y_star.y.size()) != G ||
      (G > 0 && static_cast<int>(y_star.y[0].size()) != sys.time.n_da()))
    throw ValidationError("solve_dcopf: commitment schedule dimensions mismatch");

  RtAnchor local_anchor;
  if (anchor == nullptr) {
    local_anchor = make_rt_anchor(sys, y_star);
    anchor = &local_anchor;
  }

  Model model;
  auto block = [&](int count, double lb, double ub, double obj) {
    int first = -1;
    for (int i = 0; i < count; ++i) {
      int v = model.add_var(lb, ub, obj);
      if (i == 0) first = v;
    }
    return first;
  };
  const int p0 = block(G * P, 0, kInf, 0.0);
  const int h0 = block(G * P, 0, kInf, 1.0);
  const int pw0 = W > 0 ? block(W * P, 0, kInf, 0.0) : 0;
  const int cu0 = W > 0 ? block(W * P, 0, kInf, 0.0) : 0;
  const int f0 = L > 0 ? block(L * P, 0, 0, 0.0) : 0;
  const int th0 = block(B * P, -kInf, kInf, 0.0);
  const int un0 = block(B * P, 0, kInf, sys.voll_rt);
  auto vp = [&](int g, int r) { return p0 + g * P + r; };
  auto vh = [&](int g, int r) { return h0 + g * P + r; };
  auto vpw = [&](int k, int r) { return pw0 + k * P + r; };
  auto vcu = [&](int k, int r) { return cu0 + k * P + r; };
  auto vf = [&](int l, int r) { return f0 + l * P + r; };
  auto vth = [&](int b, int r) { return th0 + b * P + r; };
  auto vun = [&](int b, int r) { return un0 + b * P + r; };

  for (int l = 0; l < L; ++l)
    for (int r = 0; r < P; ++r)
      model.set_bounds(vf(l, r), -sys.lines[l].capacity, sys.lines[l].capacity);
  const int ref = reference_bus(sys);
  for (int r = 0; r < P; ++r) model.set_bounds(vth(ref, r), 0.0, 0.0);

  // fixed commitment: production bounds become variable bounds
  for (int g = 0; g < G; ++g) {
    const auto& gen = sys.thermal_generators[g];
    for (int r = 0; r < P; ++r) {
      int on = y_star.y[g][sys.time.rt_parent_hour(r)];
      model.set_bounds(vp(g, r), gen.p_min * on, gen.p_max * on);
      // cost epigraph with y* folded into the rhs
      for (const auto& seg : gen.cost_segments)
        model.add_row({{vh(g, r), 1.0}, {vp(g, r), -seg.slope}}, RowSense::GreaterEqual,
                      seg.intercept * on);
    }
  }

  // load balance per (bus, period); duals are the RT LMPs
  std::vector<int> balance(B * P, -1);
  for (int b = 0; b < B; ++b) {
    for (int r = 0; r < P; ++r) {
      std::vector<LinearTerm> terms;
      for (int g = 0; g < G; ++g)
        if (sys.thermal_generators[g].bus_idx == b) terms.push_back({vp(g, r), 1.0});
      for (int k = 0; k < W; ++k)
        if (sys.wind_generators[k].bus_idx == b) terms.push_back({vpw(k, r), 1.0});
      terms.push_back({vun(b, r), 1.0});
      for (int l = 0; l < L; ++l) {
        if (sys.lines[l].to_idx == b) terms.push_back({vf(l, r), 1.0});
        if (sys.lines[l].from_idx == b) terms.push_back({vf(l, r), -1.0});
      }
      balance[b * P + r] = model.add_row(std::move(terms), RowSense::Equal, omega.d_rt[b][r]);
    }
  }

  for (int l = 0; l < L; ++l) {
    const auto& ln = sys.lines[l];
    for (int r = 0; r < P; ++r)
      model.add_row({{vf(l, r), 1.0},
                     {vth(ln.from_idx, r), -ln.susceptance},
                     {vth(ln.to_idx, r), ln.susceptance}},
                    RowSense::Equal, 0.0);
  }

  for (int k = 0; k < W; ++k)
    for (int r = 0; r < P; ++r)
      model.add_row({{vpw(k, r), 1.0}, {vcu(k, r), 1.0}}, RowSense::Equal, omega.p_cap_rt[k][r]);

  // prorated ramping: M = ramp_rt when on in both periods, else p_min;
  // unbounded-sentinel generators get no rows (Appendix-A semantics)
  for (int g = 0; g < G; ++g) {
    const auto& gen = sys.thermal_generators[g];
    if (!gen.has_rt_ramp()) continue;
    for (int r = 0; r < P; ++r) {
      int hour = sys.time.rt_parent_hour(r);
      int on_now = y_star.y[g][hour];
      if (r == 0) {
        if (!anchor->present) continue;
        int on_prev = anchor->y_prev[g];
        double m = (on_prev == 1 && on_now == 1) ? gen.ramp_rt : gen.p_min;
        model.add_row({{vp(g, r), 1.0}}, RowSense::LessEqual, anchor->p_prev[g] + m);
        model.add_row({{vp(g, r), -1.0}}, RowSense::LessEqual, m - anchor->p_prev[g]);
      } else {
        int prev_hour = sys.time.rt_parent_hour(r - 1);
        if (prev_hour != hour && prev_hour + 1 != hour) continue;  // window gap
        int on_prev = y_star.y[g][prev_hour];
        double m = (on_prev == 1 && on_now == 1) ? gen.ramp_rt : gen.p_min;
        model.add_row({{vp(g, r), 1.0}, {vp(g, r - 1), -1.0}}, RowSense::LessEqual, m);
        model.add_row({{vp(g, r - 1), 1.0}, {vp(g, r), -1.0}}, RowSense::LessEqual, m);
      }
    }
  }

  SolveResult res = solve_lp(model, opt);
  RtSolution sol;
  sol.status = res.status;
  if (res.status != SolveStatus::Optimal) return sol;

  auto grab = [&](int base, int count) {
    std::vector<std::vector<double>> out(count, std::vector<double>(P, 0.0));
    for (int i = 0; i < count; ++i)
      for (int r = 0; r < P; ++r) out[i][r] = res.x[base + i * P + r];
    return out;
  };
  sol.p_thermal = grab(p0, G);
  sol.h = grab(h0, G);
  sol.p_wind = W > 0 ? grab(pw0, W) : std::vector<std::vector<double>>{};
  sol.curtail = W > 0 ? grab(cu0, W) : std::vector<std::vector<double>>{};
  sol.flow = L > 0 ? grab(f0, L) : std::vector<std::vector<double>>{};
  sol.theta = grab(th0, B);
  sol.unmet = grab(un0, B);
  sol.objective = res.objective;
  sol.dual_gap = std::abs(res.objective - res.dual_objective);
  sol.lmp.assign(B, std::vector<double>(P, 0.0));
  for (int b = 0; b < B; ++b)
    for (int r = 0; r < P; ++r) sol.lmp[b][r] = res.duals[balance[b * P + r]];

  sol.exposure = consumer_exposure(sol.lmp, omega.d_rt, da_baseline_by_period(sys),
                                   sys.time.n_tp);
  sol.producer_surplus = producer_surplus(sys, y_star, sol);
  return sol;
}

}  // namespace riskuc
