#include "riskuc/evaluation.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace riskuc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier compensated summation; keeps paired reports reproducible.
struct KahanSum {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) c += (sum - t) + x;
    else c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

double norm_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Uniform direction on the unit sphere S^{K-1}.
std::vector<double> sphere_dir(int K, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<double> u(K);
  double n = 0.0;
  do {
    for (int k = 0; k < K; ++k) u[k] = N(rng);
    n = norm_of(u);
  } while (n < 1e-12);
  for (double& x : u) x /= n;
  return u;
}

// Uniform sample on the spherical cap of half-angle `angle` around `center`,
// at radius ||center||, by rejection from the sphere.
std::vector<double> cap_sample(const std::vector<double>& center, double angle,
                               std::mt19937_64& rng) {
  const int K = static_cast<int>(center.size());
  const double r = norm_of(center);
  if (r < 1e-12) throw ValidationError("cone sampling requires a nonzero center");
  if (angle <= 1e-12) return center;  // degenerate cone
  std::vector<double> axis(center);
  for (double& x : axis) x /= r;
  const double cos_min = std::cos(angle);
  while (true) {
    std::vector<double> u = sphere_dir(K, rng);
    double dot = 0.0;
    for (int k = 0; k < K; ++k) dot += u[k] * axis[k];
    if (dot >= cos_min) {
      for (double& x : u) x *= r;
      return u;
    }
  }
}

}  // namespace

StressorVector regrain_stressor(const StressorVector& s, int n_rt_hours, int n_tp_to) {
  const int K = static_cast<int>(s.alpha_d.size());
  const int from_P = K > 0 ? static_cast<int>(s.alpha_d[0].size()) : 0;
  const int from_tp = n_rt_hours > 0 ? from_P / n_rt_hours : 1;
  StressorVector out = StressorVector::zeros(K, n_rt_hours * n_tp_to, !s.alpha_w.empty());
  for (int k = 0; k < K; ++k) {
    for (int h = 0; h < n_rt_hours; ++h) {
      double vd = s.alpha_d[k][h * from_tp];  // hour-leading value
      double vw = s.alpha_w.empty() ? 0.0 : s.alpha_w[k][h * from_tp];
      for (int r = h * n_tp_to; r < (h + 1) * n_tp_to; ++r) {
        out.alpha_d[k][r] = vd;
        if (!out.alpha_w.empty()) out.alpha_w[k][r] = vw;
      }
    }
  }
  return out;
}

PowerSystem with_rt_granularity(const PowerSystem& sys, int n_tp) {
  if (n_tp < 1) throw ValidationError("with_rt_granularity: n_tp must be >= 1");
  PowerSystem out = sys;
  out.time.n_tp = n_tp;
  const int P = out.time.n_rt_periods();
  for (auto& b : out.buses) {
    b.rt_forecast_load.assign(P, 0.0);
    for (int r = 0; r < P; ++r) b.rt_forecast_load[r] = b.forecast_load[out.time.rt_parent_hour(r)];
  }
  for (auto& w : out.wind_generators) {
    w.rt_forecast_cap.assign(P, 0.0);
    for (int r = 0; r < P; ++r) w.rt_forecast_cap[r] = w.forecast_cap[out.time.rt_parent_hour(r)];
  }
  out.validate();
  return out;
}

std::vector<StressorVector> sample_stressors(const UncertaintySet& uset, const SampleSpec& spec) {
  if (spec.n_samples < 1) throw ValidationError("sample spec: n_samples must be >= 1");
  const int K = uset.K;
  const int P = uset.n_periods();
  const bool with_wind = !uset.base_wind.empty();
  std::mt19937_64 rng(spec.seed);
  std::vector<StressorVector> out;
  out.reserve(spec.n_samples);

  if (spec.method == SampleMethod::Uniform) {
    for (int s = 0; s < spec.n_samples; ++s) {
      StressorVector sv = StressorVector::zeros(K, P, with_wind);
      std::uniform_real_distribution<double> Ud(-uset.load.R, uset.load.R);
      std::uniform_real_distribution<double> Uw(-uset.wind.R, uset.wind.R);
      for (int k = 0; k < K; ++k)
        for (int r = 0; r < P; ++r) {
          sv.alpha_d[k][r] = uset.load.R > 0 ? Ud(rng) : 0.0;
          if (with_wind) sv.alpha_w[k][r] = uset.wind.R > 0 ? Uw(rng) : 0.0;
        }
      out.push_back(std::move(sv));
    }
    return out;
  }

  // cone method
  const StressorVector& c = spec.center;
  if (static_cast<int>(c.alpha_d.size()) != K ||
      (K > 0 && static_cast<int>(c.alpha_d[0].size()) != P))
    throw ValidationError("cone sampling: center dimensions do not match the uncertainty set");
  for (int s = 0; s < spec.n_samples; ++s) {
    StressorVector sv = StressorVector::zeros(K, P, with_wind);
    auto fill_kind = [&](const std::vector<std::vector<double>>& center_kind,
                         std::vector<std::vector<double>>& dest) {
      if (spec.joint_cone) {
        std::vector<double> flat(K * P);
        for (int k = 0; k < K; ++k)
          for (int r = 0; r < P; ++r) flat[k * P + r] = center_kind[k][r];
        std::vector<double> smp = cap_sample(flat, spec.cone_angle, rng);
        for (int k = 0; k < K; ++k)
          for (int r = 0; r < P; ++r) dest[k][r] = smp[k * P + r];
      } else {
        for (int r = 0; r < P; ++r) {
          std::vector<double> ctr(K);
          for (int k = 0; k < K; ++k) ctr[k] = center_kind[k][r];
          std::vector<double> smp = cap_sample(ctr, spec.cone_angle, rng);
          for (int k = 0; k < K; ++k) dest[k][r] = smp[k];
        }
      }
    };
    fill_kind(c.alpha_d, sv.alpha_d);
    if (with_wind) fill_kind(c.alpha_w, sv.alpha_w);
    out.push_back(std::move(sv));
  }
  return out;
}

EvalReport evaluate_schedules(
    const PowerSystem& sys,
    const std::vector<std::pair<std::string, CommitmentSchedule>>& schedules,
    const UncertaintySet& uset, const EvalOptions& opt) {
  if (schedules.empty()) throw ValidationError("evaluate_schedules: no schedules given");

  const PowerSystem eval_sys =
      opt.eval_n_tp > 0 && opt.eval_n_tp != sys.time.n_tp ? with_rt_granularity(sys, opt.eval_n_tp)
                                                          : sys;
  const UncertaintySet eval_uset =
      eval_sys.time.n_tp != uset.n_tp ? uset.regrain(eval_sys) : uset;

  SampleSpec spec = opt.spec;
  if (spec.method == SampleMethod::Cone && !spec.center.alpha_d.empty() &&
      static_cast<int>(spec.center.alpha_d[0].size()) != eval_uset.n_periods())
    spec.center = regrain_stressor(spec.center, eval_uset.n_rt_hours, eval_uset.n_tp);

  const std::vector<StressorVector> samples = sample_stressors(eval_uset, spec);
  const int S = static_cast<int>(samples.size());
  const int B = eval_sys.n_buses();
  const int P = eval_sys.time.n_rt_periods();
  const int n_sched = static_cast<int>(schedules.size());

  struct SampleOutcome {
    bool ok = false;
    double exposure = 0.0;
    double surplus = 0.0;
    std::vector<double> lmp_bus_mean;  // per bus, averaged over periods
  };
  // outcomes[schedule][sample]
  std::vector<std::vector<SampleOutcome>> outcomes(n_sched, std::vector<SampleOutcome>(S));

  EvalReport rep;
  for (int si = 0; si < n_sched; ++si) {
    const auto& [name, sched] = schedules[si];
    ScheduleStats st;
    st.name = name;
    PricingRun pr = da_pricing_run(eval_sys, sched);
    st.da_cost = pr.dispatch.objective;
    st.da_lmp.assign(B, 0.0);
    for (int b = 0; b < B; ++b) {
      KahanSum s;
      for (int t = 0; t < eval_sys.time.n_da(); ++t) s.add(pr.lmp[b][t]);
      st.da_lmp[b] = s.value() / eval_sys.time.n_da();
    }
    rep.per_schedule.push_back(std::move(st));

    const RtAnchor anchor = make_rt_anchor(eval_sys, sched);
    auto eval_sample = [&](int s) {
      SampleOutcome& o = outcomes[si][s];
      try {
        Scenario omega = realize(eval_uset, samples[s], NegativePolicy::ClipZero,
                                 /*enforce_sum=*/false);
        RtSolution sol = solve_dcopf(eval_sys, sched, omega, &anchor);
        if (sol.status != SolveStatus::Optimal) return;
        o.ok = true;
        o.exposure = sol.exposure.total;
        o.surplus = sol.producer_surplus;
        o.lmp_bus_mean.assign(B, 0.0);
        for (int b = 0; b < B; ++b) {
          KahanSum ks;
          for (int r = 0; r < P; ++r) ks.add(sol.lmp[b][r]);
          o.lmp_bus_mean[b] = ks.value() / P;
        }
      } catch (const std::exception&) {
        o.ok = false;
      }
    };
    const int workers = std::max(1, opt.workers);
    if (workers == 1) {
      for (int s = 0; s < S; ++s) eval_sample(s);
    } else {
      std::atomic<int> next{0};
      std::vector<std::thread> pool;
      for (int w = 0; w < std::min(workers, S); ++w)
        pool.emplace_back([&] {
          for (int s = next.fetch_add(1); s < S; s = next.fetch_add(1)) eval_sample(s);
        });
      for (auto& th : pool) th.join();
    }
  }

  // pairwise exclusion of failed samples
  std::vector<bool> keep(S, true);
  for (int s = 0; s < S; ++s)
    for (int si = 0; si < n_sched; ++si)
      if (!outcomes[si][s].ok) keep[s] = false;
  int used = 0;
  for (int s = 0; s < S; ++s) used += keep[s] ? 1 : 0;
  rep.n_samples_used = used;
  rep.n_samples_failed = S - used;
  if (used == 0) throw SolveError("evaluate_schedules: every sample failed for some schedule");

  for (int si = 0; si < n_sched; ++si) {
    ScheduleStats& st = rep.per_schedule[si];
    KahanSum exp_sum, sur_sum;
    std::vector<KahanSum> lmp_sum(B);
    for (int s = 0; s < S; ++s) {
      if (!keep[s]) continue;
      exp_sum.add(outcomes[si][s].exposure);
      sur_sum.add(outcomes[si][s].surplus);
      for (int b = 0; b < B; ++b) lmp_sum[b].add(outcomes[si][s].lmp_bus_mean[b]);
    }
    st.mean_exposure = exp_sum.value() / used;
    st.mean_surplus = sur_sum.value() / used;
    st.mean_total_cost = st.da_cost + st.mean_exposure;
    st.mean_rt_lmp.assign(B, 0.0);
    for (int b = 0; b < B; ++b) st.mean_rt_lmp[b] = lmp_sum[b].value() / used;
    if (used > 1) {
      KahanSum var;
      for (int s = 0; s < S; ++s) {
        if (!keep[s]) continue;
        double cost = st.da_cost + outcomes[si][s].exposure;
        double d = cost - st.mean_total_cost;
        var.add(d * d);
      }
      st.cost_std = std::sqrt(var.value() / (used - 1));
    }
  }

  rep.save.assign(n_sched, std::vector<double>(n_sched, 0.0));
  rep.cost_red.assign(n_sched, std::vector<double>(n_sched, 0.0));
  rep.exposure_diff.assign(n_sched, std::vector<double>(n_sched, 0.0));
  for (int i = 0; i < n_sched; ++i) {
    for (int j = 0; j < n_sched; ++j) {
      rep.save[i][j] = rep.per_schedule[j].mean_total_cost - rep.per_schedule[i].mean_total_cost;
      rep.cost_red[i][j] = rep.per_schedule[j].mean_total_cost != 0.0
                               ? rep.save[i][j] / rep.per_schedule[j].mean_total_cost
                               : 0.0;
      rep.exposure_diff[i][j] =
          rep.per_schedule[i].mean_exposure - rep.per_schedule[j].mean_exposure;
    }
  }
  return rep;
}

StochasticSolution solve_stochastic_scuc(const PowerSystem& sys,
                                         const std::vector<Scenario>& scenarios, double rho_sto,
                                         double beta, double gap, double time_limit_sec,
                                         const CommitmentSchedule* warm_start,
                                         const CommitmentSchedule* fix_schedule) {
  if (scenarios.empty()) throw ValidationError("stochastic SCUC: scenarios must be nonempty");
  if (!(beta > 0.0 && beta < 1.0)) throw ValidationError("stochastic SCUC: beta must be in (0,1)");
  if (rho_sto < 0.0) throw ValidationError("stochastic SCUC: rho_sto must be >= 0");
  for (const auto& s : scenarios) s.check_dimensions(sys);

  const int S = static_cast<int>(scenarios.size());
  const int G = sys.n_thermal(), W = sys.n_wind(), B = sys.n_buses(), L = sys.n_lines();
  const int T = sys.time.n_da();
  const int n_tp = sys.time.n_tp;

  // hourly scenario data: per-period values averaged into their hour
  auto hour_load = [&](int s, int b, int t) {
    for (int hi = 0; hi < sys.time.n_rt_hours(); ++hi) {
      if (sys.time.hour_index(sys.time.rt_hours[hi]) != t) continue;
      double sum = 0.0;
      for (int r = hi * n_tp; r < (hi + 1) * n_tp; ++r) sum += scenarios[s].d_rt[b][r];
      return sum / n_tp;
    }
    return sys.buses[b].forecast_load[t];
  };
  auto hour_wind = [&](int s, int k, int t) {
    for (int hi = 0; hi < sys.time.n_rt_hours(); ++hi) {
      if (sys.time.hour_index(sys.time.rt_hours[hi]) != t) continue;
      double sum = 0.0;
      for (int r = hi * n_tp; r < (hi + 1) * n_tp; ++r) sum += scenarios[s].p_cap_rt[k][r];
      return sum / n_tp;
    }
    return sys.wind_generators[k].forecast_cap[t];
  };

  Model m;
  auto block = [&](int count, double lb, double ub, double obj, VarType type = VarType::Continuous) {
    int first = -1;
    for (int i = 0; i < count; ++i) {
      int v = m.add_var(lb, ub, obj, type);
      if (i == 0) first = v;
    }
    return first;
  };

  // first stage
  const int y0 = block(G * T, 0, 1, 0.0, VarType::Binary);
  const int v0 = block(G * T, 0, 1, 0.0, VarType::Binary);
  const int w0 = block(G * T, 0, 1, 0.0, VarType::Binary);
  auto vy = [&](int g, int t) { return y0 + g * T + t; };
  auto vv = [&](int g, int t) { return v0 + g * T + t; };
  auto vw = [&](int g, int t) { return w0 + g * T + t; };

  // second stage, per scenario
  const int p0 = block(S * G * T, 0, kInf, 0.0);
  const int h0 = block(S * G * T, 0, kInf, 0.0);
  const int pw0 = W > 0 ? block(S * W * T, 0, kInf, 0.0) : 0;
  const int cu0 = W > 0 ? block(S * W * T, 0, kInf, 0.0) : 0;
  const int f0 = L > 0 ? block(S * L * T, 0, 0, 0.0) : 0;
  const int th0 = block(S * B * T, -kInf, kInf, 0.0);
  const int un0 = block(S * B * T, 0, kInf, 0.0);
  auto vp = [&](int s, int g, int t) { return p0 + (s * G + g) * T + t; };
  auto vh = [&](int s, int g, int t) { return h0 + (s * G + g) * T + t; };
  auto vpw = [&](int s, int k, int t) { return pw0 + (s * W + k) * T + t; };
  auto vcu = [&](int s, int k, int t) { return cu0 + (s * W + k) * T + t; };
  auto vf = [&](int s, int l, int t) { return f0 + (s * L + l) * T + t; };
  auto vth = [&](int s, int b, int t) { return th0 + (s * B + b) * T + t; };
  auto vun = [&](int s, int b, int t) { return un0 + (s * B + b) * T + t; };

  // CVaR machinery: c_s, eta_s, z
  const double pweight = 1.0 / S;
  const int c0 = block(S, -kInf, kInf, pweight);
  const int eta0 = block(S, 0, kInf, rho_sto * pweight / (1.0 - beta));
  const int zvar = m.add_var(-kInf, kInf, rho_sto);

  for (int l = 0; l < L; ++l)
    for (int s = 0; s < S; ++s)
      for (int t = 0; t < T; ++t)
        m.set_bounds(vf(s, l, t), -sys.lines[l].capacity, sys.lines[l].capacity);
  int ref = 0;
  for (int b = 1; b < B; ++b)
    if (sys.buses[b].id < sys.buses[ref].id) ref = b;
  for (int s = 0; s < S; ++s)
    for (int t = 0; t < T; ++t) m.set_bounds(vth(s, ref, t), 0.0, 0.0);

  // first-stage linking (cold start)
  for (int g = 0; g < G; ++g) {
    m.add_row({{vv(g, 0), 1.0}, {vw(g, 0), -1.0}, {vy(g, 0), -1.0}}, RowSense::Equal, 0.0);
    for (int t = 1; t < T; ++t)
      m.add_row({{vv(g, t), 1.0}, {vw(g, t), -1.0}, {vy(g, t), -1.0}, {vy(g, t - 1), 1.0}},
                RowSense::Equal, 0.0);
  }

  for (int s = 0; s < S; ++s) {
    for (int g = 0; g < G; ++g) {
      const auto& gen = sys.thermal_generators[g];
      for (int t = 0; t < T; ++t) {
        for (const auto& seg : gen.cost_segments)
          m.add_row({{vh(s, g, t), 1.0}, {vp(s, g, t), -seg.slope}, {vy(g, t), -seg.intercept}},
                    RowSense::GreaterEqual, 0.0);
        m.add_row({{vp(s, g, t), 1.0}, {vy(g, t), -gen.p_max}}, RowSense::LessEqual, 0.0);
        m.add_row({{vp(s, g, t), 1.0}, {vy(g, t), -gen.p_min}}, RowSense::GreaterEqual, 0.0);
      }
      if (gen.has_hourly_ramp()) {
        for (int t = 1; t < T; ++t) {
          m.add_row({{vp(s, g, t), 1.0},
                     {vp(s, g, t - 1), -1.0},
                     {vy(g, t - 1), -gen.ramp_hourly},
                     {vv(g, t), -gen.p_min}},
                    RowSense::LessEqual, 0.0);
          m.add_row({{vp(s, g, t - 1), 1.0},
                     {vp(s, g, t), -1.0},
                     {vy(g, t), -gen.ramp_hourly},
                     {vw(g, t), -gen.p_min}},
                    RowSense::LessEqual, 0.0);
        }
      }
    }
    for (int b = 0; b < B; ++b) {
      for (int t = 0; t < T; ++t) {
        std::vector<LinearTerm> terms;
        for (int g = 0; g < G; ++g)
          if (sys.thermal_generators[g].bus_idx == b) terms.push_back({vp(s, g, t), 1.0});
        for (int k = 0; k < W; ++k)
          if (sys.wind_generators[k].bus_idx == b) terms.push_back({vpw(s, k, t), 1.0});
        terms.push_back({vun(s, b, t), 1.0});
        for (int l = 0; l < L; ++l) {
          if (sys.lines[l].to_idx == b) terms.push_back({vf(s, l, t), 1.0});
          if (sys.lines[l].from_idx == b) terms.push_back({vf(s, l, t), -1.0});
        }
        m.add_row(std::move(terms), RowSense::Equal, hour_load(s, b, t));
      }
    }
    for (int l = 0; l < L; ++l) {
      const auto& ln = sys.lines[l];
      for (int t = 0; t < T; ++t)
        m.add_row({{vf(s, l, t), 1.0},
                   {vth(s, ln.from_idx, t), -ln.susceptance},
                   {vth(s, ln.to_idx, t), ln.susceptance}},
                  RowSense::Equal, 0.0);
    }
    for (int k = 0; k < W; ++k)
      for (int t = 0; t < T; ++t)
        m.add_row({{vpw(s, k, t), 1.0}, {vcu(s, k, t), 1.0}}, RowSense::Equal, hour_wind(s, k, t));

    // c_s definition: total scenario cost with the RT VOLL
    std::vector<LinearTerm> cost_terms{{c0 + s, 1.0}};
    for (int g = 0; g < G; ++g) {
      const auto& gen = sys.thermal_generators[g];
      for (int t = 0; t < T; ++t) {
        cost_terms.push_back({vh(s, g, t), -1.0});
        cost_terms.push_back({vv(g, t), -gen.startup_cost});
        cost_terms.push_back({vw(g, t), -gen.shutdown_cost});
      }
    }
    for (int b = 0; b < B; ++b)
      for (int t = 0; t < T; ++t) cost_terms.push_back({vun(s, b, t), -sys.voll_rt});
    m.add_row(std::move(cost_terms), RowSense::Equal, 0.0);

    // eta_s >= c_s - z
    m.add_row({{eta0 + s, 1.0}, {c0 + s, -1.0}, {zvar, 1.0}}, RowSense::GreaterEqual, 0.0);
  }

  if (fix_schedule != nullptr) {
    for (int g = 0; g < G; ++g)
      for (int t = 0; t < T; ++t) {
        m.set_bounds(vy(g, t), fix_schedule->y[g][t], fix_schedule->y[g][t]);
        m.set_bounds(vv(g, t), fix_schedule->v[g][t], fix_schedule->v[g][t]);
        m.set_bounds(vw(g, t), fix_schedule->w[g][t], fix_schedule->w[g][t]);
      }
  }

  SolverOptions opt;
  opt.mip_gap = gap;
  opt.time_limit_sec = time_limit_sec;
  if (warm_start != nullptr) {
    opt.warm_start.assign(m.n_vars(), 0.0);
    for (int g = 0; g < G; ++g)
      for (int t = 0; t < T; ++t) {
        opt.warm_start[vy(g, t)] = warm_start->y[g][t];
        opt.warm_start[vv(g, t)] = warm_start->v[g][t];
        opt.warm_start[vw(g, t)] = warm_start->w[g][t];
      }
  }
  SolveResult res = solve_mip(m, opt);
  if (res.x.empty())
    throw SolveError(std::string("stochastic SCUC: ") + to_string(res.status));

  StochasticSolution sol;
  sol.result = res;
  std::vector<std::vector<int>> y(G, std::vector<int>(T, 0));
  for (int g = 0; g < G; ++g)
    for (int t = 0; t < T; ++t) y[g][t] = res.x[vy(g, t)] >= 0.5 ? 1 : 0;
  sol.schedule = CommitmentSchedule::from_y(std::move(y));
  // dispatch of the first scenario, exported for inspection
  auto grab = [&](auto var_of, int count) {
    std::vector<std::vector<double>> out(count, std::vector<double>(T, 0.0));
    for (int i = 0; i < count; ++i)
      for (int t = 0; t < T; ++t) out[i][t] = res.x[var_of(0, i, t)];
    return out;
  };
  sol.first_scenario_dispatch.p_thermal = grab(vp, G);
  sol.first_scenario_dispatch.h = grab(vh, G);
  if (W > 0) {
    sol.first_scenario_dispatch.p_wind = grab(vpw, W);
    sol.first_scenario_dispatch.curtail = grab(vcu, W);
  }
  if (L > 0) sol.first_scenario_dispatch.flow = grab(vf, L);
  sol.first_scenario_dispatch.theta = grab(vth, B);
  sol.first_scenario_dispatch.unmet = grab(vun, B);
  sol.scenario_costs.resize(S);
  sol.eta.resize(S);
  KahanSum mean, eta_mean;
  for (int s = 0; s < S; ++s) {
    sol.scenario_costs[s] = res.x[c0 + s];
    sol.eta[s] = res.x[eta0 + s];
    mean.add(sol.scenario_costs[s]);
    eta_mean.add(sol.eta[s]);
  }
  sol.z = res.x[zvar];
  sol.mean_cost = mean.value() / S;
  sol.cvar = sol.z + eta_mean.value() / S / (1.0 - beta);
  sol.objective = res.objective;
  return sol;
}

}  // namespace riskuc
