// riskuc: risk-aware SCUC pipeline driver.
//
// Subcommands: solve-da, solve-risk-aware, adversary, evaluate,
// benchmark-sto, pca-audit. Each reads a JSON run config (flags override
// individual keys), writes machine-readable outputs plus a manifest into the
// output directory, and is idempotent for a fixed seed.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "riskuc/adversary.hpp"
#include "riskuc/decomposition.hpp"
#include "riskuc/evaluation.hpp"
#include "riskuc/power_system.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace riskuc;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string case_path;
  std::string load_history;
  std::string wind_history;
  int K = 3;
  double R_d = 0.1;
  double R_w = 0.2;
  double sigma_rule = 3.0;
  double rho = 1.0;
  std::vector<std::string> cuts = {"lbbd"};
  std::string mode = "iterative";
  int root_cuts = 0;
  std::optional<std::vector<int>> flex_window;
  std::optional<double> voll_da, voll_rt;
  double gap = 1e-6;
  double time_limit = 86400.0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output_dir = "out";
  // evaluation block
  std::string eval_method = "uniform";
  int eval_samples = 100;
  double cone_angle = 1.0471975511965976;
  int eval_n_tp = 0;
  // stochastic benchmark block
  double rho_sto = 0.0;
  double beta = 0.9;
  int n_scenarios = 10;
  bool sto_warm_start = false;

  json raw;  // as loaded, for the manifest hash
};

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  RunConfig c;
  c.raw = j;
  auto get = [&](const char* key, auto& dst) {
    if (j.contains(key)) dst = j.at(key).get<std::decay_t<decltype(dst)>>();
  };
  if (!j.contains("case")) throw ParseError(path + ": missing 'case'");
  c.case_path = j.at("case").get<std::string>();
  get("load_history", c.load_history);
  get("wind_history", c.wind_history);
  get("K", c.K);
  get("R_d", c.R_d);
  get("R_w", c.R_w);
  get("sigma_rule", c.sigma_rule);
  get("rho", c.rho);
  get("cuts", c.cuts);
  get("mode", c.mode);
  get("root_cuts", c.root_cuts);
  if (j.contains("flex_window")) c.flex_window = j.at("flex_window").get<std::vector<int>>();
  if (j.contains("voll_da")) c.voll_da = j.at("voll_da").get<double>();
  if (j.contains("voll_rt")) c.voll_rt = j.at("voll_rt").get<double>();
  get("gap", c.gap);
  get("time_limit", c.time_limit);
  get("seed", c.seed);
  get("workers", c.workers);
  get("output_dir", c.output_dir);
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    if (e.contains("method")) c.eval_method = e.at("method").get<std::string>();
    if (e.contains("n_samples")) c.eval_samples = e.at("n_samples").get<int>();
    if (e.contains("cone_angle")) c.cone_angle = e.at("cone_angle").get<double>();
    if (e.contains("eval_n_tp")) c.eval_n_tp = e.at("eval_n_tp").get<int>();
  }
  if (j.contains("sto")) {
    const json& s = j.at("sto");
    if (s.contains("rho_sto")) c.rho_sto = s.at("rho_sto").get<double>();
    if (s.contains("beta")) c.beta = s.at("beta").get<double>();
    if (s.contains("n_scenarios")) c.n_scenarios = s.at("n_scenarios").get<int>();
    if (s.contains("warm_start")) c.sto_warm_start = s.at("warm_start").get<bool>();
  }
  return c;
}

void validate_config(const RunConfig& c) {
  if (!fs::exists(c.case_path)) throw ParseError("case file not found: " + c.case_path);
  if (!c.load_history.empty() && !fs::exists(c.load_history))
    throw ParseError("load history not found: " + c.load_history);
  if (!c.wind_history.empty() && !fs::exists(c.wind_history))
    throw ParseError("wind history not found: " + c.wind_history);
  if (c.rho < 0.0) throw ParseError("config: rho must be >= 0");
  if (!(c.gap > 0.0 && c.gap < 1.0)) throw ParseError("config: gap must be in (0,1)");
  if (c.K < 1) throw ParseError("config: K must be >= 1");
  if (c.R_d < 0 || c.R_w < 0) throw ParseError("config: R bounds must be >= 0");
  if (c.workers < 1) throw ParseError("config: workers must be >= 1");
  if (c.mode != "iterative" && c.mode != "branch_and_cut")
    throw ParseError("config: mode must be iterative or branch_and_cut");
  for (const auto& f : c.cuts)
    if (f != "no_good" && f != "l_shaped" && f != "lbbd")
      throw ParseError("config: unknown cut family '" + f + "'");
}

PowerSystem load_system(const RunConfig& c) {
  PowerSystem sys = load_case(c.case_path);
  if (c.flex_window) {
    sys.time.flex_window = *c.flex_window;
    sys.validate();
  }
  if (c.voll_da || c.voll_rt) {
    if (c.voll_da) sys.voll_da = *c.voll_da;
    if (c.voll_rt) sys.voll_rt = *c.voll_rt;
    sys.validate();
  }
  return sys;
}

UncertaintySet build_uset(const RunConfig& c, const PowerSystem& sys) {
  if (c.load_history.empty()) throw ParseError("config: load_history required");
  HistoryMatrix lh = load_history(c.load_history, HistoryKind::Load, sys);
  std::optional<HistoryMatrix> wh;
  if (sys.n_wind() > 0) {
    if (c.wind_history.empty())
      throw ParseError("config: wind_history required (system has wind farms)");
    wh = load_history(c.wind_history, HistoryKind::Wind, sys);
  }
  return build_uncertainty_set(sys, lh, wh ? &*wh : nullptr, c.K, c.R_d, c.R_w, c.sigma_rule);
}

std::vector<CutFamily> parse_cuts(const std::vector<std::string>& names) {
  std::vector<CutFamily> out;
  for (const auto& n : names) {
    if (n == "no_good") out.push_back(CutFamily::NoGood);
    else if (n == "l_shaped") out.push_back(CutFamily::LShaped);
    else out.push_back(CutFamily::Lbbd);
  }
  return out;
}

// --- output helpers -------------------------------------------------------

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw ParseError("cannot write " + (dir / name).string());
  out << std::setprecision(12);
  return out;
}

void write_manifest(const RunConfig& c, const std::string& subcommand) {
  json m;
  m["subcommand"] = subcommand;
  m["version"] = kVersion;
  m["seed"] = c.seed;
  m["config_hash"] = std::to_string(std::hash<std::string>{}(c.raw.dump()));
  auto out = open_out(c.output_dir, "manifest.json");
  out << m.dump(2) << "\n";
}

json schedule_to_json(const PowerSystem& sys, const CommitmentSchedule& s) {
  json j;
  j["generators"] = json::array();
  for (const auto& g : sys.thermal_generators) j["generators"].push_back(g.id);
  j["hours"] = sys.time.da_hours;
  j["y"] = s.y;
  j["v"] = s.v;
  j["w"] = s.w;
  return j;
}

CommitmentSchedule schedule_from_file(const PowerSystem& sys, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open schedule file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  auto y = j.at("y").get<std::vector<std::vector<int>>>();
  if (static_cast<int>(y.size()) != sys.n_thermal() ||
      (sys.n_thermal() > 0 && static_cast<int>(y[0].size()) != sys.time.n_da()))
    throw ParseError(path + ": schedule dimensions do not match the case");
  return CommitmentSchedule::from_y(std::move(y));
}

void write_schedule(const RunConfig& c, const PowerSystem& sys, const CommitmentSchedule& s,
                    const std::string& name) {
  auto out = open_out(c.output_dir, name);
  out << schedule_to_json(sys, s).dump(2) << "\n";
}

void write_da_outputs(const RunConfig& c, const PowerSystem& sys, const CommitmentSchedule& s,
                      const DaDispatch& d, const PricingRun* pricing) {
  {
    auto out = open_out(c.output_dir, "thermal_dispatch.csv");
    out << "generator,hour,y,v,w,p_mw,cost\n";
    for (int g = 0; g < sys.n_thermal(); ++g)
      for (int t = 0; t < sys.time.n_da(); ++t)
        out << sys.thermal_generators[g].id << ',' << sys.time.da_hours[t] << ',' << s.y[g][t]
            << ',' << s.v[g][t] << ',' << s.w[g][t] << ',' << d.p_thermal[g][t] << ','
            << d.h[g][t] << "\n";
  }
  if (sys.n_wind() > 0) {
    auto out = open_out(c.output_dir, "wind_dispatch.csv");
    out << "wind,hour,p_mw,curtail_mw\n";
    for (int k = 0; k < sys.n_wind(); ++k)
      for (int t = 0; t < sys.time.n_da(); ++t)
        out << sys.wind_generators[k].id << ',' << sys.time.da_hours[t] << ',' << d.p_wind[k][t]
            << ',' << d.curtail[k][t] << "\n";
  }
  if (sys.n_lines() > 0) {
    auto out = open_out(c.output_dir, "flows.csv");
    out << "from,to,hour,flow_mw\n";
    for (int l = 0; l < sys.n_lines(); ++l)
      for (int t = 0; t < sys.time.n_da(); ++t)
        out << sys.lines[l].from_bus << ',' << sys.lines[l].to_bus << ','
            << sys.time.da_hours[t] << ',' << d.flow[l][t] << "\n";
  }
  {
    auto out = open_out(c.output_dir, "bus.csv");
    out << "bus,hour,load_mw,unmet_mw,theta_rad";
    if (pricing) out << ",da_lmp,da_payment";
    out << "\n";
    for (int b = 0; b < sys.n_buses(); ++b)
      for (int t = 0; t < sys.time.n_da(); ++t) {
        out << sys.buses[b].id << ',' << sys.time.da_hours[t] << ','
            << sys.buses[b].forecast_load[t] << ',' << d.unmet[b][t] << ',' << d.theta[b][t];
        if (pricing) out << ',' << pricing->lmp[b][t] << ',' << pricing->payment[b][t];
        out << "\n";
      }
  }
  {
    double hsum = 0, start = 0, shut = 0, unmet_cost = 0;
    for (int g = 0; g < sys.n_thermal(); ++g)
      for (int t = 0; t < sys.time.n_da(); ++t) {
        hsum += d.h[g][t];
        start += sys.thermal_generators[g].startup_cost * s.v[g][t];
        shut += sys.thermal_generators[g].shutdown_cost * s.w[g][t];
      }
    for (int b = 0; b < sys.n_buses(); ++b)
      for (int t = 0; t < sys.time.n_da(); ++t) unmet_cost += sys.voll_da * d.unmet[b][t];
    json j;
    j["objective"] = d.objective;
    j["production_cost"] = hsum;
    j["startup_cost"] = start;
    j["shutdown_cost"] = shut;
    j["voll_cost"] = unmet_cost;
    auto out = open_out(c.output_dir, "objective_breakdown.json");
    out << j.dump(2) << "\n";
  }
}

void write_rt_solution(const RunConfig& c, const PowerSystem& sys, const Scenario& omega,
                       const RtSolution& sol, const std::string& name) {
  auto base = da_baseline_by_period(sys);
  auto out = open_out(c.output_dir, name);
  out << "bus,period,lmp,load_mw,excess_mw,exposure\n";
  for (int b = 0; b < sys.n_buses(); ++b)
    for (int r = 0; r < sys.time.n_rt_periods(); ++r) {
      double excess = std::max(0.0, omega.d_rt[b][r] - base[b][r]);
      out << sys.buses[b].id << ',' << r + 1 << ',' << sol.lmp[b][r] << ',' << omega.d_rt[b][r]
          << ',' << excess << ',' << sol.lmp[b][r] * excess / sys.time.n_tp << "\n";
    }
}

void write_grid_log(const RunConfig& c, const UncertaintySet& uset,
                    const std::vector<GridLogEntry>& log) {
  auto out = open_out(c.output_dir, "grid_log.csv");
  out << "grid,solved,exposure,kind,mode,period,alpha\n";
  for (const auto& e : log) {
    for (int k = 0; k < uset.K; ++k)
      for (int r = 0; r < uset.n_periods(); ++r) {
        out << e.grid_index << ',' << (e.solved ? 1 : 0) << ',' << e.exposure << ",load," << k + 1
            << ',' << r + 1 << ',' << e.stressor.alpha_d[k][r] << "\n";
        if (!e.stressor.alpha_w.empty())
          out << e.grid_index << ',' << (e.solved ? 1 : 0) << ',' << e.exposure << ",wind,"
              << k + 1 << ',' << r + 1 << ',' << e.stressor.alpha_w[k][r] << "\n";
      }
  }
}

// --- subcommands ----------------------------------------------------------

int cmd_solve_da(const RunConfig& c) {
  PowerSystem sys = load_system(c);
  DeterministicSolution sol = solve_deterministic(sys, c.gap, c.time_limit);
  PricingRun pricing = da_pricing_run(sys, sol.schedule);
  write_schedule(c, sys, sol.schedule, "schedule.json");
  write_da_outputs(c, sys, sol.schedule, sol.dispatch, &pricing);
  write_manifest(c, "solve-da");
  std::cout << "solve-da: objective " << sol.dispatch.objective << ", status "
            << to_string(sol.result.status) << "\n";
  return sol.result.ok() ? 0 : 1;
}

int cmd_solve_risk_aware(const RunConfig& c) {
  PowerSystem sys = load_system(c);
  UncertaintySet uset = build_uset(c, sys);
  DeterministicSolution det = solve_deterministic(sys, c.gap, c.time_limit);

  RiskAwareOptions opt;
  opt.rho = c.rho;
  opt.cut_families = parse_cuts(c.cuts);
  opt.mode = c.mode == "branch_and_cut" ? DecompositionMode::BranchAndCut
                                        : DecompositionMode::Iterative;
  opt.root_cuts = c.root_cuts;
  opt.gap = c.gap;
  opt.time_limit_sec = c.time_limit;
  opt.adversary.workers = c.workers;
  RiskAwareSolution sol = solve_risk_aware(sys, uset, det.schedule, opt);

  write_schedule(c, sys, sol.schedule, "schedule.json");
  write_da_outputs(c, sys, sol.schedule, sol.da_dispatch, nullptr);
  {
    auto out = open_out(c.output_dir, "trace.csv");
    out << "iter,master_obj,v_hat_master,adversary_exposure,cuts_added,wall_time_sec\n";
    for (const auto& r : sol.trace)
      out << r.iteration << ',' << r.master_objective << ',' << r.vhat_master << ','
          << r.adversary_exposure << ',' << r.cuts_added << ',' << r.wall_time_sec << "\n";
  }
  {
    json j;
    j["da_cost"] = sol.da_cost;
    j["v_hat"] = sol.v_hat;
    j["rho"] = sol.rho;
    j["total_objective"] = sol.total_objective;
    j["iterations"] = sol.iterations;
    j["cuts"] = sol.cuts.size();
    j["opt_gap"] = sol.opt_gap;
    j["converged"] = sol.converged;
    j["notes"] = sol.notes;
    auto out = open_out(c.output_dir, "risk_aware.json");
    out << j.dump(2) << "\n";
  }
  write_manifest(c, "solve-risk-aware");
  std::cout << "solve-risk-aware: total objective " << sol.total_objective << " (DA "
            << sol.da_cost << " + rho*V " << c.rho << "*" << sol.v_hat << "), "
            << sol.iterations << " iterations, " << sol.cuts.size() << " cuts\n";
  return sol.converged ? 0 : 1;
}

int cmd_adversary(const RunConfig& c, const std::string& schedule_path) {
  PowerSystem sys = load_system(c);
  UncertaintySet uset = build_uset(c, sys);
  CommitmentSchedule sched = schedule_path.empty()
                                 ? solve_deterministic(sys, c.gap, c.time_limit).schedule
                                 : schedule_from_file(sys, schedule_path);
  AdversaryOptions opt;
  opt.workers = c.workers;
  AdversaryResult adv = solve_adversary(sys, uset, sched, opt);
  write_grid_log(c, uset, adv.grid_log);
  write_rt_solution(c, sys, adv.worst_scenario, adv.worst_rt_solution, "worst_rt.csv");
  {
    json j;
    j["worst_exposure"] = adv.worst_exposure;
    j["worst_grid"] = adv.worst_index;
    j["per_hour_exposure"] = adv.per_hour_exposure;
    j["producer_surplus"] = adv.worst_rt_solution.producer_surplus;
    auto out = open_out(c.output_dir, "adversary.json");
    out << j.dump(2) << "\n";
  }
  write_manifest(c, "adversary");
  std::cout << "adversary: worst exposure " << adv.worst_exposure << " at grid "
            << adv.worst_index << " of " << adv.grid_log.size() << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& c, const std::vector<std::string>& schedule_paths) {
  if (schedule_paths.empty()) throw ParseError("evaluate: at least one schedule file required");
  PowerSystem sys = load_system(c);
  UncertaintySet uset = build_uset(c, sys);
  std::vector<std::pair<std::string, CommitmentSchedule>> schedules;
  for (const auto& p : schedule_paths)
    schedules.emplace_back(fs::path(p).stem().string(), schedule_from_file(sys, p));

  EvalOptions opt;
  opt.spec.n_samples = c.eval_samples;
  opt.spec.seed = c.seed;
  opt.spec.cone_angle = c.cone_angle;
  opt.eval_n_tp = c.eval_n_tp;
  opt.workers = c.workers;
  if (c.eval_method == "cone") {
    opt.spec.method = SampleMethod::Cone;
    // cone center: the adverse stressor for the first listed schedule
    AdversaryOptions aopt;
    aopt.workers = c.workers;
    opt.spec.center = solve_adversary(sys, uset, schedules.front().second, aopt).worst_stressor;
  }
  EvalReport rep = evaluate_schedules(sys, schedules, uset, opt);

  {
    auto out = open_out(c.output_dir, "eval_schedules.csv");
    out << "schedule,da_cost,mean_total_cost,cost_std,mean_exposure,mean_producer_surplus\n";
    for (const auto& st : rep.per_schedule)
      out << st.name << ',' << st.da_cost << ',' << st.mean_total_cost << ',' << st.cost_std
          << ',' << st.mean_exposure << ',' << st.mean_surplus << "\n";
  }
  {
    auto out = open_out(c.output_dir, "eval_pairwise.csv");
    out << "subject,comparator,save,comparator_cost,cost_red,da_cost_diff,consr_exp_diff\n";
    for (size_t i = 0; i < rep.per_schedule.size(); ++i)
      for (size_t j = 0; j < rep.per_schedule.size(); ++j) {
        if (i == j) continue;
        out << rep.per_schedule[i].name << ',' << rep.per_schedule[j].name << ','
            << rep.save[i][j] << ',' << rep.per_schedule[j].mean_total_cost << ','
            << rep.cost_red[i][j] << ','
            << rep.per_schedule[i].da_cost - rep.per_schedule[j].da_cost << ','
            << rep.exposure_diff[i][j] << "\n";
      }
  }
  {
    auto out = open_out(c.output_dir, "prices.csv");
    out << "schedule,bus,da_lmp_mean,rt_lmp_mean\n";
    for (const auto& st : rep.per_schedule)
      for (int b = 0; b < sys.n_buses(); ++b)
        out << st.name << ',' << sys.buses[b].id << ',' << st.da_lmp[b] << ','
            << st.mean_rt_lmp[b] << "\n";
  }
  write_manifest(c, "evaluate");
  std::cout << "evaluate: " << rep.n_samples_used << " samples used, "
            << rep.n_samples_failed << " excluded\n";
  return 0;
}

int cmd_benchmark_sto(const RunConfig& c) {
  PowerSystem sys = load_system(c);
  UncertaintySet uset = build_uset(c, sys);
  SampleSpec spec;
  spec.method = SampleMethod::Uniform;
  spec.n_samples = c.n_scenarios;
  spec.seed = c.seed;
  std::vector<Scenario> scenarios;
  for (const auto& a : sample_stressors(uset, spec))
    scenarios.push_back(realize(uset, a, NegativePolicy::ClipZero, false));

  std::optional<CommitmentSchedule> warm;
  if (c.sto_warm_start) warm = solve_deterministic(sys, c.gap, c.time_limit).schedule;
  StochasticSolution sol = solve_stochastic_scuc(sys, scenarios, c.rho_sto, c.beta, c.gap,
                                                 c.time_limit, warm ? &*warm : nullptr);
  write_schedule(c, sys, sol.schedule, "schedule.json");
  {
    json j;
    j["objective"] = sol.objective;
    j["mean_cost"] = sol.mean_cost;
    j["cvar"] = sol.cvar;
    j["z"] = sol.z;
    j["scenario_costs"] = sol.scenario_costs;
    j["eta"] = sol.eta;
    j["mip_gap"] = sol.result.mip_gap;
    j["status"] = to_string(sol.result.status);
    auto out = open_out(c.output_dir, "stochastic.json");
    out << j.dump(2) << "\n";
  }
  write_manifest(c, "benchmark-sto");
  std::cout << "benchmark-sto: objective " << sol.objective << " over "
            << scenarios.size() << " scenarios, status " << to_string(sol.result.status) << "\n";
  return sol.result.ok() ? 0 : 1;
}

int cmd_pca_audit(const RunConfig& c) {
  PowerSystem sys = load_system(c);
  UncertaintySet uset = build_uset(c, sys);
  auto out = open_out(c.output_dir, "modes.csv");
  out << "period,kind,mode,component,component_id,value,eigenvalue\n";
  for (int r = 0; r < uset.n_periods(); ++r) {
    int hour = uset.hour_of_period(r);
    for (int k = 0; k < uset.K; ++k) {
      const auto& q = uset.load.modes[hour][k];
      for (int i = 0; i < q.size(); ++i)
        out << r + 1 << ",load," << k + 1 << ',' << i + 1 << ',' << sys.buses[i].id << ','
            << q(i) << ',' << uset.load.eigvals[hour][k] << "\n";
      if (!uset.base_wind.empty()) {
        const auto& qw = uset.wind.modes[hour][k];
        for (int i = 0; i < qw.size(); ++i)
          out << r + 1 << ",wind," << k + 1 << ',' << i + 1 << ','
              << sys.wind_generators[i].id << ',' << qw(i) << ','
              << uset.wind.eigvals[hour][k] << "\n";
      }
    }
  }
  for (const auto& w : uset.warnings) std::cerr << "warning: " << w << "\n";
  write_manifest(c, "pca-audit");
  std::cout << "pca-audit: wrote modes for " << uset.n_periods() << " periods\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-aware security-constrained unit commitment toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string schedule_path;
  std::vector<std::string> schedule_paths;
  // flag overrides
  std::optional<double> rho_flag;
  std::optional<std::string> mode_flag, out_flag, method_flag;
  std::optional<std::vector<std::string>> cuts_flag;
  std::optional<int> root_cuts_flag, samples_flag, workers_flag;
  std::optional<std::uint64_t> seed_flag;
  std::optional<std::vector<int>> flex_flag;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run config JSON")->required();
    sub->add_option("--rho", rho_flag, "risk weight override");
    sub->add_option("--cuts", cuts_flag, "cut families (no_good, l_shaped, lbbd)");
    sub->add_option("--mode", mode_flag, "iterative | branch_and_cut");
    sub->add_option("--root-cuts", root_cuts_flag, "adversary cuts pre-seeded at the root");
    sub->add_option("--flex-window", flex_flag, "hours allowed to deviate");
    sub->add_option("--out", out_flag, "output directory override");
    sub->add_option("--seed", seed_flag, "RNG seed override");
    sub->add_option("--samples", samples_flag, "evaluation sample count override");
    sub->add_option("--method", method_flag, "evaluation sampling method (uniform | cone)");
    sub->add_option("--workers", workers_flag, "parallel solver workers");
  };

  CLI::App* solve_da = app.add_subcommand("solve-da", "deterministic DA SCUC + pricing run");
  add_common(solve_da);
  CLI::App* risk = app.add_subcommand("solve-risk-aware", "decomposition with exposure cuts");
  add_common(risk);
  CLI::App* adv = app.add_subcommand("adversary", "grid-search worst case for a schedule");
  add_common(adv);
  adv->add_option("--schedule", schedule_path, "schedule JSON (default: deterministic)");
  CLI::App* eval = app.add_subcommand("evaluate", "out-of-sample paired evaluation");
  add_common(eval);
  eval->add_option("schedules", schedule_paths, "schedule JSON files")->required();
  CLI::App* sto = app.add_subcommand("benchmark-sto", "stochastic SCUC with CVaR benchmark");
  add_common(sto);
  CLI::App* pca = app.add_subcommand("pca-audit", "export covariance modes");
  add_common(pca);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunConfig c = load_config(config_path);
    if (rho_flag) c.rho = *rho_flag;
    if (cuts_flag) c.cuts = *cuts_flag;
    if (mode_flag) c.mode = *mode_flag;
    if (root_cuts_flag) c.root_cuts = *root_cuts_flag;
    if (flex_flag) c.flex_window = *flex_flag;
    if (out_flag) c.output_dir = *out_flag;
    if (seed_flag) c.seed = *seed_flag;
    if (samples_flag) c.eval_samples = *samples_flag;
    if (method_flag) c.eval_method = *method_flag;
    if (workers_flag) c.workers = *workers_flag;
    validate_config(c);

    if (solve_da->parsed()) return cmd_solve_da(c);
    if (risk->parsed()) return cmd_solve_risk_aware(c);
    if (adv->parsed()) return cmd_adversary(c, schedule_path);
    if (eval->parsed()) return cmd_evaluate(c, schedule_paths);
    if (sto->parsed()) return cmd_benchmark_sto(c);
    if (pca->parsed()) return cmd_pca_audit(c);
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const SolveError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
