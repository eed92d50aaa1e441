#include "riskuc/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>

namespace riskuc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int Model::add_var(double lb, double ub, double obj, VarType type, std::string name) {
  if (type == VarType::Binary) {
    if (lb < -1e-12 || ub > 1.0 + 1e-12 || lb > ub)
      throw SolveError("binary variable '" + name + "' must have bounds within {0,1}");
  }
  if (lb > ub) throw SolveError("variable '" + name + "' has lb > ub");
  lb_.push_back(lb);
  ub_.push_back(ub);
  obj_.push_back(obj);
  type_.push_back(type);
  vname_.push_back(std::move(name));
  return n_vars() - 1;
}

int Model::add_row(std::vector<LinearTerm> terms, RowSense sense, double rhs, std::string name) {
  for (const auto& t : terms)
    if (t.var < 0 || t.var >= n_vars())
      throw SolveError("row '" + name + "' references unknown variable " + std::to_string(t.var));
  rows_.push_back(std::move(terms));
  sense_.push_back(sense);
  rhs_.push_back(rhs);
  rname_.push_back(std::move(name));
  return n_rows() - 1;
}

void Model::set_bounds(int var, double lb, double ub) {
  if (lb > ub) throw SolveError("set_bounds: lb > ub for variable " + std::to_string(var));
  lb_[var] = lb;
  ub_[var] = ub;
}

void Model::set_obj_coeff(int var, double obj) { obj_[var] = obj; }

void Model::fix_binaries(const std::vector<double>& values) {
  for (int v = 0; v < n_vars(); ++v) {
    if (type_[v] != VarType::Binary) continue;
    double r = values[v] >= 0.5 ? 1.0 : 0.0;
    lb_[v] = r;
    ub_[v] = r;
  }
}

bool Model::has_free_integers() const {
  for (int v = 0; v < n_vars(); ++v)
    if (type_[v] == VarType::Binary && ub_[v] - lb_[v] > 1e-12) return true;
  return false;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::GapLimit: return "gap_limit";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::IterLimit: return "iter_limit";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

double CutRow::activity(const std::vector<double>& x) const {
  double a = 0.0;
  for (const auto& t : terms) a += t.coeff * x[t.var];
  return a;
}

bool CutRow::violated_by(const std::vector<double>& x, double tol) const {
  double a = activity(x);
  switch (sense) {
    case RowSense::LessEqual: return a > rhs + tol;
    case RowSense::GreaterEqual: return a < rhs - tol;
    case RowSense::Equal: return std::abs(a - rhs) > tol;
  }
  return false;
}

BackendInfo backend_info() { return {"builtin-simplex", true}; }

// ---------------------------------------------------------------------------
// Bounded-variable two-phase primal simplex.
//
// Computational form: min c'z  s.t.  Az = b,  lb <= z <= ub, with
// z = [structural | one slack per row | one artificial per row].
// Slack bounds encode the row sense; artificials give phase 1 a feasible
// starting basis and are clamped to [0,0] afterwards.
// ---------------------------------------------------------------------------
namespace {

enum VStat : int { kBasic = 0, kAtLower = 1, kAtUpper = 2, kFreeNB = 3 };

class Simplex {
 public:
  Simplex(const Model& model, const std::vector<CutRow>& extra_rows, const SolverOptions& opt)
      : opt_(opt) {
    n_struct_ = model.n_vars();
    const int base_rows = model.n_rows();
    m_ = base_rows + static_cast<int>(extra_rows.size());

    lb_.assign(n_struct_, 0.0);
    ub_.assign(n_struct_, 0.0);
    cost_.assign(n_struct_, 0.0);
    for (int v = 0; v < n_struct_; ++v) {
      lb_[v] = model.lb(v);
      ub_[v] = model.ub(v);
      cost_[v] = model.obj(v);
    }

    cols_.assign(n_struct_ + 2 * m_, {});
    b_.assign(m_, 0.0);
    auto add_computational_row = [&](const std::vector<LinearTerm>& terms, RowSense sense,
                                     double rhs, int r) {
      for (const auto& t : terms) {
        if (t.coeff != 0.0) cols_[t.var].push_back({r, t.coeff});
      }
      b_[r] = rhs;
      // slack column
      int s = n_struct_ + r;
      cols_[s].push_back({r, 1.0});
      switch (sense) {
        case RowSense::LessEqual: lb_.push_back(0.0), ub_.push_back(kInf); break;
        case RowSense::GreaterEqual: lb_.push_back(-kInf), ub_.push_back(0.0); break;
        case RowSense::Equal: lb_.push_back(0.0), ub_.push_back(0.0); break;
      }
      cost_.push_back(0.0);
    };
    // column order: structural, slacks, artificials
    lb_.reserve(n_struct_ + 2 * m_);
    ub_.reserve(n_struct_ + 2 * m_);
    cost_.reserve(n_struct_ + 2 * m_);
    for (int r = 0; r < base_rows; ++r)
      add_computational_row(model.row(r), model.row_sense(r), model.row_rhs(r), r);
    for (size_t i = 0; i < extra_rows.size(); ++i)
      add_computational_row(extra_rows[i].terms, extra_rows[i].sense, extra_rows[i].rhs,
                            base_rows + static_cast<int>(i));
    for (int i = 0; i < m_; ++i) {  // artificial placeholders; signs set in init_state
      lb_.push_back(0.0);
      ub_.push_back(kInf);
      cost_.push_back(0.0);
    }
    n_total_ = n_struct_ + 2 * m_;
  }

  SolveResult solve() {
    SolveResult res;
    init_state();

    // Phase 1: minimize the sum of artificial values.
    std::vector<double> phase1_cost(n_total_, 0.0);
    for (int j = art_begin(); j < n_total_; ++j) phase1_cost[j] = 1.0;
    SolveStatus st = run(phase1_cost, /*phase1=*/true);
    if (st == SolveStatus::IterLimit) {
      res.status = st;
      res.message = "phase 1 iteration limit";
      return res;
    }
    double infeas = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= art_begin()) infeas += std::abs(xB_[i]);
    double bscale = 1.0;
    for (int i = 0; i < m_; ++i) bscale = std::max(bscale, std::abs(b_[i]));
    if (infeas > opt_.feas_tol * bscale * 10.0) {
      res.status = SolveStatus::Infeasible;
      res.lp_iterations = iterations_;
      return res;
    }

    // Clamp artificials and try to pivot leftover ones out of the basis.
    for (int j = art_begin(); j < n_total_; ++j) {
      lb_[j] = 0.0;
      ub_[j] = 0.0;
      if (vstat_[j] != kBasic) {
        vstat_[j] = kAtLower;
        xN_val_[j] = 0.0;
      }
    }
    drive_out_artificials();
    refactorize();

    // Phase 2: the real objective.
    st = run(cost_, /*phase1=*/false);
    res.lp_iterations = iterations_;
    if (st == SolveStatus::IterLimit) {
      res.status = st;
      res.message = "phase 2 iteration limit";
      return res;
    }
    if (st == SolveStatus::Unbounded) {
      res.status = st;
      return res;
    }

    res.status = SolveStatus::Optimal;
    res.x.assign(n_struct_, 0.0);
    for (int j = 0; j < n_struct_; ++j)
      if (vstat_[j] != kBasic) res.x[j] = xN_val_[j];
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_struct_) res.x[basis_[i]] = xB_[i];

    double obj = 0.0;
    for (int j = 0; j < n_struct_; ++j) obj += cost_[j] * res.x[j];
    res.objective = obj;

    // Duals and the Lagrangian dual objective (strong-duality witness).
    Eigen::VectorXd y = dual_vector(cost_);
    res.duals.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) res.duals[i] = y(i);
    res.reduced_costs.assign(n_struct_, 0.0);
    double dual_obj = 0.0;
    for (int i = 0; i < m_; ++i) dual_obj += y(i) * b_[i];
    double dual_eps = 1e-9;
    for (double c : cost_) dual_eps = std::max(dual_eps, 1e-12 * std::abs(c));
    for (int j = 0; j < n_struct_ + m_; ++j) {  // artificials contribute nothing
      double d = cost_[j] - sparse_dot(y, cols_[j]);
      if (j < n_struct_) res.reduced_costs[j] = d;
      if (std::abs(d) <= dual_eps) continue;
      double contrib = d > 0.0 ? d * lb_[j] : d * ub_[j];
      if (!std::isfinite(contrib)) contrib = -kInf;  // dual-infeasible direction
      dual_obj += contrib;
    }
    res.dual_objective = dual_obj;
    return res;
  }

 private:
  int art_begin() const { return n_struct_ + m_; }

  static double sparse_dot(const Eigen::VectorXd& y, const std::vector<LinearTerm>& col) {
    double s = 0.0;
    for (const auto& e : col) s += y(e.var) * e.coeff;
    return s;
  }

  void init_state() {
    vstat_.assign(n_total_, kAtLower);
    xN_val_.assign(n_total_, 0.0);
    for (int j = 0; j < n_struct_ + m_; ++j) {
      if (std::isfinite(lb_[j]) && std::isfinite(ub_[j])) {
        // nearest bound to zero
        if (std::abs(lb_[j]) <= std::abs(ub_[j])) {
          vstat_[j] = kAtLower;
          xN_val_[j] = lb_[j];
        } else {
          vstat_[j] = kAtUpper;
          xN_val_[j] = ub_[j];
        }
      } else if (std::isfinite(lb_[j])) {
        vstat_[j] = kAtLower;
        xN_val_[j] = lb_[j];
      } else if (std::isfinite(ub_[j])) {
        vstat_[j] = kAtUpper;
        xN_val_[j] = ub_[j];
      } else {
        vstat_[j] = kFreeNB;
        xN_val_[j] = 0.0;
      }
    }

    // Residuals decide the artificial column signs; artificials form the basis.
    std::vector<double> r(b_);
    for (int j = 0; j < n_struct_ + m_; ++j) {
      if (xN_val_[j] == 0.0) continue;
      for (const auto& e : cols_[j]) r[e.var] -= e.coeff * xN_val_[j];
    }
    basis_.assign(m_, -1);
    xB_.assign(m_, 0.0);
    basis_pos_.assign(n_total_, -1);
    for (int i = 0; i < m_; ++i) {
      int a = art_begin() + i;
      cols_[a].clear();
      cols_[a].push_back({i, r[i] >= 0.0 ? 1.0 : -1.0});
      lb_[a] = 0.0;
      ub_[a] = kInf;
      basis_[i] = a;
      basis_pos_[a] = i;
      vstat_[a] = kBasic;
      xB_[i] = std::abs(r[i]);
    }

    Binv_ = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) Binv_(i, i) = cols_[art_begin() + i][0].coeff;  // +-1
    iterations_ = 0;
    pivots_since_refactor_ = 0;
  }

  Eigen::VectorXd dual_vector(const std::vector<double>& costs) const {
    Eigen::VectorXd cB(m_);
    for (int i = 0; i < m_; ++i) cB(i) = costs[basis_[i]];
    return Binv_.transpose() * cB;
  }

  void refactorize() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i)
      for (const auto& e : cols_[basis_[i]]) B(e.var, i) = e.coeff;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    Binv_ = lu.inverse();
    recompute_basics();
    pivots_since_refactor_ = 0;
  }

  void recompute_basics() {
    Eigen::VectorXd rhs(m_);
    for (int i = 0; i < m_; ++i) rhs(i) = b_[i];
    for (int j = 0; j < n_total_; ++j) {
      if (vstat_[j] == kBasic || xN_val_[j] == 0.0) continue;
      for (const auto& e : cols_[j]) rhs(e.var) -= e.coeff * xN_val_[j];
    }
    Eigen::VectorXd xb = Binv_ * rhs;
    for (int i = 0; i < m_; ++i) xB_[i] = xb(i);
  }

  // Pivot leftover artificials out of the basis where a structural or slack
  // column has a usable pivot element; dependent rows keep their artificial.
  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < art_begin()) continue;
      Eigen::VectorXd row = Binv_.row(i);
      int enter = -1;
      double best = 1e-7;
      for (int j = 0; j < n_struct_ + m_; ++j) {
        if (vstat_[j] == kBasic) continue;
        double piv = 0.0;
        for (const auto& e : cols_[j]) piv += row(e.var) * e.coeff;
        if (std::abs(piv) > best) {
          best = std::abs(piv);
          enter = j;
        }
      }
      if (enter < 0) continue;  // dependent row; artificial stays, clamped at 0
      Eigen::VectorXd w = Binv_ * col_dense(enter);
      apply_pivot(enter, i, w);
    }
  }

  Eigen::VectorXd col_dense(int j) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m_);
    for (const auto& e : cols_[j]) v(e.var) = e.coeff;
    return v;
  }

  // Degenerate basis exchange (zero step); used by drive_out_artificials only.
  void apply_pivot(int enter, int row, const Eigen::VectorXd& w) {
    int leave = basis_[row];
    vstat_[leave] = kAtLower;
    xN_val_[leave] = lb_[leave];  // artificials leave at 0
    basis_pos_[leave] = -1;
    basis_[row] = enter;
    basis_pos_[enter] = row;
    vstat_[enter] = kBasic;
    update_binv(row, w);
    recompute_basics();
  }

  void update_binv(int r, const Eigen::VectorXd& w) {
    double piv = w(r);
    Eigen::RowVectorXd pivot_row = Binv_.row(r) / piv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double wi = w(i);
      if (wi != 0.0) Binv_.row(i).noalias() -= wi * pivot_row;
    }
    Binv_.row(r) = pivot_row;
    ++pivots_since_refactor_;
  }

  SolveStatus run(const std::vector<double>& costs, bool phase1) {
    const double ptol = 1e-9;  // pivot magnitude tolerance
    long limit = opt_.max_lp_iterations > 0
                     ? opt_.max_lp_iterations
                     : 2000 + 200L * (n_struct_ + m_);
    int degenerate_streak = 0;
    bool bland = false;

    for (long it = 0; it < limit; ++it, ++iterations_) {
      if (pivots_since_refactor_ >= 100) refactorize();

      Eigen::VectorXd y = dual_vector(costs);

      // pricing
      int enter = -1, dir = 0;
      double best_score = opt_.opt_tol;
      for (int j = 0; j < n_total_; ++j) {
        if (vstat_[j] == kBasic) continue;
        if (lb_[j] == ub_[j]) continue;  // fixed, cannot move
        double d = costs[j] - sparse_dot(y, cols_[j]);
        int cand_dir = 0;
        if (vstat_[j] == kAtLower && d < -opt_.opt_tol) cand_dir = +1;
        else if (vstat_[j] == kAtUpper && d > opt_.opt_tol) cand_dir = -1;
        else if (vstat_[j] == kFreeNB && std::abs(d) > opt_.opt_tol) cand_dir = d < 0 ? +1 : -1;
        if (cand_dir == 0) continue;
        if (bland) {
          enter = j;
          dir = cand_dir;
          break;
        }
        if (std::abs(d) > best_score) {
          best_score = std::abs(d);
          enter = j;
          dir = cand_dir;
        }
      }
      if (enter < 0) return SolveStatus::Optimal;  // current phase optimal

      Eigen::VectorXd w = Binv_ * col_dense(enter);

      // ratio test: t = change magnitude of the entering variable
      double t_bound = (std::isfinite(lb_[enter]) && std::isfinite(ub_[enter]))
                           ? ub_[enter] - lb_[enter]
                           : kInf;
      double t_best = t_bound;
      int leave_row = -1;
      int leave_to = 0;  // 1 = lower, 2 = upper
      for (int i = 0; i < m_; ++i) {
        double rate = -dir * w(i);  // d xB_i / dt
        if (rate < -ptol) {
          double lbi = lb_[basis_[i]];
          if (!std::isfinite(lbi)) continue;
          double t = (xB_[i] - lbi) / (-rate);
          if (t < -1e-12) t = 0.0;
          if (t < t_best - 1e-12 ||
              (leave_row >= 0 && t < t_best + 1e-12 && better_leave(bland, i, leave_row, w))) {
            t_best = t;
            leave_row = i;
            leave_to = 1;
          }
        } else if (rate > ptol) {
          double ubi = ub_[basis_[i]];
          if (!std::isfinite(ubi)) continue;
          double t = (ubi - xB_[i]) / rate;
          if (t < -1e-12) t = 0.0;
          if (t < t_best - 1e-12 ||
              (leave_row >= 0 && t < t_best + 1e-12 && better_leave(bland, i, leave_row, w))) {
            t_best = t;
            leave_row = i;
            leave_to = 2;
          }
        }
      }

      if (!std::isfinite(t_best)) return SolveStatus::Unbounded;
      if (t_best < 1e-11) {
        if (++degenerate_streak > 60) bland = true;  // anti-cycling fallback
      } else {
        degenerate_streak = 0;
        bland = false;
      }
      double t = std::max(t_best, 0.0);

      // apply the step
      for (int i = 0; i < m_; ++i) xB_[i] += -dir * w(i) * t;

      if (leave_row < 0) {
        // bound flip, basis unchanged
        if (dir > 0) {
          vstat_[enter] = kAtUpper;
          xN_val_[enter] = ub_[enter];
        } else {
          vstat_[enter] = kAtLower;
          xN_val_[enter] = lb_[enter];
        }
        continue;
      }

      int leave = basis_[leave_row];
      double enter_val = xN_val_[enter] + dir * t;
      vstat_[leave] = leave_to == 1 ? kAtLower : kAtUpper;
      xN_val_[leave] = leave_to == 1 ? lb_[leave] : ub_[leave];
      basis_pos_[leave] = -1;
      basis_[leave_row] = enter;
      basis_pos_[enter] = leave_row;
      vstat_[enter] = kBasic;
      xB_[leave_row] = enter_val;
      update_binv(leave_row, w);
    }
    return SolveStatus::IterLimit;
  }

  // Deterministic tie-breaking in the ratio test: under Bland, the smallest
  // column index leaves; otherwise prefer the larger pivot magnitude.
  bool better_leave(bool bland, int cand_row, int cur_row, const Eigen::VectorXd& w) const {
    if (bland) return basis_[cand_row] < basis_[cur_row];
    return std::abs(w(cand_row)) > std::abs(w(cur_row));
  }

  const SolverOptions& opt_;
  int n_struct_ = 0, m_ = 0, n_total_ = 0;
  std::vector<std::vector<LinearTerm>> cols_;  // computational columns
  std::vector<double> lb_, ub_, cost_, b_;
  std::vector<int> basis_, basis_pos_, vstat_;
  std::vector<double> xB_, xN_val_;
  Eigen::MatrixXd Binv_;
  long iterations_ = 0;
  int pivots_since_refactor_ = 0;
};

}  // namespace

SolveResult solve_lp(const Model& model, const SolverOptions& options) {
  if (model.has_free_integers())
    throw SolveError("solve_lp: model has free integer variables (fix them or use solve_mip)");
  Simplex s(model, {}, options);
  return s.solve();
}

namespace {

SolveResult solve_relaxation(const Model& model, const std::vector<CutRow>& cuts,
                             const std::vector<double>& lb_over,
                             const std::vector<double>& ub_over, const SolverOptions& options) {
  Model relaxed = model;  // cheap for our sizes; bounds are overridden below
  for (int v = 0; v < relaxed.n_vars(); ++v) relaxed.set_bounds(v, lb_over[v], ub_over[v]);
  Simplex s(relaxed, cuts, options);
  return s.solve();
}

struct BnbNode {
  std::vector<std::pair<int, int>> fixes;  // (binary var, 0/1) along the path
  double bound;                            // parent LP objective (lower bound)
};

}  // namespace

SolveResult solve_mip(const Model& model, const SolverOptions& options) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

  std::vector<int> branchable;
  for (int v = 0; v < model.n_vars(); ++v)
    if (model.var_type(v) == VarType::Binary && model.ub(v) - model.lb(v) > 1e-12)
      branchable.push_back(v);

  std::vector<double> lb0(model.n_vars()), ub0(model.n_vars());
  for (int v = 0; v < model.n_vars(); ++v) {
    lb0[v] = model.lb(v);
    ub0[v] = model.ub(v);
  }

  std::vector<CutRow> cut_pool = options.initial_cuts;
  SolveResult best;
  best.status = SolveStatus::Infeasible;
  double ub_incumbent = kInf;
  long nodes = 0, lp_iters = 0;

  auto integral = [&](const std::vector<double>& x) {
    for (int v : branchable)
      if (std::abs(x[v] - std::round(x[v])) > options.int_tol) return false;
    return true;
  };
  auto rounded = [&](std::vector<double> x) {
    for (int v : branchable) x[v] = std::round(x[v]);
    return x;
  };

  // Warm start: verify the assignment by fixing binaries and re-solving.
  if (!options.warm_start.empty()) {
    std::vector<double> l = lb0, u = ub0;
    for (int v : branchable) {
      double r = options.warm_start[v] >= 0.5 ? 1.0 : 0.0;
      l[v] = r;
      u[v] = r;
    }
    SolveResult ws = solve_relaxation(model, cut_pool, l, u, options);
    lp_iters += ws.lp_iterations;
    if (ws.status == SolveStatus::Optimal) {
      bool ok = true;
      if (options.lazy_cb) {
        auto cuts = options.lazy_cb(ws.x);
        for (auto& c : cuts)
          if (c.violated_by(ws.x, options.feas_tol)) {
            cut_pool.push_back(c);
            ok = false;
          }
      }
      if (ok) {
        ub_incumbent = ws.objective;
        best = ws;
        best.duals.clear();
        best.reduced_costs.clear();
      }
    }
  }

  std::vector<BnbNode> stack;
  stack.push_back({{}, -kInf});

  bool hit_time = false, hit_gap = false, hit_nodes = false;
  double global_lb = -kInf;

  while (!stack.empty()) {
    if (elapsed() > options.time_limit_sec) {
      hit_time = true;
      break;
    }
    if (nodes >= options.max_nodes) {
      hit_nodes = true;
      break;
    }

    // best open bound for the gap test
    global_lb = kInf;
    for (const auto& nd : stack) global_lb = std::min(global_lb, nd.bound);
    if (std::isfinite(ub_incumbent)) {
      double gap = (ub_incumbent - global_lb) / std::max(1e-10, std::abs(ub_incumbent));
      if (gap <= options.mip_gap && !stack.empty() && std::isfinite(global_lb)) {
        hit_gap = true;
        break;
      }
    }

    BnbNode node = stack.back();
    stack.pop_back();
    if (node.bound >= ub_incumbent - 1e-12 * std::max(1.0, std::abs(ub_incumbent))) continue;

    std::vector<double> l = lb0, u = ub0;
    for (auto [v, val] : node.fixes) {
      l[v] = val;
      u[v] = val;
    }

    // Re-solve loop: lazy cuts found at an integral point re-enter here.
    int resolve_guard = 0;
    while (true) {
      if (++resolve_guard > 500)
        throw SolveError("lazy-cut separation did not terminate (500 re-solves at one node)");
      ++nodes;
      SolveResult lp = solve_relaxation(model, cut_pool, l, u, options);
      lp_iters += lp.lp_iterations;
      if (lp.status == SolveStatus::Infeasible) break;
      if (lp.status == SolveStatus::Unbounded) {
        SolveResult res;
        res.status = SolveStatus::Unbounded;
        res.nodes = nodes;
        res.lp_iterations = lp_iters;
        return res;
      }
      if (lp.status != SolveStatus::Optimal)
        throw SolveError(std::string("node relaxation failed: ") + to_string(lp.status));
      if (lp.objective >= ub_incumbent - 1e-12 * std::max(1.0, std::abs(ub_incumbent))) break;

      if (integral(lp.x)) {
        std::vector<double> xi = rounded(lp.x);
        if (options.lazy_cb) {
          auto cuts = options.lazy_cb(xi);
          std::vector<CutRow> violated;
          for (auto& c : cuts)
            if (c.violated_by(xi, options.feas_tol)) violated.push_back(std::move(c));
          if (!violated.empty()) {
            for (auto& c : violated) cut_pool.push_back(std::move(c));
            continue;  // re-solve this node against the grown pool
          }
        }
        if (lp.objective < ub_incumbent) {
          ub_incumbent = lp.objective;
          best = lp;
          best.x = xi;
          best.duals.clear();
          best.reduced_costs.clear();
        }
        break;
      }

      // branch on the most fractional binary (ties: lowest index)
      int bvar = -1;
      double bestfrac = -1.0;
      for (int v : branchable) {
        double f = std::abs(lp.x[v] - std::round(lp.x[v]));
        if (f > options.int_tol && f > bestfrac + 1e-15) {
          bestfrac = f;
          bvar = v;
        }
      }
      if (bvar < 0) break;  // numerically integral; handled above
      int near = lp.x[bvar] >= 0.5 ? 1 : 0;
      BnbNode far_child{node.fixes, lp.objective};
      far_child.fixes.emplace_back(bvar, 1 - near);
      BnbNode near_child{node.fixes, lp.objective};
      near_child.fixes.emplace_back(bvar, near);
      stack.push_back(std::move(far_child));
      stack.push_back(std::move(near_child));  // explored first (LIFO)
      break;
    }
  }

  SolveResult res = std::move(best);
  res.nodes = nodes;
  res.lp_iterations = lp_iters;
  if (std::isfinite(ub_incumbent)) {
    double lb = stack.empty() && !hit_time && !hit_gap && !hit_nodes ? ub_incumbent : global_lb;
    if (!std::isfinite(lb)) lb = global_lb;
    res.best_bound = lb;
    res.mip_gap = std::isfinite(lb)
                      ? std::max(0.0, (ub_incumbent - lb) / std::max(1e-10, std::abs(ub_incumbent)))
                      : kInf;
    if (hit_time) res.status = SolveStatus::TimeLimit;
    else if (hit_nodes) res.status = SolveStatus::IterLimit;
    else if (hit_gap) res.status = SolveStatus::GapLimit;
    else res.status = SolveStatus::Optimal;
  } else {
    res.status = hit_time ? SolveStatus::TimeLimit : SolveStatus::Infeasible;
    res.nodes = nodes;
  }
  return res;
}

}  // namespace riskuc
