#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace riskuc {

enum class RowSense { LessEqual, GreaterEqual, Equal };
enum class VarType { Continuous, Binary };

struct LinearTerm {
  int var = -1;
  double coeff = 0.0;
};

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// In-memory LP/MILP: variables with bounds, sparse rows, linear objective,
// sense = minimize. Binary variables must carry bounds within {0,1}.
class Model {
 public:
  int add_var(double lb, double ub, double obj, VarType type = VarType::Continuous,
              std::string name = "");
  int add_row(std::vector<LinearTerm> terms, RowSense sense, double rhs, std::string name = "");

  // Bound tightening; used for branching and for fixing integers so duals
  // keep mapping to the same constraint rows.
  void set_bounds(int var, double lb, double ub);
  void set_obj_coeff(int var, double obj);

  // Fixes every binary variable to its (rounded) value from `values`,
  // indexed by variable. Non-binary entries are ignored.
  void fix_binaries(const std::vector<double>& values);

  int n_vars() const { return static_cast<int>(lb_.size()); }
  int n_rows() const { return static_cast<int>(rhs_.size()); }
  double lb(int v) const { return lb_[v]; }
  double ub(int v) const { return ub_[v]; }
  double obj(int v) const { return obj_[v]; }
  VarType var_type(int v) const { return type_[v]; }
  const std::string& var_name(int v) const { return vname_[v]; }
  const std::vector<LinearTerm>& row(int r) const { return rows_[r]; }
  RowSense row_sense(int r) const { return sense_[r]; }
  double row_rhs(int r) const { return rhs_[r]; }
  const std::string& row_name(int r) const { return rname_[r]; }
  bool has_free_integers() const;

 private:
  std::vector<double> lb_, ub_, obj_;
  std::vector<VarType> type_;
  std::vector<std::string> vname_;
  std::vector<std::vector<LinearTerm>> rows_;
  std::vector<RowSense> sense_;
  std::vector<double> rhs_;
  std::vector<std::string> rname_;
};

enum class SolveStatus { Optimal, GapLimit, TimeLimit, IterLimit, Infeasible, Unbounded };

const char* to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::IterLimit;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double dual_objective = std::numeric_limits<double>::quiet_NaN();  // LP only
  std::vector<double> x;              // primal values per variable
  std::vector<double> duals;          // per row; LPs (or fixed-integer models) only
  std::vector<double> reduced_costs;  // per variable; LP only
  double mip_gap = 0.0;
  double best_bound = std::numeric_limits<double>::quiet_NaN();
  long lp_iterations = 0;
  long nodes = 0;
  std::string message;

  bool ok() const { return status == SolveStatus::Optimal || status == SolveStatus::GapLimit; }
};

// A lazily separated inequality, globally valid for the MIP.
struct CutRow {
  std::vector<LinearTerm> terms;
  RowSense sense = RowSense::GreaterEqual;
  double rhs = 0.0;
  std::string name;

  double activity(const std::vector<double>& x) const;
  bool violated_by(const std::vector<double>& x, double tol) const;
};

// Invoked at every integral incumbent candidate with the full primal vector.
// Returned cuts that the candidate violates are added before the incumbent
// can be accepted; the final incumbent violates no cut the callback emits.
using LazyCutCallback = std::function<std::vector<CutRow>(const std::vector<double>& x)>;

struct SolverOptions {
  double feas_tol = 1e-6;
  double opt_tol = 1e-7;  // reduced-cost tolerance
  double int_tol = 1e-6;
  double mip_gap = 1e-6;
  double time_limit_sec = std::numeric_limits<double>::infinity();
  long max_lp_iterations = 0;  // 0 = automatic
  long max_nodes = 50'000'000;
  LazyCutCallback lazy_cb;
  // Optional MIP warm start: full-length variable vector; binaries are
  // rounded and checked for feasibility before seeding the incumbent.
  std::vector<double> warm_start;
  std::vector<CutRow> initial_cuts;  // pre-seeded rows (root cuts)
};

// Solves a pure LP (or a model whose integer variables are all fixed by
// bounds). Throws SolveError if a binary variable is left free.
SolveResult solve_lp(const Model& model, const SolverOptions& options = {});

// Branch-and-bound on binary variables; deterministic. Statuses:
// Optimal (proved), GapLimit (target gap met), TimeLimit (best incumbent).
SolveResult solve_mip(const Model& model, const SolverOptions& options = {});

struct BackendInfo {
  std::string name;
  bool supports_lazy_cuts = false;
};
BackendInfo backend_info();

}  // namespace riskuc
