#include "riskuc/uncertainty.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace riskuc {

StressorVector StressorVector::zeros(int K, int n_periods, bool with_wind) {
  StressorVector s;
  s.alpha_d.assign(K, std::vector<double>(n_periods, 0.0));
  if (with_wind) s.alpha_w.assign(K, std::vector<double>(n_periods, 0.0));
  return s;
}

namespace {

// Top-K eigenpairs of the sample covariance, descending, with the sign
// convention that makes grids reproducible.
void decompose(const Eigen::MatrixXd& hist, int K, std::vector<Eigen::VectorXd>& modes,
               std::vector<double>& eigvals, double& total_variance,
               std::vector<std::string>& warnings, const char* label) {
  const int n = static_cast<int>(hist.cols());
  const int rows = static_cast<int>(hist.rows());
  Eigen::RowVectorXd mean = hist.colwise().mean();
  Eigen::MatrixXd centered = hist.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / double(rows - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw ValidationError("eigendecomposition failed");
  total_variance = cov.trace();

  modes.clear();
  eigvals.clear();
  const double zero_tol = 1e-12 * std::max(1.0, total_variance);
  for (int k = 0; k < K; ++k) {
    int src = n - 1 - k;  // Eigen sorts ascending
    double lam = src >= 0 ? es.eigenvalues()(src) : 0.0;
    Eigen::VectorXd q = src >= 0 ? Eigen::VectorXd(es.eigenvectors().col(src))
                                 : Eigen::VectorXd::Zero(n);
    if (lam < zero_tol) {
      // a zero-variance direction carries no stress: scenarios collapse to
      // the baseline along it
      lam = 0.0;
      q.setZero();
    }
    // sign: largest-magnitude component positive, ties to the lowest index
    int arg = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(q(i)) > std::abs(q(arg)) + 1e-15) arg = i;
    if (q(arg) < 0.0) q = -q;
    modes.push_back(std::move(q));
    eigvals.push_back(lam);
  }
  int rank_nonzero = 0;
  for (int i = 0; i < n; ++i)
    if (es.eigenvalues()(i) > zero_tol) ++rank_nonzero;
  if (K > rank_nonzero)
    warnings.push_back(std::string(label) + ": K=" + std::to_string(K) + " exceeds the " +
                       std::to_string(rank_nonzero) + " numerically nonzero eigenvalues");
}

}  // namespace

UncertaintySet build_uncertainty_set(const PowerSystem& sys, const HistoryMatrix& load_hist,
                                     const HistoryMatrix* wind_hist, int K, double R_d,
                                     double R_w, double sigma_mult) {
  if (K < 1) throw ValidationError("uncertainty set: K must be >= 1");
  if (R_d < 0.0 || R_w < 0.0) throw ValidationError("uncertainty set: R must be >= 0");
  if (sigma_mult < 0.0) throw ValidationError("uncertainty set: sigma_rule must be >= 0");
  if (load_hist.rows() < 2) throw ValidationError("uncertainty set: load history needs >= 2 rows");
  if (load_hist.cols() != sys.n_buses())
    throw ValidationError("uncertainty set: load history column count != bus count");
  if (sys.n_wind() > 0) {
    if (wind_hist == nullptr)
      throw ValidationError("uncertainty set: wind history required (system has wind farms)");
    if (wind_hist->cols() != sys.n_wind())
      throw ValidationError("uncertainty set: wind history column count != wind farm count");
    if (wind_hist->rows() < 2)
      throw ValidationError("uncertainty set: wind history needs >= 2 rows");
  }

  UncertaintySet u;
  u.K = K;
  u.n_rt_hours = sys.time.n_rt_hours();
  u.n_tp = sys.time.n_tp;
  u.load.R = R_d;
  u.load.sigma = sigma_mult * R_d;
  u.wind.R = R_w;
  u.wind.sigma = sigma_mult * R_w;

  std::vector<Eigen::VectorXd> modes;
  std::vector<double> eigvals;
  double total = 0.0;
  decompose(load_hist.values, K, modes, eigvals, total, u.warnings, "load");
  // one covariance per RT hour; a single history is shared by all hours
  u.load.modes.assign(u.n_rt_hours, modes);
  u.load.eigvals.assign(u.n_rt_hours, eigvals);
  u.load.total_variance.assign(u.n_rt_hours, total);

  if (sys.n_wind() > 0) {
    decompose(wind_hist->values, K, modes, eigvals, total, u.warnings, "wind");
    u.wind.modes.assign(u.n_rt_hours, modes);
    u.wind.eigvals.assign(u.n_rt_hours, eigvals);
    u.wind.total_variance.assign(u.n_rt_hours, total);
  }

  const int P = sys.time.n_rt_periods();
  u.base_load.assign(sys.n_buses(), std::vector<double>(P, 0.0));
  for (int b = 0; b < sys.n_buses(); ++b)
    for (int r = 0; r < P; ++r) u.base_load[b][r] = sys.buses[b].rt_forecast_load[r];
  u.base_wind.assign(sys.n_wind(), std::vector<double>(P, 0.0));
  for (int k = 0; k < sys.n_wind(); ++k)
    for (int r = 0; r < P; ++r) u.base_wind[k][r] = sys.wind_generators[k].rt_forecast_cap[r];
  return u;
}

UncertaintySet UncertaintySet::regrain(const PowerSystem& eval_sys) const {
  if (eval_sys.time.n_rt_hours() != n_rt_hours)
    throw ValidationError("regrain: RT hour structure differs");
  UncertaintySet u = *this;
  u.n_tp = eval_sys.time.n_tp;
  const int P = eval_sys.time.n_rt_periods();
  u.base_load.assign(eval_sys.n_buses(), std::vector<double>(P, 0.0));
  for (int b = 0; b < eval_sys.n_buses(); ++b)
    for (int r = 0; r < P; ++r) u.base_load[b][r] = eval_sys.buses[b].rt_forecast_load[r];
  u.base_wind.assign(eval_sys.n_wind(), std::vector<double>(P, 0.0));
  for (int k = 0; k < eval_sys.n_wind(); ++k)
    for (int r = 0; r < P; ++r) u.base_wind[k][r] = eval_sys.wind_generators[k].rt_forecast_cap[r];
  return u;
}

namespace {

void check_kind(const UncertaintySet::KindData& kd, const std::vector<std::vector<double>>& alpha,
                int K, int P, bool enforce_sum, const char* label) {
  if (static_cast<int>(alpha.size()) != K)
    throw ValidationError(std::string(label) + " stressor: mode count != K");
  for (const auto& row : alpha)
    if (static_cast<int>(row.size()) != P)
      throw ValidationError(std::string(label) + " stressor: period count mismatch");
  const double tol = 1e-9 * (1.0 + kd.R);
  for (int t = 0; t < P; ++t) {
    double sum = 0.0;
    for (int k = 0; k < K; ++k) {
      if (std::abs(alpha[k][t]) > kd.R + tol)
        throw ValidationError(std::string(label) + " stressor exceeds R at mode " +
                              std::to_string(k + 1) + ", period " + std::to_string(t + 1));
      sum += alpha[k][t];
    }
    if (enforce_sum && std::abs(sum) > kd.sigma + tol)
      throw ValidationError(std::string(label) + " stressor sum exceeds Sigma at period " +
                            std::to_string(t + 1));
  }
}

}  // namespace

void check_stressor(const UncertaintySet& uset, const StressorVector& alpha, bool enforce_sum) {
  check_kind(uset.load, alpha.alpha_d, uset.K, uset.n_periods(), enforce_sum, "load");
  if (!uset.base_wind.empty())
    check_kind(uset.wind, alpha.alpha_w, uset.K, uset.n_periods(), enforce_sum, "wind");
}

Scenario realize(const UncertaintySet& uset, const StressorVector& alpha, NegativePolicy policy,
                 bool enforce_sum) {
  check_stressor(uset, alpha, enforce_sum);
  const int P = uset.n_periods();
  Scenario s;
  s.d_rt = uset.base_load;
  s.p_cap_rt = uset.base_wind;
  for (int r = 0; r < P; ++r) {
    int hour = uset.hour_of_period(r);
    for (int k = 0; k < uset.K; ++k) {
      const Eigen::VectorXd& q = uset.load.modes[hour][k];
      for (int i = 0; i < q.size(); ++i) s.d_rt[i][r] += q(i) * alpha.alpha_d[k][r];
      if (!uset.base_wind.empty()) {
        const Eigen::VectorXd& qw = uset.wind.modes[hour][k];
        for (int i = 0; i < qw.size(); ++i) s.p_cap_rt[i][r] += qw(i) * alpha.alpha_w[k][r];
      }
    }
  }
  auto fix = [&](std::vector<std::vector<double>>& mat, const char* label) {
    for (size_t i = 0; i < mat.size(); ++i) {
      for (int r = 0; r < P; ++r) {
        if (mat[i][r] >= 0.0) continue;
        if (policy == NegativePolicy::Error)
          throw ValidationError(std::string("realize: negative ") + label + " at index " +
                                std::to_string(i + 1) + ", period " + std::to_string(r + 1));
        mat[i][r] = 0.0;
      }
    }
  };
  fix(s.d_rt, "load");
  fix(s.p_cap_rt, "wind cap");
  return s;
}

int n_load_patterns(int K) { return K == 3 ? 2 : (1 << K); }
int n_wind_patterns(int K) { return 1 << K; }

namespace {

// Sign patterns in enumeration order. K = 3 load grids follow the recipe
// order [R,-R,R], [R,R,-R]; everything else counts in binary, bit k set
// meaning -R on mode k.
std::vector<std::vector<double>> sign_patterns(int K, double R, bool load_kind) {
  std::vector<std::vector<double>> out;
  if (load_kind && K == 3) {
    out.push_back({R, -R, R});
    out.push_back({R, R, -R});
    return out;
  }
  for (int mask = 0; mask < (1 << K); ++mask) {
    std::vector<double> p(K);
    for (int k = 0; k < K; ++k) p[k] = (mask >> k) & 1 ? -R : R;
    out.push_back(std::move(p));
  }
  return out;
}

// In-place last-stressor adjustment for one (kind, period): if any realized
// entry goes negative, move alpha_K to the extreme feasible value, clamped to
// the [-R, R] box. Remaining negatives (entries insensitive to mode K) are
// left to the ClipZero realization.
void adjust_last_stressor(const UncertaintySet::KindData& kd,
                          const std::vector<std::vector<double>>& base, int hour, int period,
                          int K, std::vector<std::vector<double>>& alpha) {
  const int n = static_cast<int>(base.size());
  if (n == 0) return;
  const Eigen::VectorXd& qK = kd.modes[hour][K - 1];
  // partial = base + sum_{k<K-1} Q_k alpha_k
  std::vector<double> partial(n);
  bool negative = false;
  for (int i = 0; i < n; ++i) {
    double v = base[i][period];
    for (int k = 0; k < K; ++k) v += kd.modes[hour][k](i) * alpha[k][period];
    if (v < 0.0) negative = true;
    partial[i] = v - qK(i) * alpha[K - 1][period];
  }
  if (!negative) return;

  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    double q = qK(i);
    if (q > 1e-14) lo = std::max(lo, -partial[i] / q);
    else if (q < -1e-14) hi = std::min(hi, -partial[i] / q);
  }
  double aK = alpha[K - 1][period];
  double adjusted = aK > 0.0 ? hi : lo;  // largest (resp. smallest) feasible value
  if (!std::isfinite(adjusted)) adjusted = aK;
  adjusted = std::clamp(adjusted, -kd.R, kd.R);
  alpha[K - 1][period] = adjusted;
}

}  // namespace

std::vector<StressorVector> grid_points(const UncertaintySet& uset) {
  const int K = uset.K;
  const int P = uset.n_periods();
  const bool with_wind = !uset.base_wind.empty();
  auto load_pats = sign_patterns(K, uset.load.R, true);
  auto wind_pats = sign_patterns(K, uset.wind.R, false);

  std::vector<StressorVector> grids;
  const size_t n_wind_p = with_wind ? wind_pats.size() : 1;
  for (size_t li = 0; li < load_pats.size(); ++li) {
    for (size_t wi = 0; wi < n_wind_p; ++wi) {
      StressorVector s = StressorVector::zeros(K, P, with_wind);
      for (int k = 0; k < K; ++k)
        for (int r = 0; r < P; ++r) {
          s.alpha_d[k][r] = load_pats[li][k];
          if (with_wind) s.alpha_w[k][r] = wind_pats[wi][k];
        }
      for (int r = 0; r < P; ++r) {
        adjust_last_stressor(uset.load, uset.base_load, uset.hour_of_period(r), r, K, s.alpha_d);
        if (with_wind)
          adjust_last_stressor(uset.wind, uset.base_wind, uset.hour_of_period(r), r, K, s.alpha_w);
      }
      grids.push_back(std::move(s));
    }
  }
  return grids;
}

}  // namespace riskuc
