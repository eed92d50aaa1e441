#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace riskuc {

// Sentinel for "no ramping limit". Stored explicitly (the case schema uses
// the string "unbounded"); a generator carrying it gets no ramp rows at all.
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One linear piece of a convex production cost curve: cost >= slope*p + intercept.
struct CostSegment {
  double slope = 0.0;      // $/MWh
  double intercept = 0.0;  // $
};

struct Bus {
  std::string id;
  std::vector<double> forecast_load;     // MW per DA hour
  std::vector<double> rt_forecast_load;  // MW per RT period; defaults to parent hour forecast
};

struct Line {
  std::string from_bus;
  std::string to_bus;
  double susceptance = 0.0;  // per unit
  double capacity = 0.0;     // MW
  int from_idx = -1;         // resolved bus indices
  int to_idx = -1;
};

struct ThermalGenerator {
  std::string id;
  std::string bus;
  int bus_idx = -1;
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp_hourly = kUnbounded;  // MW per DA hour
  double ramp_rt = kUnbounded;      // MW per RT period
  double startup_cost = 0.0;
  double shutdown_cost = 0.0;
  std::vector<CostSegment> cost_segments;

  // Piecewise cost of output p while committed (max over segments).
  double cost_at(double p) const {
    double c = -std::numeric_limits<double>::infinity();
    for (const auto& s : cost_segments) c = std::max(c, s.slope * p + s.intercept);
    return c;
  }
  double max_slope() const {
    double m = 0.0;
    for (const auto& s : cost_segments) m = std::max(m, s.slope);
    return m;
  }
  bool has_hourly_ramp() const { return std::isfinite(ramp_hourly); }
  bool has_rt_ramp() const { return std::isfinite(ramp_rt); }
};

struct WindGenerator {
  std::string id;
  std::string bus;
  int bus_idx = -1;
  std::vector<double> forecast_cap;     // MW per DA hour
  std::vector<double> rt_forecast_cap;  // MW per RT period; defaults to parent hour forecast
};

// DA hours, the critical RT window, and the partial-fixing flex window.
// RT periods are derived: n_tp consecutive periods per RT hour, in hour order.
struct TimeStructure {
  std::vector<int> da_hours;     // hour labels, ordered
  std::vector<int> rt_hours;     // subset of da_hours, ordered
  int n_tp = 1;                  // RT periods per hour
  std::vector<int> flex_window;  // hour labels where commitment may deviate

  int n_da() const { return static_cast<int>(da_hours.size()); }
  int n_rt_hours() const { return static_cast<int>(rt_hours.size()); }
  int n_rt_periods() const { return n_rt_hours() * n_tp; }

  // Index of an hour label within da_hours; -1 if absent.
  int hour_index(int label) const {
    for (int h = 0; h < n_da(); ++h)
      if (da_hours[h] == label) return h;
    return -1;
  }
  // DA-hour index of RT period r.
  int rt_parent_hour(int r) const { return hour_index(rt_hours[r / n_tp]); }
  // Position of RT period r within rt_hours (its RT hour index).
  int rt_hour_of(int r) const { return r / n_tp; }
  bool hour_in_flex(int hour_idx) const {
    for (int label : flex_window)
      if (hour_index(label) == hour_idx) return true;
    return false;
  }
  // DA-hour index preceding the first RT hour, or -1 when the window starts
  // at the first hour (then the first RT period has no ramp anchor).
  int rt_anchor_hour() const {
    if (rt_hours.empty()) return -1;
    return hour_index(rt_hours.front()) - 1;
  }
};

struct PowerSystem {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<ThermalGenerator> thermal_generators;
  std::vector<WindGenerator> wind_generators;
  TimeStructure time;
  double voll_da = 0.0;  // $/MWh, DA value of lost load
  double voll_rt = 0.0;  // $/MWh, RT value of lost load (> voll_da)

  int n_buses() const { return static_cast<int>(buses.size()); }
  int n_lines() const { return static_cast<int>(lines.size()); }
  int n_thermal() const { return static_cast<int>(thermal_generators.size()); }
  int n_wind() const { return static_cast<int>(wind_generators.size()); }

  int bus_index(const std::string& id) const;

  // Checks every structural invariant; throws ValidationError naming the
  // violated one. Called by load_case; call again after manual edits.
  void validate() const;
};

// Parses and validates a JSON case file. Throws ParseError (with field
// context) or ValidationError.
PowerSystem load_case(const std::string& path);

// Builds a PowerSystem from already-parsed JSON text.
PowerSystem parse_case(const std::string& text, const std::string& origin = "<string>");

// Serializes to the same schema load_case reads (round-trip stable).
std::string serialize_case(const PowerSystem& sys);

enum class HistoryKind { Load, Wind };

// Past observations, one row per timestamp, one column per bus / wind farm.
struct HistoryMatrix {
  std::vector<std::string> column_ids;
  Eigen::MatrixXd values;  // rows = observations, MW

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

// Reads a CSV with a header row of bus/farm ids. Column count (and ids,
// when they match by name) are checked against the system for `kind`.
// At least two observation rows are required.
HistoryMatrix load_history(const std::string& path, HistoryKind kind, const PowerSystem& sys);

HistoryMatrix parse_history(const std::string& text, HistoryKind kind, const PowerSystem& sys,
                            const std::string& origin = "<string>");

}  // namespace riskuc
