#include "riskuc/power_system.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace riskuc {

namespace {

[[noreturn]] void parse_fail(const std::string& origin, const std::string& what) {
  throw ParseError(origin + ": " + what);
}

const json& require_key(const json& j, const char* key, const std::string& context,
                        const std::string& origin) {
  if (!j.contains(key)) parse_fail(origin, context + ": missing key '" + key + "'");
  return j.at(key);
}

double number_at(const json& j, const char* key, const std::string& context,
                 const std::string& origin) {
  const json& v = require_key(j, key, context, origin);
  if (!v.is_number()) parse_fail(origin, context + ": '" + key + "' must be a number");
  return v.get<double>();
}

// Ramp fields accept a number or the explicit string "unbounded".
double ramp_at(const json& j, const char* key, const std::string& context,
               const std::string& origin) {
  const json& v = require_key(j, key, context, origin);
  if (v.is_string()) {
    if (v.get<std::string>() == "unbounded") return kUnbounded;
    parse_fail(origin, context + ": '" + key + "' string value must be \"unbounded\"");
  }
  if (!v.is_number()) parse_fail(origin, context + ": '" + key + "' must be a number or \"unbounded\"");
  return v.get<double>();
}

std::vector<double> number_list(const json& v, const std::string& context,
                                const std::string& origin) {
  if (!v.is_array()) parse_fail(origin, context + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) parse_fail(origin, context + ": non-numeric entry");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> int_list(const json& v, const std::string& context, const std::string& origin) {
  if (!v.is_array()) parse_fail(origin, context + ": expected an array of integers");
  std::vector<int> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number_integer()) parse_fail(origin, context + ": non-integer entry");
    out.push_back(e.get<int>());
  }
  return out;
}

bool all_finite_nonneg(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x) && x >= 0.0; });
}

json ramp_to_json(double r) {
  if (!std::isfinite(r)) return json("unbounded");
  return json(r);
}

}  // namespace

int PowerSystem::bus_index(const std::string& id) const {
  for (int i = 0; i < n_buses(); ++i)
    if (buses[i].id == id) return i;
  return -1;
}

void PowerSystem::validate() const {
  const int H = time.n_da();
  const int P = time.n_rt_periods();

  // time structure
  if (time.da_hours.empty()) throw ValidationError("time: da_hours is empty");
  if (time.n_tp < 1) throw ValidationError("time: n_tp must be a positive integer");
  {
    std::set<int> seen(time.da_hours.begin(), time.da_hours.end());
    if (static_cast<int>(seen.size()) != H) throw ValidationError("time: duplicate da_hours");
  }
  for (int label : time.rt_hours)
    if (time.hour_index(label) < 0)
      throw ValidationError("time: rt_hour " + std::to_string(label) + " not in da_hours");
  for (int label : time.flex_window)
    if (time.hour_index(label) < 0)
      throw ValidationError("time: flex_window hour " + std::to_string(label) +
                            " not in da_hours");
  for (int label : time.rt_hours)
    if (std::find(time.flex_window.begin(), time.flex_window.end(), label) ==
        time.flex_window.end())
      throw ValidationError("time: flex_window must contain every rt_hour (missing " +
                            std::to_string(label) + ")");
  for (size_t i = 1; i < time.rt_hours.size(); ++i)
    if (time.hour_index(time.rt_hours[i]) <= time.hour_index(time.rt_hours[i - 1]))
      throw ValidationError("time: rt_hours must be strictly increasing within da_hours");

  // buses
  if (buses.empty()) throw ValidationError("buses: at least one bus required");
  {
    std::set<std::string> ids;
    for (const auto& b : buses)
      if (!ids.insert(b.id).second) throw ValidationError("buses: duplicate id '" + b.id + "'");
  }
  for (const auto& b : buses) {
    if (static_cast<int>(b.forecast_load.size()) != H)
      throw ValidationError("bus '" + b.id + "': forecast_load length != number of DA hours");
    if (!all_finite_nonneg(b.forecast_load))
      throw ValidationError("bus '" + b.id + "': forecast_load must be finite and >= 0");
    if (static_cast<int>(b.rt_forecast_load.size()) != P)
      throw ValidationError("bus '" + b.id + "': rt_forecast_load length != number of RT periods");
    if (!all_finite_nonneg(b.rt_forecast_load))
      throw ValidationError("bus '" + b.id + "': rt_forecast_load must be finite and >= 0");
  }

  // lines
  for (const auto& l : lines) {
    if (l.from_idx < 0 || l.to_idx < 0)
      throw ValidationError("line " + l.from_bus + "->" + l.to_bus + ": unknown bus id");
    if (l.from_idx == l.to_idx)
      throw ValidationError("line " + l.from_bus + "->" + l.to_bus + ": from_bus == to_bus");
    if (!(l.susceptance > 0.0) || !std::isfinite(l.susceptance))
      throw ValidationError("line " + l.from_bus + "->" + l.to_bus + ": susceptance must be > 0");
    if (!(l.capacity > 0.0) || !std::isfinite(l.capacity))
      throw ValidationError("line " + l.from_bus + "->" + l.to_bus + ": capacity must be > 0");
  }

  // thermal generators
  double max_marginal = 0.0;
  for (const auto& g : thermal_generators) {
    if (g.bus_idx < 0) throw ValidationError("thermal '" + g.id + "': unknown bus '" + g.bus + "'");
    if (!(g.p_min >= 0.0) || !(g.p_min <= g.p_max))
      throw ValidationError("thermal '" + g.id + "': requires 0 <= p_min <= p_max");
    if (!(g.ramp_hourly > 0.0))
      throw ValidationError("thermal '" + g.id + "': ramp_hourly must be > 0");
    if (!(g.ramp_rt > 0.0)) throw ValidationError("thermal '" + g.id + "': ramp_rt must be > 0");
    if (!(g.startup_cost >= 0.0) || !(g.shutdown_cost >= 0.0))
      throw ValidationError("thermal '" + g.id + "': startup/shutdown costs must be >= 0");
    if (g.cost_segments.empty())
      throw ValidationError("thermal '" + g.id + "': cost_segments must be nonempty");
    // Convex increasing marginal cost: sorted by slope, intercepts nonincreasing.
    auto segs = g.cost_segments;
    std::sort(segs.begin(), segs.end(),
              [](const CostSegment& a, const CostSegment& b) { return a.slope < b.slope; });
    for (size_t o = 0; o + 1 < segs.size(); ++o) {
      if (segs[o].slope == segs[o + 1].slope)
        throw ValidationError("thermal '" + g.id + "': duplicate cost segment slope");
      if (segs[o].intercept < segs[o + 1].intercept)
        throw ValidationError("thermal '" + g.id +
                              "': cost segments do not form a convex increasing curve");
    }
    for (const auto& s : segs) {
      if (!std::isfinite(s.slope) || !std::isfinite(s.intercept))
        throw ValidationError("thermal '" + g.id + "': non-finite cost segment");
      max_marginal = std::max(max_marginal, s.slope);
    }
  }

  // wind generators
  for (const auto& w : wind_generators) {
    if (w.bus_idx < 0) throw ValidationError("wind '" + w.id + "': unknown bus '" + w.bus + "'");
    if (static_cast<int>(w.forecast_cap.size()) != H)
      throw ValidationError("wind '" + w.id + "': forecast_cap length != number of DA hours");
    if (!all_finite_nonneg(w.forecast_cap))
      throw ValidationError("wind '" + w.id + "': forecast_cap must be finite and >= 0");
    if (static_cast<int>(w.rt_forecast_cap.size()) != P)
      throw ValidationError("wind '" + w.id + "': rt_forecast_cap length != number of RT periods");
    if (!all_finite_nonneg(w.rt_forecast_cap))
      throw ValidationError("wind '" + w.id + "': rt_forecast_cap must be finite and >= 0");
  }

  // VOLL ordering
  if (!(voll_da > max_marginal))
    throw ValidationError("voll_da must exceed every generator marginal cost");
  if (!(voll_rt > voll_da)) throw ValidationError("voll_rt must exceed voll_da");

  // connectivity (union-find over lines)
  std::vector<int> parent(n_buses());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& l : lines) parent[find(l.from_idx)] = find(l.to_idx);
  for (int i = 1; i < n_buses(); ++i)
    if (find(i) != find(0)) throw ValidationError("network graph is not connected");
}

PowerSystem parse_case(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail(origin, e.what());
  }
  if (!j.is_object()) parse_fail(origin, "top level must be an object");

  PowerSystem sys;
  sys.voll_da = number_at(j, "voll_da", "case", origin);
  sys.voll_rt = number_at(j, "voll_rt", "case", origin);

  const json& jt = require_key(j, "time", "case", origin);
  sys.time.da_hours = int_list(require_key(jt, "da_hours", "time", origin), "time.da_hours", origin);
  sys.time.rt_hours = int_list(require_key(jt, "rt_hours", "time", origin), "time.rt_hours", origin);
  {
    const json& ntp = require_key(jt, "n_tp", "time", origin);
    if (!ntp.is_number_integer() || ntp.get<int>() < 1)
      parse_fail(origin, "time.n_tp must be a positive integer");
    sys.time.n_tp = ntp.get<int>();
  }
  sys.time.flex_window =
      int_list(require_key(jt, "flex_window", "time", origin), "time.flex_window", origin);

  const int P = sys.time.n_rt_periods();

  for (const auto& jb : require_key(j, "buses", "case", origin)) {
    Bus b;
    b.id = require_key(jb, "id", "bus", origin).get<std::string>();
    b.forecast_load =
        number_list(require_key(jb, "forecast_load", "bus '" + b.id + "'", origin),
                    "bus '" + b.id + "'.forecast_load", origin);
    if (jb.contains("rt_forecast_load")) {
      b.rt_forecast_load = number_list(jb.at("rt_forecast_load"),
                                       "bus '" + b.id + "'.rt_forecast_load", origin);
    } else {
      // default: parent hour's DA forecast
      b.rt_forecast_load.reserve(P);
      for (int r = 0; r < P; ++r) {
        int h = sys.time.rt_parent_hour(r);
        if (h < 0 || h >= static_cast<int>(b.forecast_load.size()))
          parse_fail(origin, "bus '" + b.id + "': cannot default rt_forecast_load (bad rt_hours)");
        b.rt_forecast_load.push_back(b.forecast_load[h]);
      }
    }
    sys.buses.push_back(std::move(b));
  }

  if (j.contains("lines")) {
    for (const auto& jl : j.at("lines")) {
      Line l;
      l.from_bus = require_key(jl, "from", "line", origin).get<std::string>();
      l.to_bus = require_key(jl, "to", "line", origin).get<std::string>();
      l.susceptance = number_at(jl, "susceptance", "line " + l.from_bus + "->" + l.to_bus, origin);
      l.capacity = number_at(jl, "capacity", "line " + l.from_bus + "->" + l.to_bus, origin);
      l.from_idx = sys.bus_index(l.from_bus);
      l.to_idx = sys.bus_index(l.to_bus);
      sys.lines.push_back(std::move(l));
    }
  }

  for (const auto& jg : require_key(j, "thermal_generators", "case", origin)) {
    ThermalGenerator g;
    g.id = require_key(jg, "id", "thermal generator", origin).get<std::string>();
    const std::string ctx = "thermal '" + g.id + "'";
    g.bus = require_key(jg, "bus", ctx, origin).get<std::string>();
    g.bus_idx = sys.bus_index(g.bus);
    g.p_min = number_at(jg, "p_min", ctx, origin);
    g.p_max = number_at(jg, "p_max", ctx, origin);
    g.ramp_hourly = ramp_at(jg, "ramp_hourly", ctx, origin);
    g.ramp_rt = ramp_at(jg, "ramp_rt", ctx, origin);
    g.startup_cost = number_at(jg, "startup_cost", ctx, origin);
    g.shutdown_cost = number_at(jg, "shutdown_cost", ctx, origin);
    for (const auto& js : require_key(jg, "cost_segments", ctx, origin)) {
      CostSegment s;
      s.slope = number_at(js, "slope", ctx + " cost segment", origin);
      s.intercept = number_at(js, "intercept", ctx + " cost segment", origin);
      g.cost_segments.push_back(s);
    }
    sys.thermal_generators.push_back(std::move(g));
  }

  if (j.contains("wind_generators")) {
    for (const auto& jw : j.at("wind_generators")) {
      WindGenerator w;
      w.id = require_key(jw, "id", "wind generator", origin).get<std::string>();
      const std::string ctx = "wind '" + w.id + "'";
      w.bus = require_key(jw, "bus", ctx, origin).get<std::string>();
      w.bus_idx = sys.bus_index(w.bus);
      w.forecast_cap = number_list(require_key(jw, "forecast_cap", ctx, origin),
                                   ctx + ".forecast_cap", origin);
      if (jw.contains("rt_forecast_cap")) {
        w.rt_forecast_cap = number_list(jw.at("rt_forecast_cap"), ctx + ".rt_forecast_cap", origin);
      } else {
        w.rt_forecast_cap.reserve(P);
        for (int r = 0; r < P; ++r) {
          int h = sys.time.rt_parent_hour(r);
          if (h < 0 || h >= static_cast<int>(w.forecast_cap.size()))
            parse_fail(origin, ctx + ": cannot default rt_forecast_cap (bad rt_hours)");
          w.rt_forecast_cap.push_back(w.forecast_cap[h]);
        }
      }
      sys.wind_generators.push_back(std::move(w));
    }
  }

  sys.validate();
  return sys;
}

PowerSystem load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open case file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_case(buf.str(), path);
}

std::string serialize_case(const PowerSystem& sys) {
  json j;
  j["voll_da"] = sys.voll_da;
  j["voll_rt"] = sys.voll_rt;
  j["time"] = {{"da_hours", sys.time.da_hours},
               {"rt_hours", sys.time.rt_hours},
               {"n_tp", sys.time.n_tp},
               {"flex_window", sys.time.flex_window}};
  j["buses"] = json::array();
  for (const auto& b : sys.buses)
    j["buses"].push_back({{"id", b.id},
                          {"forecast_load", b.forecast_load},
                          {"rt_forecast_load", b.rt_forecast_load}});
  j["lines"] = json::array();
  for (const auto& l : sys.lines)
    j["lines"].push_back({{"from", l.from_bus},
                          {"to", l.to_bus},
                          {"susceptance", l.susceptance},
                          {"capacity", l.capacity}});
  j["thermal_generators"] = json::array();
  for (const auto& g : sys.thermal_generators) {
    json segs = json::array();
    for (const auto& s : g.cost_segments)
      segs.push_back({{"slope", s.slope}, {"intercept", s.intercept}});
    j["thermal_generators"].push_back({{"id", g.id},
                                       {"bus", g.bus},
                                       {"p_min", g.p_min},
                                       {"p_max", g.p_max},
                                       {"ramp_hourly", ramp_to_json(g.ramp_hourly)},
                                       {"ramp_rt", ramp_to_json(g.ramp_rt)},
                                       {"startup_cost", g.startup_cost},
                                       {"shutdown_cost", g.shutdown_cost},
                                       {"cost_segments", segs}});
  }
  j["wind_generators"] = json::array();
  for (const auto& w : sys.wind_generators)
    j["wind_generators"].push_back({{"id", w.id},
                                    {"bus", w.bus},
                                    {"forecast_cap", w.forecast_cap},
                                    {"rt_forecast_cap", w.rt_forecast_cap}});
  return j.dump(2);
}

HistoryMatrix parse_history(const std::string& text, HistoryKind kind, const PowerSystem& sys,
                            const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) parse_fail(origin, "empty history file");

  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) {
      // trim
      size_t a = cell.find_first_not_of(" \t\r");
      size_t b = cell.find_last_not_of(" \t\r");
      cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    if (!s.empty() && s.back() == ',') cells.push_back("");
    return cells;
  };

  HistoryMatrix hist;
  hist.column_ids = split(line);
  const int expected =
      kind == HistoryKind::Load ? sys.n_buses() : sys.n_wind();
  const char* what = kind == HistoryKind::Load ? "buses" : "wind farms";
  if (static_cast<int>(hist.column_ids.size()) != expected)
    parse_fail(origin, "history has " + std::to_string(hist.column_ids.size()) +
                           " columns, system has " + std::to_string(expected) + " " + what);

  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split(line);
    if (static_cast<int>(cells.size()) != expected)
      parse_fail(origin, "line " + std::to_string(lineno) + ": expected " +
                             std::to_string(expected) + " cells, got " +
                             std::to_string(cells.size()));
    std::vector<double> row(expected);
    for (int c = 0; c < expected; ++c) {
      try {
        size_t pos = 0;
        row[c] = std::stod(cells[c], &pos);
        if (pos != cells[c].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        parse_fail(origin, "line " + std::to_string(lineno) + ", column " + std::to_string(c + 1) +
                               ": non-numeric cell '" + cells[c] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2)
    parse_fail(origin, "history needs at least 2 observation rows (covariance), got " +
                           std::to_string(rows.size()));

  hist.values.resize(static_cast<int>(rows.size()), expected);
  for (int r = 0; r < hist.rows(); ++r)
    for (int c = 0; c < expected; ++c) hist.values(r, c) = rows[r][c];
  return hist;
}

HistoryMatrix load_history(const std::string& path, HistoryKind kind, const PowerSystem& sys) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open history file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_history(buf.str(), kind, sys, path);
}

}  // namespace riskuc
