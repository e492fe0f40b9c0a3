#pragma once

// calibration.hpp: turn bench measurements into model parameters.
//
// The input is a table of drain measurements: "running X drained N% in
// avg/sd/max/min minutes", optionally with a full-drain runtime and a
// charging/unplugged context. From those this module derives per-component
// rates, the interference factor for a jointly-measured set, the low-level
// dim factor, and the charger supply rate.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "drainsim/core.hpp"
#include "drainsim/engine.hpp"
#include "drainsim/plan.hpp"

namespace drainsim {

enum class MeasurementContext { unplugged, charging };

inline std::string to_string(MeasurementContext c) {
  return c == MeasurementContext::charging ? "charging" : "unplugged";
}

// One measured row. `component_id` may name a single component or a
// '+'-joined set that was driven together (set rows feed the fits, not the
// per-component table). Times are minutes for draining `drain_pct` points.
struct MeasurementRecord {
  std::string component_id;
  double drain_pct = kDrainQuantumPct;
  double avg_minutes = 0.0;
  double sd_minutes = 0.0;
  double max_minutes = 0.0;
  double min_minutes = 0.0;
  std::optional<double> full_drain_minutes;
  MeasurementContext context = MeasurementContext::unplugged;

  bool is_set() const {
    return component_id.find('+') != std::string::npos;
  }
};

inline constexpr const char* kMeasurementsCsvHeader =
    "component,drain_pct,avg,sd,max,min,full_drain,context";

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline bool parse_csv_double(const std::string& field, double& out) {
  if (field.empty()) return false;
  try {
    std::size_t used = 0;
    out = std::stod(field, &used);
    return used == field.size() && std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace detail

// Parses the measurements table. Throws ParseError listing every problem
// with its 1-based line number; never partially succeeds.
inline std::vector<MeasurementRecord> parse_measurements_csv(
    const std::string& text) {
  std::vector<MeasurementRecord> records;
  std::vector<std::string> issues;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      saw_header = true;
      if (line != kMeasurementsCsvHeader) {
        issues.push_back("line 1: header must be exactly '" +
                         std::string(kMeasurementsCsvHeader) + "'");
      }
      continue;
    }
    const std::vector<std::string> f = detail::split_csv_line(line);
    if (f.size() != 8) {
      issues.push_back("line " + std::to_string(line_no) + ": expected 8 " +
                       "fields, got " + std::to_string(f.size()));
      continue;
    }
    MeasurementRecord r;
    r.component_id = f[0];
    bool ok = true;
    auto num = [&](int idx, const char* name, double& out) {
      if (!detail::parse_csv_double(f[idx], out)) {
        issues.push_back("line " + std::to_string(line_no) + ": field '" +
                         name + "' is not a number: '" + f[idx] + "'");
        ok = false;
      }
    };
    if (r.component_id.empty()) {
      issues.push_back("line " + std::to_string(line_no) +
                       ": component id is empty");
      ok = false;
    }
    num(1, "drain_pct", r.drain_pct);
    num(2, "avg", r.avg_minutes);
    num(3, "sd", r.sd_minutes);
    num(4, "max", r.max_minutes);
    num(5, "min", r.min_minutes);
    if (!f[6].empty()) {
      double fd = 0.0;
      num(6, "full_drain", fd);
      if (ok) r.full_drain_minutes = fd;
    }
    if (f[7].empty() || f[7] == "unplugged") {
      r.context = MeasurementContext::unplugged;
    } else if (f[7] == "charging") {
      r.context = MeasurementContext::charging;
    } else {
      issues.push_back("line " + std::to_string(line_no) +
                       ": context must be 'unplugged' or 'charging', got '" +
                       f[7] + "'");
      ok = false;
    }
    if (ok && !(r.drain_pct > 0.0)) {
      issues.push_back("line " + std::to_string(line_no) +
                       ": drain_pct must be > 0");
      ok = false;
    }
    if (ok) records.push_back(std::move(r));
  }
  if (!saw_header) issues.push_back("empty input: missing header line");
  if (!issues.empty()) {
    throw ParseError("measurements CSV is invalid", issues);
  }
  return records;
}

inline std::string format_measurements_csv(
    const std::vector<MeasurementRecord>& records) {
  std::string out = kMeasurementsCsvHeader;
  out += '\n';
  for (const auto& r : records) {
    out += r.component_id;
    out += ',' + detail::format_double(r.drain_pct);
    out += ',' + detail::format_double(r.avg_minutes);
    out += ',' + detail::format_double(r.sd_minutes);
    out += ',' + detail::format_double(r.max_minutes);
    out += ',' + detail::format_double(r.min_minutes);
    out += ',';
    if (r.full_drain_minutes) {
      out += detail::format_double(*r.full_drain_minutes);
    }
    out += ',' + to_string(r.context);
    out += '\n';
  }
  return out;
}

// Builds the per-component rate table from single-component unplugged rows.
// Statistics measured over a drain other than the standard quantum are
// rescaled linearly onto it. Set rows and charging rows are ignored here
// (they feed the fits below). Duplicate ids raise CalibrationError.
//
// The measurements carry no device metadata, so calibrated components
// default to: category software, no permission/setting requirements, not
// display-class, not web-accessible, stealth unset. Decorate the returned
// registry (or the emitted JSON) with device specifics afterwards.
inline ComponentRegistry calibrate_components(
    const std::vector<MeasurementRecord>& records) {
  ComponentRegistry reg;
  std::vector<std::string> issues;
  for (const auto& r : records) {
    if (r.is_set() || r.context == MeasurementContext::charging) continue;
    if (reg.contains(r.component_id)) {
      throw CalibrationError("duplicate measurement for component '" +
                             r.component_id + "'");
    }
    const double k = kDrainQuantumPct / r.drain_pct;
    ComponentSpec c;
    c.id = r.component_id;
    c.category = Category::software;
    c.drain_time_mean = r.avg_minutes * k;
    c.drain_time_sd = r.sd_minutes * k;
    c.drain_time_max = r.max_minutes * k;
    c.drain_time_min = r.min_minutes * k;
    c.full_drain_minutes = r.full_drain_minutes;
    for (const auto& issue : validate(c)) {
      issues.push_back(r.component_id + ": " + issue);
    }
    reg.add(std::move(c));
  }
  if (!issues.empty()) {
    std::string msg = "calibration produced invalid components:";
    for (const auto& i : issues) msg += "\n  - " + i;
    throw CalibrationError(msg);
  }
  return reg;
}

// ---------------------------------------------------------------------------
// Fits. Each consumes measurements, writes the fitted parameter into the
// model, and returns it.

// Interference: a set measured running together drains slower than the sum
// of its members' solo rates. eta = combined_rate / sum(member rates).
// For eta in (0, 1] the value is recorded as an exact-set override for the
// measured set and as the model's default for unmeasured multi-component
// sets. A super-additive measurement (eta > 1) is returned with a warning
// and recorded nowhere: the model only admits sub-additive interference,
// and clamping would silently invent data.
struct InterferenceFit {
  double eta = 1.0;
  std::string set_key;
  std::vector<std::string> members;
  std::vector<std::string> warnings;
};

inline InterferenceFit fit_interference(const MeasurementRecord& combined,
                                        const ComponentRegistry& registry,
                                        PowerModel& model) {
  std::vector<std::string> members;
  {
    std::string cur;
    for (char ch : combined.component_id + "+") {
      if (ch == '+') {
        if (!cur.empty()) members.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
  }
  if (members.size() < 2) {
    throw CalibrationError(
        "interference fit needs a '+'-joined set of at least two "
        "components, got '" +
        combined.component_id + "'");
  }
  if (!(combined.avg_minutes > 0.0)) {
    throw CalibrationError("interference fit: combined avg must be > 0");
  }
  double sum = 0.0;
  for (const auto& id : members) {
    if (!registry.contains(id)) {
      throw CalibrationError("interference fit references unknown component '" +
                             id + "'");
    }
    sum += registry.at(id).mean_rate();
  }
  const double combined_rate =
      rate_from_drain_time(combined.drain_pct, combined.avg_minutes);
  InterferenceFit fit;
  fit.eta = combined_rate / sum;
  fit.members = members;
  fit.set_key = active_set_key(
      std::set<std::string>(members.begin(), members.end()));
  if (fit.eta > 1.0) {
    fit.warnings.push_back(
        "set '" + fit.set_key + "' measured super-additive (eta = " +
        detail::format_double(fit.eta) +
        " > 1); value not recorded in the model");
  } else {
    model.interference_overrides[fit.set_key] = fit.eta;
    model.interference_eta = fit.eta;
  }
  return fit;
}

// Dim factor: below the dim threshold a display-class component drains
// slower by a factor phi. Solved from the component's solo rate and its
// measured full-drain runtime: the run spends (100 - thr)/rate minutes
// above the threshold, the rest below, so
//   phi = (thr / (T_full - (100 - thr)/rate)) / rate.
// The component must already be display-class, and the full drain must be
// slower than the undimmed prediction 100/rate (otherwise there is no tail
// to explain).
inline double fit_dim_factor(double full_drain_minutes,
                             const std::string& component_id,
                             const ComponentRegistry& registry,
                             PowerModel& model) {
  if (!registry.contains(component_id)) {
    throw CalibrationError("dim fit references unknown component '" +
                           component_id + "'");
  }
  const ComponentSpec& c = registry.at(component_id);
  if (!c.display_class) {
    throw CalibrationError("dim fit: component '" + component_id +
                           "' is not display-class; the dim factor only "
                           "applies to display-class rates");
  }
  const double rate = c.mean_rate();
  const double thr = model.dim_threshold;
  if (full_drain_minutes <= 100.0 / rate) {
    throw CalibrationError(
        "dim fit: full drain of '" + component_id + "' (" +
        detail::format_double(full_drain_minutes) +
        " min) is not slower than the undimmed prediction (" +
        detail::format_double(100.0 / rate) + " min); no dim tail to fit");
  }
  const double tail_minutes = full_drain_minutes - (100.0 - thr) / rate;
  const double phi = (thr / tail_minutes) / rate;
  // full_drain > 100/rate guarantees 0 < phi < 1.
  model.dim_factor_phi = phi;
  return phi;
}

// Charger supply: the same load measured unplugged and plugged in. The
// plugged run drains slower; the difference in rates is the supply.
inline double fit_charging_supply(const MeasurementRecord& unplugged,
                                  const MeasurementRecord& plugged,
                                  PowerModel& model) {
  if (unplugged.component_id != plugged.component_id) {
    throw CalibrationError(
        "charging fit needs the same load measured in both contexts, got '" +
        unplugged.component_id + "' vs '" + plugged.component_id + "'");
  }
  if (unplugged.drain_pct != plugged.drain_pct) {
    throw CalibrationError(
        "charging fit needs matching drain_pct in both rows");
  }
  if (!(unplugged.avg_minutes > 0.0) || !(plugged.avg_minutes > 0.0)) {
    throw CalibrationError("charging fit: avg must be > 0 in both rows");
  }
  const double r_unplugged =
      rate_from_drain_time(unplugged.drain_pct, unplugged.avg_minutes);
  const double r_plugged =
      rate_from_drain_time(plugged.drain_pct, plugged.avg_minutes);
  const double supply = r_unplugged - r_plugged;
  if (supply < 0.0) {
    throw CalibrationError(
        "charging fit: plugged-in run drained faster than unplugged; "
        "supply would be negative");
  }
  model.charging_supply = supply;
  return supply;
}

// ---------------------------------------------------------------------------
// Cross-validation: replay scenarios through the calibrated model and
// compare predicted runtimes against observed ones.

struct ValidationCase {
  std::string name;
  std::string label;  // "in_sample" or "held_out"
  AttackPlan plan;
  DeviceProfile profile;
  double observed_minutes = 0.0;
  // Scenarios the plan algebra cannot express are carried with a reason
  // and reported as skipped instead of silently dropped.
  std::optional<std::string> skip_reason;
};

struct ValidationRow {
  std::string name;
  std::string label;
  double observed_minutes = 0.0;
  double predicted_minutes = 0.0;
  double error_fraction = 0.0;  // |predicted - observed| / observed
  bool skipped = false;
  std::string skip_reason;
};

inline std::vector<ValidationRow> cross_validate(
    const PowerModel& model, const ComponentRegistry& registry,
    const std::vector<ValidationCase>& cases,
    const SimulationOptions& base_options = {}) {
  std::vector<ValidationRow> rows;
  rows.reserve(cases.size());
  for (const auto& vc : cases) {
    ValidationRow row;
    row.name = vc.name;
    row.label = vc.label;
    row.observed_minutes = vc.observed_minutes;
    if (vc.skip_reason) {
      row.skipped = true;
      row.skip_reason = *vc.skip_reason;
      rows.push_back(std::move(row));
      continue;
    }
    SimulationOptions opts = base_options;
    opts.mode = SimulationMode::deterministic;
    const SimulationTrace trace =
        simulate(vc.plan, vc.profile, model, registry, opts);
    row.predicted_minutes = trace.elapsed_minutes();
    row.error_fraction =
        std::abs(row.predicted_minutes - vc.observed_minutes) /
        vc.observed_minutes;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace drainsim
