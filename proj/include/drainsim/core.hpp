#pragma once

// core.hpp: value types shared by every other drainsim header.
//
// The model is a percent-based reservoir: battery charge lives in [0, 100]
// and every component is characterized by how long it takes to drain the
// 5-point reference quantum. All rates are percentage points per minute.
// Everything here is plain value-semantic data; nothing holds global state,
// so instances can be copied freely across threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace drainsim {

// Drain-time statistics are expressed as "minutes to drain this many
// percentage points". Records measured against a different quantum are
// rescaled linearly on ingest (see calibration.hpp).
inline constexpr double kDrainQuantumPct = 5.0;

// Slack for comparisons that the model places exactly on a step or poll
// boundary; keeps accumulated floating-point noise from flipping a
// crossing that is analytically exact. 1e-9 points is far below any
// physical battery resolution.
inline constexpr double kLevelEps = 1e-9;

// ---------------------------------------------------------------------------
// Errors

// Raised when a document (JSON/CSV) cannot be parsed under strict rules.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(std::string msg, std::vector<std::string> issues = {})
      : std::runtime_error(std::move(msg)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

// Raised when measurement data cannot support a requested fit.
class CalibrationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a plan fails its feasibility gate and force was not set.
class InfeasiblePlanError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Rate conversions

// Converts "drained `pct` points in `minutes`" to points per minute.
// Zero pct is allowed (a component that drains nothing has rate 0).
inline double rate_from_drain_time(double pct, double minutes) {
  if (!(minutes > 0.0)) {
    throw std::invalid_argument("rate_from_drain_time: minutes must be > 0");
  }
  if (!(pct >= 0.0)) {
    throw std::invalid_argument("rate_from_drain_time: pct must be >= 0");
  }
  return pct / minutes;
}

// Converts a rate back to "minutes to drain `pct` points".
inline double drain_time_from_rate(double pct, double rate) {
  if (!(rate > 0.0)) {
    throw std::invalid_argument("drain_time_from_rate: rate must be > 0");
  }
  if (!(pct >= 0.0)) {
    throw std::invalid_argument("drain_time_from_rate: pct must be >= 0");
  }
  return pct / rate;
}

// ---------------------------------------------------------------------------
// ComponentSpec

enum class Category { hardware, software, network };

inline const char* to_string(Category c) {
  switch (c) {
    case Category::hardware: return "hardware";
    case Category::software: return "software";
    case Category::network: return "network";
  }
  return "hardware";
}

inline std::optional<Category> category_from_string(const std::string& s) {
  if (s == "hardware") return Category::hardware;
  if (s == "software") return Category::software;
  if (s == "network") return Category::network;
  return std::nullopt;
}

// One drainable device capability (or a composite scenario calibrated as a
// single unit). Drain-time stats are minutes per kDrainQuantumPct points.
struct ComponentSpec {
  std::string id;
  double drain_time_mean = 0.0;
  double drain_time_sd = 0.0;
  double drain_time_min = 0.0;
  double drain_time_max = 0.0;
  Category category = Category::hardware;

  // Gating: a component may require a device setting, a permission, or
  // both. When permission_required_even_if_setting_enabled is false, a
  // granted permission merely authorizes enabling the setting.
  std::optional<std::string> required_setting;
  std::optional<std::string> required_permission;
  bool permission_required_even_if_setting_enabled = false;

  // 0 = immediately user-visible, 4 = no observable side effect. Unset
  // means "not yet assessed"; stealth scoring refuses to guess.
  std::optional<int> stealth_level;

  // display_class components run at dim_factor_phi times their rate once
  // the level sinks to the model's dim threshold (OS auto-dim).
  bool display_class = false;

  // Whether the component can be driven from a drive-by web page.
  bool web_accessible = false;

  // Observed minutes for a full 100 -> 0 drain, when measured.
  std::optional<double> full_drain_minutes;

  // Undimmed drain rate in points per minute.
  double mean_rate() const {
    return rate_from_drain_time(kDrainQuantumPct, drain_time_mean);
  }
};

// Checks a spec's internal consistency. Returns human-readable violations;
// empty means valid. Total: never throws, tolerates NaN.
inline std::vector<std::string> validate(const ComponentSpec& c) {
  std::vector<std::string> v;
  if (c.id.empty()) v.push_back("component id is empty");
  auto field = [&](double x, const char* name) {
    if (!(x > 0.0)) {
      v.push_back("component '" + c.id + "': " + name +
                  " must be strictly positive");
    }
  };
  field(c.drain_time_mean, "drain_time_mean");
  field(c.drain_time_min, "drain_time_min");
  field(c.drain_time_max, "drain_time_max");
  if (!(c.drain_time_sd >= 0.0)) {
    v.push_back("component '" + c.id + "': drain_time_sd must be >= 0");
  }
  if (!(c.drain_time_min <= c.drain_time_mean &&
        c.drain_time_mean <= c.drain_time_max)) {
    v.push_back("component '" + c.id +
                "': drain times must satisfy min <= mean <= max");
  }
  if (c.stealth_level && !(*c.stealth_level >= 0 && *c.stealth_level <= 4)) {
    v.push_back("component '" + c.id + "': stealth_level must be in [0, 4]");
  }
  if (c.permission_required_even_if_setting_enabled &&
      !c.required_permission) {
    v.push_back("component '" + c.id +
                "': permission_required_even_if_setting_enabled is set but "
                "no required_permission is named");
  }
  if (c.full_drain_minutes && !(*c.full_drain_minutes > 0.0)) {
    v.push_back("component '" + c.id + "': full_drain_minutes must be > 0");
  }
  return v;
}

// ---------------------------------------------------------------------------
// ComponentRegistry

// Id-keyed collection of component specs. std::map keeps iteration order
// deterministic, which every exporter in this library relies on.
class ComponentRegistry {
 public:
  ComponentRegistry() = default;

  // Inserts or replaces a spec keyed by its id.
  void add(ComponentSpec spec) {
    std::string id = spec.id;
    specs_[std::move(id)] = std::move(spec);
  }

  bool contains(const std::string& id) const { return specs_.count(id) != 0; }

  const ComponentSpec* find(const std::string& id) const {
    auto it = specs_.find(id);
    return it == specs_.end() ? nullptr : &it->second;
  }

  // Throwing lookup for contexts where the id was already validated.
  const ComponentSpec& at(const std::string& id) const {
    auto it = specs_.find(id);
    if (it == specs_.end()) {
      throw std::invalid_argument("unknown component '" + id + "'");
    }
    return it->second;
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(specs_.size());
    for (const auto& [id, _] : specs_) out.push_back(id);
    return out;
  }

  std::size_t size() const { return specs_.size(); }
  bool empty() const { return specs_.empty(); }

  auto begin() const { return specs_.begin(); }
  auto end() const { return specs_.end(); }

 private:
  std::map<std::string, ComponentSpec> specs_;
};

inline std::vector<std::string> validate(const ComponentRegistry& reg) {
  std::vector<std::string> v;
  for (const auto& [id, spec] : reg) {
    auto sub = validate(spec);
    v.insert(v.end(), sub.begin(), sub.end());
    if (spec.id != id) {
      v.push_back("registry key '" + id + "' does not match spec id '" +
                  spec.id + "'");
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// PowerModel

// Canonical map key for an interference override: sorted ids joined by '+'.
inline std::string active_set_key(const std::set<std::string>& ids) {
  std::string key;
  for (const auto& id : ids) {
    if (!key.empty()) key += '+';
    key += id;
  }
  return key;
}

// Device-level drain parameters fitted from measurements. Defaults describe
// an ideal uncalibrated device: no idle drain, perfectly additive
// components, no dimming, no charger.
struct PowerModel {
  // Points per minute drained when no component is active.
  double baseline_rate = 0.0;

  // Multiplier applied to the summed rates of any concurrently active set
  // of two or more components (sub-additivity of shared overheads).
  // Singletons always run at factor 1.
  double interference_eta = 1.0;

  // Exact-set overrides, keyed by active_set_key(). Take precedence over
  // interference_eta when the running set matches exactly.
  std::map<std::string, double> interference_overrides;

  // Below this level, display-class components drain at dim_factor_phi
  // times their rate (OS auto-dim).
  double dim_threshold = 5.0;
  double dim_factor_phi = 1.0;

  // Points per minute replenished while the charging flag is set.
  double charging_supply = 0.0;

  // Observation protocol parameters: seconds between battery polls and the
  // reported-percent drop that counts as a measurement.
  double poll_interval = 2.0;
  double drain_threshold = 5.0;
};

inline std::vector<std::string> validate(const PowerModel& m) {
  std::vector<std::string> v;
  if (!(m.baseline_rate >= 0.0)) v.push_back("baseline_rate must be >= 0");
  if (!(m.interference_eta > 0.0 && m.interference_eta <= 1.0)) {
    v.push_back("interference_eta must be in (0, 1]");
  }
  for (const auto& [key, eta] : m.interference_overrides) {
    if (!(eta > 0.0 && eta <= 1.0)) {
      v.push_back("interference override '" + key + "' must be in (0, 1]");
    }
    if (key.empty()) v.push_back("interference override has an empty key");
  }
  if (!(m.dim_threshold >= 0.0 && m.dim_threshold <= 100.0)) {
    v.push_back("dim_threshold must be in [0, 100]");
  }
  if (!(m.dim_factor_phi > 0.0 && m.dim_factor_phi <= 1.0)) {
    v.push_back("dim_factor_phi must be in (0, 1]");
  }
  if (!(m.charging_supply >= 0.0)) v.push_back("charging_supply must be >= 0");
  if (!(m.poll_interval > 0.0)) v.push_back("poll_interval must be > 0");
  if (!(m.drain_threshold > 0.0)) v.push_back("drain_threshold must be > 0");
  return v;
}

// Interference factor for an active set: 1 for empty sets and singletons,
// the exact-set override when one exists, the global eta otherwise.
inline double interference_factor(const PowerModel& m,
                                  const std::set<std::string>& active) {
  if (active.size() <= 1) return 1.0;
  auto it = m.interference_overrides.find(active_set_key(active));
  if (it != m.interference_overrides.end()) return it->second;
  return m.interference_eta;
}

// ---------------------------------------------------------------------------
// DeviceProfile

// The victim device: what is granted/enabled and the battery's starting
// condition.
struct DeviceProfile {
  std::set<std::string> granted_permissions;
  std::set<std::string> enabled_settings;
  double initial_battery = 100.0;
  bool charging = false;

  // Reported percent is quantized down to a multiple of this; it must
  // divide 100 so that a full battery reads 100 and an empty one 0.
  int battery_report_granularity = 1;
};

inline std::vector<std::string> validate(const DeviceProfile& p) {
  std::vector<std::string> v;
  if (!(p.initial_battery >= 0.0 && p.initial_battery <= 100.0)) {
    v.push_back("initial_battery must be in [0, 100]");
  }
  if (p.battery_report_granularity < 1 ||
      100 % p.battery_report_granularity != 0) {
    v.push_back("battery_report_granularity must be >= 1 and divide 100");
  }
  return v;
}

// ---------------------------------------------------------------------------
// BatteryState

// Instantaneous battery condition during a run. `level` is the continuous
// ground truth; `reported_level` is what on-device observers see (floored
// to the report granularity, so reported <= level < reported + g).
struct BatteryState {
  double level = 100.0;
  int reported_level = 100;
  bool charging = false;
  double elapsed_seconds = 0.0;
};

inline int quantize_level(double level, int granularity) {
  if (granularity < 1) granularity = 1;
  double clamped = std::clamp(level, 0.0, 100.0);
  return static_cast<int>(std::floor(clamped / granularity)) * granularity;
}

inline BatteryState make_battery_state(const DeviceProfile& profile) {
  BatteryState s;
  s.level = std::clamp(profile.initial_battery, 0.0, 100.0);
  s.reported_level = quantize_level(s.level, profile.battery_report_granularity);
  s.charging = profile.charging;
  s.elapsed_seconds = 0.0;
  return s;
}

namespace detail {

// Shortest round-trippable decimal form; keeps every exporter bit-stable.
std::string format_double(double x);

inline std::string join(const std::vector<std::string>& parts,
                        const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace detail

}  // namespace drainsim

#include <charconv>

namespace drainsim::detail {

inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) return "0";
  return std::string(buf, ptr);
}

}  // namespace drainsim::detail
