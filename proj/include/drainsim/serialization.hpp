#pragma once

// serialization.hpp: strict JSON codecs for the core value types.
//
// Parsing is strict: unknown fields are rejected and every violation in a
// document is reported, not just the first. Serialize -> parse is the
// identity for all types here.

#include <nlohmann/json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "drainsim/core.hpp"

namespace drainsim {

using json = nlohmann::json;

namespace detail {

// Field-by-field reader over one JSON object. Tracks which keys were
// consumed so finish() can flag the rest as unknown; accumulates every
// violation into a shared list instead of throwing on the first.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path, std::vector<std::string>& errs)
      : j_(j), path_(std::move(path)), errs_(errs) {
    if (!j_.is_object()) {
      errs_.push_back(path_ + ": expected a JSON object");
      broken_ = true;
    }
  }

  bool broken() const { return broken_; }

  const json* get(const std::string& key, bool required) {
    if (broken_) return nullptr;
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) {
      if (required) errs_.push_back(path_ + ": missing field '" + key + "'");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(const std::string& key, bool required) {
    const json* v = get(key, required);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      errs_.push_back(path_ + "." + key + ": expected a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<int> integer(const std::string& key, bool required) {
    const json* v = get(key, required);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      errs_.push_back(path_ + "." + key + ": expected an integer");
      return std::nullopt;
    }
    return v->get<int>();
  }

  std::optional<bool> boolean(const std::string& key, bool required) {
    const json* v = get(key, required);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      errs_.push_back(path_ + "." + key + ": expected a boolean");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  std::optional<std::string> text(const std::string& key, bool required) {
    const json* v = get(key, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      errs_.push_back(path_ + "." + key + ": expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<std::set<std::string>> string_set(const std::string& key,
                                                  bool required) {
    const json* v = get(key, required);
    if (!v) return std::nullopt;
    if (!v->is_array()) {
      errs_.push_back(path_ + "." + key + ": expected an array of strings");
      return std::nullopt;
    }
    std::set<std::string> out;
    for (const auto& e : *v) {
      if (!e.is_string()) {
        errs_.push_back(path_ + "." + key + ": expected an array of strings");
        return std::nullopt;
      }
      out.insert(e.get<std::string>());
    }
    return out;
  }

  // Flags any key that was never consumed. Call after all fields.
  void finish() {
    if (broken_) return;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        errs_.push_back(path_ + ": unknown field '" + it.key() + "'");
      }
    }
  }

  const std::string& path() const { return path_; }
  std::vector<std::string>& errors() { return errs_; }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& errs_;
  std::set<std::string> seen_;
  bool broken_ = false;
};

inline json parse_text(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw ParseError(std::string(what) + ": malformed JSON");
  }
  return j;
}

[[noreturn]] inline void throw_issues(const char* what,
                                      std::vector<std::string> issues) {
  std::string msg = std::string(what) + ":";
  for (const auto& i : issues) msg += "\n  - " + i;
  throw ParseError(msg, std::move(issues));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ComponentSpec / ComponentRegistry

inline json to_json(const ComponentSpec& c) {
  json j;
  j["id"] = c.id;
  j["drain_time_mean"] = c.drain_time_mean;
  j["drain_time_sd"] = c.drain_time_sd;
  j["drain_time_min"] = c.drain_time_min;
  j["drain_time_max"] = c.drain_time_max;
  j["category"] = to_string(c.category);
  if (c.required_setting) j["required_setting"] = *c.required_setting;
  if (c.required_permission) j["required_permission"] = *c.required_permission;
  j["permission_required_even_if_setting_enabled"] =
      c.permission_required_even_if_setting_enabled;
  if (c.stealth_level) j["stealth_level"] = *c.stealth_level;
  j["display_class"] = c.display_class;
  j["web_accessible"] = c.web_accessible;
  if (c.full_drain_minutes) j["full_drain_minutes"] = *c.full_drain_minutes;
  return j;
}

inline ComponentSpec component_from_json(const json& j, const std::string& path,
                                         std::vector<std::string>& errs) {
  detail::StrictObject o(j, path, errs);
  ComponentSpec c;
  if (auto v = o.text("id", true)) c.id = *v;
  if (auto v = o.number("drain_time_mean", true)) c.drain_time_mean = *v;
  if (auto v = o.number("drain_time_sd", true)) c.drain_time_sd = *v;
  if (auto v = o.number("drain_time_min", true)) c.drain_time_min = *v;
  if (auto v = o.number("drain_time_max", true)) c.drain_time_max = *v;
  if (auto v = o.text("category", true)) {
    if (auto cat = category_from_string(*v)) {
      c.category = *cat;
    } else {
      errs.push_back(path + ".category: unknown category '" + *v + "'");
    }
  }
  if (auto v = o.text("required_setting", false)) c.required_setting = *v;
  if (auto v = o.text("required_permission", false)) c.required_permission = *v;
  if (auto v = o.boolean("permission_required_even_if_setting_enabled", false)) {
    c.permission_required_even_if_setting_enabled = *v;
  }
  if (auto v = o.integer("stealth_level", false)) c.stealth_level = *v;
  if (auto v = o.boolean("display_class", false)) c.display_class = *v;
  if (auto v = o.boolean("web_accessible", false)) c.web_accessible = *v;
  if (auto v = o.number("full_drain_minutes", false)) c.full_drain_minutes = *v;
  o.finish();
  if (errs.empty()) {
    for (auto& issue : validate(c)) errs.push_back(path + ": " + issue);
  }
  return c;
}

inline json to_json(const ComponentRegistry& reg,
                    const std::string& version = {}) {
  json j;
  if (!version.empty()) j["version"] = version;
  j["components"] = json::array();
  for (const auto& [_, spec] : reg) j["components"].push_back(to_json(spec));
  return j;
}

// Parses a registry document: {"version": optional, "components": [...]}.
// Throws ParseError carrying the complete violation list.
inline ComponentRegistry parse_registry(const std::string& text) {
  json j = detail::parse_text(text, "registry");
  std::vector<std::string> errs;
  detail::StrictObject o(j, "registry", errs);
  o.text("version", false);
  ComponentRegistry reg;
  if (const json* arr = o.get("components", true)) {
    if (!arr->is_array()) {
      errs.push_back("registry.components: expected an array");
    } else {
      std::size_t i = 0;
      for (const auto& e : *arr) {
        ComponentSpec c = component_from_json(
            e, "registry.components[" + std::to_string(i) + "]", errs);
        if (reg.contains(c.id)) {
          errs.push_back("registry: duplicate component id '" + c.id + "'");
        }
        reg.add(std::move(c));
        ++i;
      }
    }
  }
  o.finish();
  if (!errs.empty()) detail::throw_issues("registry", std::move(errs));
  return reg;
}

// ---------------------------------------------------------------------------
// PowerModel

inline json to_json(const PowerModel& m) {
  json j;
  j["baseline_rate"] = m.baseline_rate;
  j["interference_eta"] = m.interference_eta;
  j["interference_overrides"] = json::object();
  for (const auto& [key, eta] : m.interference_overrides) {
    j["interference_overrides"][key] = eta;
  }
  j["dim_threshold"] = m.dim_threshold;
  j["dim_factor_phi"] = m.dim_factor_phi;
  j["charging_supply"] = m.charging_supply;
  j["poll_interval"] = m.poll_interval;
  j["drain_threshold"] = m.drain_threshold;
  return j;
}

// Parses a power-model document. Every field is optional (defaults are the
// uncalibrated model), but unknown fields and invalid values are rejected.
inline PowerModel parse_power_model(const std::string& text) {
  json j = detail::parse_text(text, "power model");
  std::vector<std::string> errs;
  detail::StrictObject o(j, "model", errs);
  PowerModel m;
  if (auto v = o.number("baseline_rate", false)) m.baseline_rate = *v;
  if (auto v = o.number("interference_eta", false)) m.interference_eta = *v;
  if (const json* ov = o.get("interference_overrides", false)) {
    if (!ov->is_object()) {
      errs.push_back("model.interference_overrides: expected an object");
    } else {
      for (auto it = ov->begin(); it != ov->end(); ++it) {
        if (!it->is_number()) {
          errs.push_back("model.interference_overrides['" + it.key() +
                         "']: expected a number");
        } else {
          m.interference_overrides[it.key()] = it->get<double>();
        }
      }
    }
  }
  if (auto v = o.number("dim_threshold", false)) m.dim_threshold = *v;
  if (auto v = o.number("dim_factor_phi", false)) m.dim_factor_phi = *v;
  if (auto v = o.number("charging_supply", false)) m.charging_supply = *v;
  if (auto v = o.number("poll_interval", false)) m.poll_interval = *v;
  if (auto v = o.number("drain_threshold", false)) m.drain_threshold = *v;
  o.finish();
  if (errs.empty()) {
    for (auto& issue : validate(m)) errs.push_back("model: " + issue);
  }
  if (!errs.empty()) detail::throw_issues("power model", std::move(errs));
  return m;
}

// ---------------------------------------------------------------------------
// DeviceProfile

inline json to_json(const DeviceProfile& p) {
  json j;
  j["granted_permissions"] = json::array();
  for (const auto& s : p.granted_permissions) j["granted_permissions"].push_back(s);
  j["enabled_settings"] = json::array();
  for (const auto& s : p.enabled_settings) j["enabled_settings"].push_back(s);
  j["initial_battery"] = p.initial_battery;
  j["charging"] = p.charging;
  j["battery_report_granularity"] = p.battery_report_granularity;
  return j;
}

inline DeviceProfile parse_device_profile(const std::string& text) {
  json j = detail::parse_text(text, "device profile");
  std::vector<std::string> errs;
  detail::StrictObject o(j, "profile", errs);
  DeviceProfile p;
  if (auto v = o.string_set("granted_permissions", false)) {
    p.granted_permissions = std::move(*v);
  }
  if (auto v = o.string_set("enabled_settings", false)) {
    p.enabled_settings = std::move(*v);
  }
  if (auto v = o.number("initial_battery", false)) p.initial_battery = *v;
  if (auto v = o.boolean("charging", false)) p.charging = *v;
  if (auto v = o.integer("battery_report_granularity", false)) {
    p.battery_report_granularity = *v;
  }
  o.finish();
  if (errs.empty()) {
    for (auto& issue : validate(p)) errs.push_back("profile: " + issue);
  }
  if (!errs.empty()) detail::throw_issues("device profile", std::move(errs));
  return p;
}

}  // namespace drainsim
