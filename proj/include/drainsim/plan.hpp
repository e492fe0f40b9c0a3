#pragma once

// plan.hpp: the attack-plan DSL — goals, phases, triggers, launch vectors —
// plus feasibility checking against a device profile and stealth scoring.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "drainsim/core.hpp"
#include "drainsim/serialization.hpp"

namespace drainsim {

// ---------------------------------------------------------------------------
// Plan types

enum class GoalType {
  full_drain,       // run until the battery hits 0
  partial_drain,    // run until `delta` points have drained
  event_controlled  // no drain target; triggers/phases decide everything
};

struct Goal {
  GoalType type = GoalType::full_drain;
  double delta = 0.0;  // partial_drain only, points in (0, 100]
};

// One sequential stage: a set of components run in parallel, optionally for
// a fixed duration. Without a duration the phase runs until the simulation
// itself ends.
struct Phase {
  std::set<std::string> activate;
  std::optional<double> duration_minutes;
};

enum class TriggerConditionType {
  battery_below,    // reported level dropped below threshold
  battery_above,    // reported level rose above threshold
  charging_became,  // charging flag flipped to `charging_value`
  elapsed_exceeds   // simulated time passed `minutes`
};

struct TriggerCondition {
  TriggerConditionType type = TriggerConditionType::battery_below;
  double threshold = 0.0;       // battery_* (percent) / elapsed_exceeds (min)
  bool charging_value = false;  // charging_became only
};

enum class TriggerActionType { start, stop, stop_all, scale };

struct TriggerAction {
  TriggerActionType type = TriggerActionType::start;
  std::set<std::string> components;  // start/stop/scale
  double factor = 1.0;               // scale only, > 0
};

// Condition -> action rule evaluated every step. `once` disarms the rule
// after its first firing; otherwise it re-fires on every fresh entry into
// the satisfying region.
struct Trigger {
  TriggerCondition condition;
  TriggerAction action;
  bool once = false;
};

enum class LaunchLocation { app, web, proximity, remote };

enum class ControlMode { controlled, uncontrolled };

// Free-text bookkeeping; carried through verbatim, only `control` is
// validated against its enum.
struct PlanMetadata {
  std::string targets;
  ControlMode control = ControlMode::controlled;
  std::string process;
};

struct AttackPlan {
  Goal goal;
  std::vector<Phase> steps;
  std::vector<Trigger> triggers;
  LaunchLocation launch_location = LaunchLocation::app;
  PlanMetadata metadata;

  // Every component id the plan can ever touch (phases + trigger actions).
  std::set<std::string> referenced_components() const {
    std::set<std::string> out;
    for (const auto& p : steps) out.insert(p.activate.begin(), p.activate.end());
    for (const auto& t : triggers) {
      out.insert(t.action.components.begin(), t.action.components.end());
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Enum <-> string helpers

inline const char* to_string(LaunchLocation l) {
  switch (l) {
    case LaunchLocation::app: return "app";
    case LaunchLocation::web: return "web";
    case LaunchLocation::proximity: return "proximity";
    case LaunchLocation::remote: return "remote";
  }
  return "app";
}

inline std::optional<LaunchLocation> launch_location_from_string(
    const std::string& s) {
  if (s == "app") return LaunchLocation::app;
  if (s == "web") return LaunchLocation::web;
  if (s == "proximity") return LaunchLocation::proximity;
  if (s == "remote") return LaunchLocation::remote;
  return std::nullopt;
}

inline const char* to_string(TriggerConditionType t) {
  switch (t) {
    case TriggerConditionType::battery_below: return "battery_below";
    case TriggerConditionType::battery_above: return "battery_above";
    case TriggerConditionType::charging_became: return "charging_became";
    case TriggerConditionType::elapsed_exceeds: return "elapsed_exceeds";
  }
  return "battery_below";
}

inline const char* to_string(TriggerActionType t) {
  switch (t) {
    case TriggerActionType::start: return "start";
    case TriggerActionType::stop: return "stop";
    case TriggerActionType::stop_all: return "stop_all";
    case TriggerActionType::scale: return "scale";
  }
  return "start";
}

// ---------------------------------------------------------------------------
// Validation

// Structural checks plus registry reference checks. Returns every
// violation found; empty means the plan is usable.
inline std::vector<std::string> validate_plan(const AttackPlan& plan,
                                              const ComponentRegistry& reg) {
  std::vector<std::string> v;

  if (plan.goal.type == GoalType::partial_drain &&
      !(plan.goal.delta > 0.0 && plan.goal.delta <= 100.0)) {
    v.push_back("goal: partial_drain delta must be in (0, 100]");
  }

  bool activates_something = false;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const Phase& p = plan.steps[i];
    if (!p.activate.empty()) activates_something = true;
    if (p.duration_minutes && !(*p.duration_minutes > 0.0)) {
      v.push_back("steps[" + std::to_string(i) + "]: duration must be > 0");
    }
    for (const auto& id : p.activate) {
      if (!reg.contains(id)) {
        v.push_back("steps[" + std::to_string(i) + "]: unknown component '" +
                    id + "'");
      }
    }
  }

  for (std::size_t i = 0; i < plan.triggers.size(); ++i) {
    const Trigger& t = plan.triggers[i];
    const std::string where = "triggers[" + std::to_string(i) + "]";
    switch (t.condition.type) {
      case TriggerConditionType::battery_below:
      case TriggerConditionType::battery_above:
        if (!(t.condition.threshold >= 0.0 && t.condition.threshold <= 100.0)) {
          v.push_back(where + ": battery threshold must be in [0, 100]");
        }
        break;
      case TriggerConditionType::elapsed_exceeds:
        if (!(t.condition.threshold >= 0.0)) {
          v.push_back(where + ": elapsed_exceeds minutes must be >= 0");
        }
        break;
      case TriggerConditionType::charging_became:
        break;
    }
    switch (t.action.type) {
      case TriggerActionType::start:
        if (!t.action.components.empty()) activates_something = true;
        [[fallthrough]];
      case TriggerActionType::stop:
        if (t.action.components.empty()) {
          v.push_back(where + ": action needs a non-empty component set");
        }
        break;
      case TriggerActionType::scale:
        if (t.action.components.empty()) {
          v.push_back(where + ": action needs a non-empty component set");
        }
        if (!(t.action.factor > 0.0)) {
          v.push_back(where + ": scale factor must be > 0");
        }
        break;
      case TriggerActionType::stop_all:
        if (!t.action.components.empty()) {
          v.push_back(where + ": stop_all takes no component set");
        }
        break;
    }
    for (const auto& id : t.action.components) {
      if (!reg.contains(id)) {
        v.push_back(where + ": unknown component '" + id + "'");
      }
    }
  }

  if (!activates_something) {
    v.push_back(
        "plan never activates a component (needs a non-empty phase or a "
        "start trigger)");
  }
  return v;
}

// ---------------------------------------------------------------------------
// JSON codec

inline json to_json(const AttackPlan& plan) {
  json j;
  switch (plan.goal.type) {
    case GoalType::full_drain:
      j["goal"] = {{"type", "full_drain"}};
      break;
    case GoalType::partial_drain:
      j["goal"] = {{"type", "partial_drain"}, {"delta", plan.goal.delta}};
      break;
    case GoalType::event_controlled:
      j["goal"] = {{"type", "event_controlled"}};
      break;
  }
  j["steps"] = json::array();
  for (const auto& p : plan.steps) {
    json jp;
    jp["activate"] = json::array();
    for (const auto& id : p.activate) jp["activate"].push_back(id);
    if (p.duration_minutes) jp["duration_minutes"] = *p.duration_minutes;
    j["steps"].push_back(std::move(jp));
  }
  j["triggers"] = json::array();
  for (const auto& t : plan.triggers) {
    json jc;
    jc["type"] = to_string(t.condition.type);
    if (t.condition.type == TriggerConditionType::charging_became) {
      jc["value"] = t.condition.charging_value;
    } else if (t.condition.type == TriggerConditionType::elapsed_exceeds) {
      jc["minutes"] = t.condition.threshold;
    } else {
      jc["threshold"] = t.condition.threshold;
    }
    json ja;
    ja["type"] = to_string(t.action.type);
    if (t.action.type != TriggerActionType::stop_all) {
      ja["components"] = json::array();
      for (const auto& id : t.action.components) ja["components"].push_back(id);
    }
    if (t.action.type == TriggerActionType::scale) {
      ja["factor"] = t.action.factor;
    }
    json jt;
    jt["condition"] = std::move(jc);
    jt["action"] = std::move(ja);
    jt["once"] = t.once;
    j["triggers"].push_back(std::move(jt));
  }
  j["launch_location"] = to_string(plan.launch_location);
  json jm;
  jm["targets"] = plan.metadata.targets;
  jm["control"] = plan.metadata.control == ControlMode::controlled
                      ? "controlled"
                      : "uncontrolled";
  jm["process"] = plan.metadata.process;
  j["metadata"] = std::move(jm);
  return j;
}

inline std::string serialize_plan(const AttackPlan& plan) {
  return to_json(plan).dump(2);
}

struct PlanParseResult {
  std::optional<AttackPlan> plan;
  std::vector<std::string> violations;
  bool ok() const { return plan.has_value() && violations.empty(); }
};

// Parses and validates a plan document against a registry. Never throws on
// bad input: the result carries the complete violation list instead.
inline PlanParseResult parse_plan(const std::string& text,
                                  const ComponentRegistry& reg) {
  PlanParseResult result;
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    result.violations.push_back("plan: malformed JSON");
    return result;
  }

  std::vector<std::string>& errs = result.violations;
  detail::StrictObject o(j, "plan", errs);
  AttackPlan plan;

  if (const json* jg = o.get("goal", true)) {
    detail::StrictObject og(*jg, "plan.goal", errs);
    auto type = og.text("type", true);
    if (type) {
      if (*type == "full_drain") {
        plan.goal.type = GoalType::full_drain;
      } else if (*type == "partial_drain") {
        plan.goal.type = GoalType::partial_drain;
        if (auto d = og.number("delta", true)) plan.goal.delta = *d;
      } else if (*type == "event_controlled") {
        plan.goal.type = GoalType::event_controlled;
      } else if (*type == "degradation") {
        errs.push_back(
            "plan.goal: unsupported goal 'degradation' — battery-wear "
            "attacks need charge-cycle chemistry this simulator does not "
            "model; supported goals: full_drain, partial_drain, "
            "event_controlled");
      } else {
        errs.push_back("plan.goal: unknown goal type '" + *type +
                       "' (supported: full_drain, partial_drain, "
                       "event_controlled)");
      }
    }
    og.finish();
  }

  if (const json* js = o.get("steps", false)) {
    if (!js->is_array()) {
      errs.push_back("plan.steps: expected an array");
    } else {
      std::size_t i = 0;
      for (const auto& e : *js) {
        const std::string where = "plan.steps[" + std::to_string(i) + "]";
        detail::StrictObject op(e, where, errs);
        Phase phase;
        if (auto ids = op.string_set("activate", true)) phase.activate = *ids;
        if (auto d = op.number("duration_minutes", false)) {
          phase.duration_minutes = *d;
        }
        op.finish();
        plan.steps.push_back(std::move(phase));
        ++i;
      }
    }
  }

  if (const json* jt = o.get("triggers", false)) {
    if (!jt->is_array()) {
      errs.push_back("plan.triggers: expected an array");
    } else {
      std::size_t i = 0;
      for (const auto& e : *jt) {
        const std::string where = "plan.triggers[" + std::to_string(i) + "]";
        detail::StrictObject ot(e, where, errs);
        Trigger trig;
        if (const json* jc = ot.get("condition", true)) {
          detail::StrictObject oc(*jc, where + ".condition", errs);
          auto type = oc.text("type", true);
          if (type) {
            if (*type == "battery_below" || *type == "battery_above") {
              trig.condition.type = *type == "battery_below"
                                        ? TriggerConditionType::battery_below
                                        : TriggerConditionType::battery_above;
              if (auto th = oc.number("threshold", true)) {
                trig.condition.threshold = *th;
              }
            } else if (*type == "charging_became") {
              trig.condition.type = TriggerConditionType::charging_became;
              if (auto b = oc.boolean("value", true)) {
                trig.condition.charging_value = *b;
              }
            } else if (*type == "elapsed_exceeds") {
              trig.condition.type = TriggerConditionType::elapsed_exceeds;
              if (auto m = oc.number("minutes", true)) {
                trig.condition.threshold = *m;
              }
            } else {
              errs.push_back(where + ".condition: unknown condition type '" +
                             *type + "'");
            }
          }
          oc.finish();
        }
        if (const json* ja = ot.get("action", true)) {
          detail::StrictObject oa(*ja, where + ".action", errs);
          auto type = oa.text("type", true);
          if (type) {
            if (*type == "start") {
              trig.action.type = TriggerActionType::start;
            } else if (*type == "stop") {
              trig.action.type = TriggerActionType::stop;
            } else if (*type == "stop_all") {
              trig.action.type = TriggerActionType::stop_all;
            } else if (*type == "scale") {
              trig.action.type = TriggerActionType::scale;
            } else {
              errs.push_back(where + ".action: unknown action type '" + *type +
                             "'");
            }
            if (*type == "start" || *type == "stop" || *type == "scale") {
              if (auto ids = oa.string_set("components", true)) {
                trig.action.components = *ids;
              }
            }
            if (*type == "scale") {
              if (auto f = oa.number("factor", true)) trig.action.factor = *f;
            }
          }
          oa.finish();
        }
        if (auto once = ot.boolean("once", false)) trig.once = *once;
        ot.finish();
        plan.triggers.push_back(std::move(trig));
        ++i;
      }
    }
  }

  if (auto loc = o.text("launch_location", true)) {
    if (auto l = launch_location_from_string(*loc)) {
      plan.launch_location = *l;
    } else {
      errs.push_back("plan.launch_location: unknown location '" + *loc +
                     "' (supported: app, web, proximity, remote)");
    }
  }

  if (const json* jm = o.get("metadata", false)) {
    detail::StrictObject om(*jm, "plan.metadata", errs);
    if (auto t = om.text("targets", false)) plan.metadata.targets = *t;
    if (auto c = om.text("control", false)) {
      if (*c == "controlled") {
        plan.metadata.control = ControlMode::controlled;
      } else if (*c == "uncontrolled") {
        plan.metadata.control = ControlMode::uncontrolled;
      } else {
        errs.push_back(
            "plan.metadata.control: must be 'controlled' or 'uncontrolled'");
      }
    }
    if (auto p = om.text("process", false)) plan.metadata.process = *p;
    om.finish();
  }

  o.finish();

  // Structural validation runs on whatever parsed, even when the document
  // already has shape errors, so one round reports every problem at once.
  auto structural = validate_plan(plan, reg);
  errs.insert(errs.end(), structural.begin(), structural.end());
  if (errs.empty()) result.plan = std::move(plan);
  return result;
}

// ---------------------------------------------------------------------------
// Feasibility

struct ComponentVerdict {
  std::string component_id;
  bool ok = true;
  std::vector<std::string> reasons;
};

// Outcome of gating a plan against a device profile. feasible holds
// exactly when all three blocking sets are empty; for non-web launches
// web_blocked is always empty, so feasibility reduces to the two missing
// sets.
struct FeasibilityReport {
  bool feasible = true;
  std::set<std::string> missing_permissions;
  std::set<std::string> missing_settings;
  std::set<std::string> web_blocked;  // components unreachable from the web
  std::vector<ComponentVerdict> verdicts;
};

// Gates every referenced component against the profile.
//
// Web launches: pages run with no install-time grants, so permission and
// setting checks do not apply — instead every component must itself be
// web_accessible. Other launch vectors check, per component:
//   - permission ok: not required once running, or granted;
//   - setting ok: none required, or enabled, or the component's permission
//     is granted (a granted permission authorizes flipping the setting).
//
// The plan must already be valid for the registry; unknown ids throw.
inline FeasibilityReport check_feasibility(const AttackPlan& plan,
                                           const DeviceProfile& profile,
                                           const ComponentRegistry& reg) {
  FeasibilityReport report;
  for (const auto& id : plan.referenced_components()) {
    const ComponentSpec& c = reg.at(id);
    ComponentVerdict verdict;
    verdict.component_id = id;

    if (plan.launch_location == LaunchLocation::web) {
      if (!c.web_accessible) {
        verdict.ok = false;
        verdict.reasons.push_back("not reachable from a web launch");
        report.web_blocked.insert(id);
      }
    } else {
      const bool perm_granted =
          c.required_permission &&
          profile.granted_permissions.count(*c.required_permission) != 0;
      if (c.permission_required_even_if_setting_enabled && !perm_granted) {
        verdict.ok = false;
        verdict.reasons.push_back("missing permission " +
                                  *c.required_permission);
        report.missing_permissions.insert(*c.required_permission);
      }
      if (c.required_setting &&
          profile.enabled_settings.count(*c.required_setting) == 0 &&
          !perm_granted) {
        verdict.ok = false;
        verdict.reasons.push_back(
            "setting " + *c.required_setting + " disabled" +
            (c.required_permission
                 ? " (grant " + *c.required_permission + " to enable it)"
                 : ""));
        report.missing_settings.insert(*c.required_setting);
      }
    }
    report.verdicts.push_back(std::move(verdict));
  }
  report.feasible = report.missing_permissions.empty() &&
                    report.missing_settings.empty() &&
                    report.web_blocked.empty();
  return report;
}

inline json to_json(const FeasibilityReport& r) {
  json j;
  j["feasible"] = r.feasible;
  j["missing_permissions"] = json::array();
  for (const auto& p : r.missing_permissions) j["missing_permissions"].push_back(p);
  j["missing_settings"] = json::array();
  for (const auto& s : r.missing_settings) j["missing_settings"].push_back(s);
  j["web_blocked"] = json::array();
  for (const auto& c : r.web_blocked) j["web_blocked"].push_back(c);
  j["verdicts"] = json::array();
  for (const auto& v : r.verdicts) {
    json jv;
    jv["component"] = v.component_id;
    jv["ok"] = v.ok;
    jv["reasons"] = v.reasons;
    j["verdicts"].push_back(std::move(jv));
  }
  return j;
}

// ---------------------------------------------------------------------------
// Stealth

// A plan is only as quiet as its loudest component: the score is the
// minimum stealth level over everything the plan touches (0 = immediately
// visible, 4 = no observable side effect). Components without an assessed
// level make the score meaningless, so they raise instead of guessing.
inline int stealth_score(const AttackPlan& plan, const ComponentRegistry& reg) {
  auto refs = plan.referenced_components();
  if (refs.empty()) {
    throw std::invalid_argument("stealth_score: plan references no components");
  }
  int score = 4;
  for (const auto& id : refs) {
    const ComponentSpec& c = reg.at(id);
    if (!c.stealth_level) {
      throw std::invalid_argument("stealth not configured for component '" +
                                  id + "'");
    }
    score = std::min(score, *c.stealth_level);
  }
  return score;
}

}  // namespace drainsim
